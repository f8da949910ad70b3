#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gcid/corrstruct.hpp"
#include "gcid/fidi.hpp"
#include "gcid/levy.hpp"

namespace gcid {

/// Marked M/GI/inf queue: Poisson(lambda) arrivals, service law G, optional
/// marks (eta = 1 when absent).
struct CoverageModel {
  double lambda;
  ServiceDistribution service;
  std::optional<MarkDistribution> marks;

  double rho() const { return lambda * service.mean(); }
};

/// Customers arriving before t_1 - W are ignored; W is this quantile of G.
inline constexpr double kWindowQuantile = 1.0 - 1e-9;

struct Customer {
  double arrival;
  double service;
  double mark;
};

/// Validates the model and returns the truncation window W.
double simulation_window(const CoverageModel& model);

/// Poisson arrivals on [t_1 - W, t_n] with their services and marks, drawn in
/// arrival-index order (count, then per customer: time, service, mark).
std::vector<Customer> generate_points(const CoverageModel& model, const TimeGrid& grid, Rng& rng);

/// X_{t_k} = sum of marks of customers present at t_k.
void simulate_into(const CoverageModel& model, const TimeGrid& grid, Rng& rng, std::span<double> out);
std::vector<std::int64_t> simulate_counts(const CoverageModel& model, const TimeGrid& grid, Rng& rng);
std::vector<double> simulate_marked(const CoverageModel& model, const TimeGrid& grid, Rng& rng);

/// mu(A_ij) = rho * a_ij with H = G_I.
WeightMatrix mu_rect(const CoverageModel& model, const TimeGrid& grid);

/// Sum over i <= j of mu(A_ij) (chi(theta_i + ... + theta_j) - 1).
Complex joint_cf_analytic(const CoverageModel& model, const TimeGrid& grid,
                          std::span<const double> theta);

/// The same process as a GCID: Poisson(rho) or compound Poisson(rho, marks)
/// with H = G_I.
GcidProcess as_gcid(const CoverageModel& model);

}  // namespace gcid
