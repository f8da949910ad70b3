#include "gcid/coverage.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "gcid/errors.hpp"

namespace gcid {
namespace {

// Expected arrivals per replication beyond which the window is unusable.
constexpr double kMaxExpectedArrivals = 1e8;

}  // namespace

double simulation_window(const CoverageModel& model) {
  if (!(model.lambda > 0.0) || !std::isfinite(model.lambda))
    throw PreconditionError("arrival rate must be positive");
  const double w = model.service.quantile(kWindowQuantile);
  if (!std::isfinite(w))
    throw WindowError("service law has no finite window at the configured quantile; use a "
                      "bounded service law or a larger window");
  return w;
}

std::vector<Customer> generate_points(const CoverageModel& model, const TimeGrid& grid, Rng& rng) {
  const double w = simulation_window(model);
  const double start = grid[0] - w;
  const double length = grid[grid.size() - 1] - start;
  const double expected = model.lambda * length;
  if (expected > kMaxExpectedArrivals)
    throw WindowError("simulation window holds too many arrivals; shorten the grid or window");
  std::vector<Customer> points;
  if (!(expected > 0.0)) return points;
  std::poisson_distribution<std::int64_t> count_dist(expected);
  const std::int64_t count = count_dist(rng);
  points.reserve(static_cast<std::size_t>(count));
  for (std::int64_t l = 0; l < count; ++l) {
    Customer c;
    c.arrival = start + length * rng.uniform();
    c.service = model.service.sample(rng);
    c.mark = model.marks ? model.marks->sample(rng) : 1.0;
    points.push_back(c);
  }
  return points;
}

void simulate_into(const CoverageModel& model, const TimeGrid& grid, Rng& rng, std::span<double> out) {
  if (out.size() != grid.size()) throw PreconditionError("output length must match the grid size");
  std::fill(out.begin(), out.end(), 0.0);
  const auto& t = grid.epochs();
  for (const Customer& c : generate_points(model, grid, rng)) {
    // Present at t_k iff arrival <= t_k < arrival + service.
    auto k = static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), c.arrival) - t.begin());
    const double departure = c.arrival + c.service;
    for (; k < t.size() && t[k] < departure; ++k) out[k] += c.mark;
  }
}

std::vector<std::int64_t> simulate_counts(const CoverageModel& model, const TimeGrid& grid, Rng& rng) {
  if (model.marks) throw PreconditionError("counts are defined for unmarked models only");
  std::vector<double> x(grid.size());
  simulate_into(model, grid, rng, x);
  return {x.begin(), x.end()};
}

std::vector<double> simulate_marked(const CoverageModel& model, const TimeGrid& grid, Rng& rng) {
  std::vector<double> x(grid.size());
  simulate_into(model, grid, rng, x);
  return x;
}

WeightMatrix mu_rect(const CoverageModel& model, const TimeGrid& grid) {
  WeightMatrix a = weights(CorrelationStructure::integrated_tail(model.service), grid);
  const double rho = model.rho();
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i; j < a.size(); ++j) a(i, j) *= rho;
  return a;
}

Complex joint_cf_analytic(const CoverageModel& model, const TimeGrid& grid,
                          std::span<const double> theta) {
  if (theta.size() != grid.size()) throw PreconditionError("theta length must match the grid size");
  const WeightMatrix mu = mu_rect(model, grid);
  Complex total = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    double u = 0.0;
    for (std::size_t j = i; j < mu.size(); ++j) {
      u += theta[j];
      if (mu(i, j) == 0.0 || u == 0.0) continue;
      Complex chi_minus_one;
      if (model.marks) {
        chi_minus_one = model.marks->cf(u) - 1.0;
      } else {
        const double s = std::sin(0.5 * u);
        chi_minus_one = {-2.0 * s * s, std::sin(u)};
      }
      total += mu(i, j) * chi_minus_one;
    }
  }
  return total;
}

GcidProcess as_gcid(const CoverageModel& model) {
  auto structure = CorrelationStructure::integrated_tail(model.service);
  if (model.marks)
    return {LevyExponent::compound_poisson(model.rho(), *model.marks), std::move(structure)};
  return {LevyExponent::poisson(model.rho()), std::move(structure)};
}

}  // namespace gcid
