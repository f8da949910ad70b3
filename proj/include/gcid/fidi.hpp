#pragma once

#include <Eigen/Dense>
#include <span>
#include <utility>
#include <vector>

#include "gcid/corrstruct.hpp"
#include "gcid/levy.hpp"

namespace gcid {

struct GcidProcess {
  LevyExponent law;
  CorrelationStructure structure;
};

/// Ray u_ij = indicator of coordinates first..last (zero-based), carrying a
/// copy of the one-dimensional Levy measure scaled by `weight`.
struct Ray {
  std::size_t first;
  std::size_t last;
  double weight;
};

struct FidiTriplet {
  Eigen::VectorXd beta;
  Eigen::MatrixXd sigma;
  std::vector<Ray> rays;
  double min_eigenvalue = 0.0;

  /// Sigma is positive semidefinite up to -1e-10 relative to its largest eigenvalue.
  bool is_psd() const;
};

/// Sum over i <= j of a_ij psi(theta_i + ... + theta_j).
Complex log_cf(const LevyExponent& law, const WeightMatrix& a, std::span<const double> theta);
Complex log_cf(const GcidProcess& p, const TimeGrid& grid, std::span<const double> theta);

/// log_cf on the full grid with theta_k = 0, and on the grid without epoch k.
/// k is zero-based.
std::pair<Complex, Complex> consistency_check(const GcidProcess& p, const TimeGrid& grid,
                                              std::span<const double> theta, std::size_t k);

/// Drift and Gaussian variance of the law's triplet, with the truncation
/// function 1(|x| < 1).
std::pair<double, double> triplet_drift_and_variance(const LevyExponent& law);

FidiTriplet triplet(const GcidProcess& p, const TimeGrid& grid);

/// Exact draw of (X_{t_1}, ..., X_{t_n}) from independent increments
/// Z_ij ~ law(a_ij), drawn in row-major (i, j) order.
void sample_fidi(const LevyExponent& law, const WeightMatrix& a, Rng& rng, std::span<double> out);
std::vector<double> sample_fidi(const GcidProcess& p, const TimeGrid& grid, Rng& rng);

/// variance * (1 - H(|h|)).
double covariance(const GcidProcess& p, double h);

/// CF of X_{t+h} - X_t: exp(H(h) [psi(theta) + psi(-theta)]).
Complex increment_cf(const GcidProcess& p, double h, double theta);

/// E[(X_{t2} - X_{t1})^2 (X_{t3} - X_{t2})^2] for a zero-mean law.
double fourth_moment_increment_product(const GcidProcess& p, double t1, double t2, double t3);

/// Same quantity from the cumulants and the three H values H(t2-t1),
/// H(t3-t2), H(t3-t1).
double fourth_moment_from_h(double variance, double fourth_cumulant, double h12, double h23,
                            double h13);

}  // namespace gcid
