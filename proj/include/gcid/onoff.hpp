#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gcid/corrstruct.hpp"
#include "gcid/fidi.hpp"
#include "gcid/levy.hpp"
#include "gcid/stats.hpp"
#include "json.hpp"

namespace gcid {

/// Two-state Markov source on {0, r}: OFF -> ON at rate lambda, ON -> OFF at rate mu.
struct OnOffSource {
  double lambda;
  double mu;
  double r;

  double pi() const { return lambda / (lambda + mu); }
  double alpha() const { return lambda + mu; }
  void validate() const;
};

/// P(t) indexed [from][to] with state 0 = OFF, 1 = ON.
Eigen::Matrix2d transition_matrix(const OnOffSource& src, double t);

/// Stationary start, then exact transitions between epochs. One uniform per epoch.
std::vector<double> simulate_source_path(const OnOffSource& src, const TimeGrid& grid, Rng& rng);

/// One row (lambda_nj, r_nj), j = 1..n, of a triangular array with common ON rate.
struct OnOffRow {
  std::vector<double> lambda;
  std::vector<double> r;
  double mu;

  std::size_t size() const { return lambda.size(); }
};

class OnOffArraySpec {
 public:
  /// Rows keyed by n.
  static OnOffArraySpec explicit_rows(std::map<std::size_t, std::vector<std::pair<double, double>>> rows,
                                      double mu);
  /// lambda_nj = n^-alpha, r_nj = b^(j / n^alpha).
  static OnOffArraySpec power_example(double alpha, double b, double mu);

  bool has_row(std::size_t n) const;
  OnOffRow row(std::size_t n) const;
  double mu() const { return mu_; }

  bool is_power_example() const { return power_.has_value(); }
  /// (alpha, b) of the power example.
  std::pair<double, double> power_parameters() const;
  /// dx / (x log(1/b)) on (0, 1] for the power example.
  LevyMeasure power_limit_measure() const;

 private:
  OnOffArraySpec() = default;
  double mu_ = 1.0;
  std::optional<std::pair<double, double>> power_;
  std::map<std::size_t, std::vector<std::pair<double, double>>> rows_;
};

/// nu_n = sum_j lambda_nj delta_{r_nj}.
class EmpiricalLevyMeasure {
 public:
  explicit EmpiricalLevyMeasure(const OnOffRow& row);

  /// nu_n[x, inf).
  double tail(double x) const;
  /// sum lambda_nj r_nj 1(r_nj >= x).
  double first_moment_tail(double x) const;
  /// sum lambda_nj r_nj 1(r_nj <= eps).
  double small_jump_sum(double eps) const;
  /// sum lambda_nj r_nj^p.
  double power_sum(double p) const;
  /// sum lambda_nj (exp(i theta r_nj) - 1).
  Complex cf_sum(double theta) const;
  /// sum E[zeta_nj 1(zeta_nj <= eps)] = sum lambda r / (lambda + mu) 1(r <= eps).
  double c2_sum(double eps, double mu) const;
  /// sum P(zeta_nj >= x) = sum lambda / (lambda + mu) 1(r >= x).
  double c1_sum(double x, double mu) const;
  double max_lambda() const;

  LevyMeasure as_measure() const;

 private:
  std::vector<double> lambda_;
  std::vector<double> r_;
};

/// Exact skeleton sampler for the row sum X_n(t_k) = sum_j zeta_nj(t_k).
class SuperpositionSampler {
 public:
  SuperpositionSampler(const OnOffRow& row, const TimeGrid& grid);

  std::size_t dimension() const { return epochs_; }
  /// Sources in index order; each consumes one uniform per epoch.
  void sample(Rng& rng, std::span<double> out) const;

 private:
  std::size_t sources_;
  std::size_t epochs_;
  std::vector<double> r_;
  std::vector<double> pi_;
  // Per source and gap: P(ON at next | OFF now), P(ON at next | ON now).
  std::vector<double> p01_;
  std::vector<double> p11_;
};

std::vector<double> superpose(const OnOffRow& row, const TimeGrid& grid, Rng& rng);

/// Exact joint CF of (X_n(t_1), ..., X_n(t_m)), product over sources of a
/// two-state forward recursion.
Complex superposition_cf(const OnOffRow& row, const TimeGrid& grid, std::span<const double> theta);

/// Spectrally positive law with Levy measure nu / mu.
LevyExponent limit_exponent(const LevyMeasure& nu, double mu);

/// Product-form ESPC weights (1 - e^{-mu(t_u - t_{u-1})}) e^{-mu(t_v - t_u)} (1 - e^{-mu(t_{v+1} - t_v)}),
/// boundary factors 1.
WeightMatrix espc_product_weights(double mu, const TimeGrid& grid);

Complex espc_log_cf(const LevyExponent& limit_law, double mu, const TimeGrid& grid,
                    std::span<const double> theta);
Complex espc_log_cf(const LevyMeasure& nu, double mu, const TimeGrid& grid,
                    std::span<const double> theta);

// ---------------------------------------------------------------------------
// Assumption checks

struct CheckResult {
  std::string name;
  bool pass;
  nlohmann::json observed;
};

struct AssumptionReport {
  std::vector<CheckResult> checks;
  bool all_pass() const;
  nlohmann::json to_json() const;
};

struct AssumptionOptions {
  std::vector<std::size_t> n_list{100, 1000, 10000};
  std::vector<double> x_probe{0.25, 0.5, 0.75};
  std::vector<double> eps_list{0.1, 0.05};
  std::vector<double> powers{1.0, 2.0, 3.0, 4.0};
  /// Relative tolerance for comparisons with the limit at the largest n.
  double relative_tolerance = 0.02;
  /// Small-jump level sums are compared more loosely.
  double c2_tolerance = 0.10;
  /// sup over the theta grid of the CF-sum discrepancy at the largest n.
  double cf_tolerance = 0.01;
  std::vector<double> theta_grid;  // empty = [-5, 5] step 0.1
};

/// Array regularity conditions, CF-sum convergence, level sums and negligibility for `spec` against the limit measure `nu`.
AssumptionReport check_assumptions(const OnOffArraySpec& spec, const LevyMeasure& nu,
                                   const AssumptionOptions& options = {});

/// max_j |phi_nj(theta) - 1| over the grid and the bound 2 max_j lambda_nj / mu.
std::pair<double, double> uan_check(const OnOffRow& row, std::span<const double> thetas);

// ---------------------------------------------------------------------------
// Convergence study

struct ConvergenceRow {
  std::size_t n;
  double sup;         // empirical vs limit
  double l2;
  double bias_sup;    // exact finite-n CF vs limit
  double noise_sup;   // empirical vs exact finite-n CF
  double max_stderr;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  std::size_t replications;
  double mc_bound;     // 4 / sqrt(N)
  double tolerance;    // acceptance level at the largest n
  double monotone_slack;
  bool monotone;
  bool final_within_tolerance;
  nlohmann::json to_json() const;
};

struct ConvergenceOptions {
  std::size_t replications = 100000;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  double tolerance = 0.02;
  /// Allowed increase of the sup distance from one n to the next.
  double monotone_slack = 0.0;
};

ConvergenceReport convergence_study(const OnOffArraySpec& spec, const LevyMeasure& nu,
                                    const TimeGrid& grid, const ThetaGrid& thetas,
                                    std::span<const std::size_t> n_list,
                                    const ConvergenceOptions& options);

// ---------------------------------------------------------------------------
// ON/OFF moment bounds and identities

struct IncrementMoments {
  double fourth;       // E[(z_t - z_u)^2 (z_s - z_t)^2]
  double cross;        // E[(z_u - z_t)(z_t - z_s)]
  double second;       // E[(z_t - z_u)^2]
  double fourth_bound; // r^4 lambda mu (s - u)^2 / 4
  double cross_bound;  // r^2 lambda mu (s - u)^2 / 4
  double second_bound; // 2 lambda mu r^2 (t - u) / (lambda + mu)
};

IncrementMoments increment_moments(const OnOffSource& src, double u, double t, double s);

struct BoundsCheckEntry {
  double u, t, s;
  IncrementMoments exact;
  MeanEstimate mc_fourth;
  MeanEstimate mc_cross;
  MeanEstimate mc_second;
  std::vector<std::string> violations;
};

struct BoundsCheckReport {
  std::vector<BoundsCheckEntry> entries;
  bool pass() const;
  nlohmann::json to_json() const;
};

/// Closed forms against the stated bounds, plus Monte-Carlo estimates that
/// must agree with the closed forms within 4 standard errors.
BoundsCheckReport appendix_bounds_check(const OnOffSource& src,
                                        std::span<const std::array<double, 3>> triples,
                                        std::size_t replications, std::uint64_t seed,
                                        unsigned threads = 0);

/// Left side by brute force over subsets of size >= 2 (m <= 12); right side
/// sum_{u<=v} (e^{ir(theta_u+..+theta_v)} - 1) w_uv - sum_l (e^{ir theta_l} - 1).
std::pair<Complex, Complex> algebraic_identity_check(std::span<const double> theta,
                                                     const TimeGrid& grid, double alpha, double r);

/// E[xi(t_l1) ... xi(t_lk)] for a stationary 0/1 source, indices ascending.
double joint_on_probability(const OnOffSource& src, const TimeGrid& grid,
                            std::span<const std::size_t> indices);

/// E[...] - (lambda / mu) e^{-mu (t_lk - t_l1)}.
double remainder_L(const OnOffSource& src, const TimeGrid& grid, std::span<const std::size_t> indices);

/// R_nj of the CF expansion for one source.
Complex remainder_R(const OnOffSource& src, const TimeGrid& grid, std::span<const double> theta);

struct RemainderOptions {
  double mu = 1.0;
  std::vector<double> lambda_sweep{1e-5, 3e-5, 1e-4, 3e-4, 1e-3};
  std::vector<double> r_sweep{1e-4, 3e-4, 1e-3, 3e-3, 1e-2};
  double r_fixed = 1.0;
  double lambda_fixed = 1e-3;
};

struct RemainderReport {
  double min_L;              // most negative L over all subsets and lambdas
  std::size_t sign_violations;
  double fitted_M;           // max |L| / lambda^2
  double slope_L_lambda;
  double fitted_K;           // max |R| / (lambda^2 r)
  double slope_R_lambda;
  double slope_R_r;
  bool scaling_pass;         // all slopes within 0.1 of (2, 2, 1)
  bool sign_pass;
  nlohmann::json to_json() const;
};

RemainderReport remainder_bound_check(const TimeGrid& grid, std::span<const double> theta,
                                      const RemainderOptions& options = {});

/// Least-squares slope of log|y| against log x.
double loglog_slope(std::span<const double> x, std::span<const double> y);

/// E[(X_n(t2) - X_n(t1))^2 (X_n(t3) - X_n(t2))^2] exactly, and the three-term bound.
std::pair<double, double> superposition_fourth_moment(const OnOffRow& row, double t1, double t2,
                                                      double t3);

}  // namespace gcid
