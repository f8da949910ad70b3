#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "gcid/rng.hpp"

namespace gcid {

/// Service-time law G of an M/GI/inf queue. All kinds have bounded or
/// exponentially decaying tails, so every quantile is finite.
class ServiceDistribution {
 public:
  struct Exponential {
    double rate;
  };
  struct Deterministic {
    double value;
  };
  /// Pareto(shape, scale) conditioned on not exceeding `cap`.
  struct ParetoTruncated {
    double shape;
    double scale;
    double cap;
  };
  struct Discrete {
    std::vector<double> values;  // sorted ascending
    std::vector<double> probs;
  };

  static ServiceDistribution exponential(double rate);
  static ServiceDistribution deterministic(double value);
  static ServiceDistribution pareto_truncated(double shape, double scale, double cap);
  static ServiceDistribution discrete(std::vector<double> values, std::vector<double> probs);

  double mean() const { return mean_; }
  double cdf(double x) const;
  double survival(double x) const;
  /// G_I(t) = m^{-1} integral_0^t survival(y) dy.
  double integrated_tail(double t) const;
  /// 1 - G_I(t), computed directly as m^{-1} integral_t^inf survival(y) dy.
  double integrated_tail_survival(double t) const;
  /// Smallest x with cdf(x) >= p, for p in [0, 1).
  double quantile(double p) const;
  double sample(Rng& rng) const;

  std::string kind_name() const;
  using Kind = std::variant<Exponential, Deterministic, ParetoTruncated, Discrete>;
  const Kind& kind() const { return kind_; }

 private:
  explicit ServiceDistribution(Kind k);
  Kind kind_;
  double mean_ = 0.0;
  std::vector<double> cumulative_;  // discrete only
};

/// Concave distribution function H on [0, inf) with H(0) = 0.
class CorrelationStructure {
 public:
  struct Exponential {
    double rate;
  };
  /// H(t) = min(t^alpha, 1).
  struct Power {
    double alpha;
  };
  struct IntegratedTail {
    ServiceDistribution service;
  };
  struct Component {
    double weight;
    std::shared_ptr<const CorrelationStructure> structure;
  };
  struct Mixture {
    std::vector<Component> components;
  };

  static CorrelationStructure exponential(double rate);
  static CorrelationStructure power(double alpha);
  static CorrelationStructure integrated_tail(ServiceDistribution service);
  static CorrelationStructure mixture(std::vector<std::pair<double, CorrelationStructure>> parts);

  /// H(t); zero for t < 0, one at t = +inf.
  double H(double t) const;
  /// 1 - H(t) without cancellation; zero at t = +inf.
  double survival(double t) const;

  std::string kind_name() const;
  using Kind = std::variant<Exponential, Power, IntegratedTail, Mixture>;
  const Kind& kind() const { return kind_; }

 private:
  explicit CorrelationStructure(Kind k) : kind_(std::move(k)) {}
  Kind kind_;
};

/// Strictly increasing observation epochs t_1 < ... < t_n.
class TimeGrid {
 public:
  explicit TimeGrid(std::vector<double> epochs);

  std::size_t size() const { return epochs_.size(); }
  double operator[](std::size_t k) const { return epochs_[k]; }
  const std::vector<double>& epochs() const { return epochs_; }

  /// Grid with the zero-based epoch k removed. Requires size() >= 2.
  TimeGrid without(std::size_t k) const;
  TimeGrid shifted(double tau) const;

 private:
  std::vector<double> epochs_;
};

/// Upper-triangular coefficients a_ij, 0 <= i <= j < n, packed row-major.
class WeightMatrix {
 public:
  explicit WeightMatrix(std::size_t n = 0);

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[index(i, j)]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[index(i, j)]; }

  /// Sum of a_ij over i <= k <= j.
  double coverage_sum(std::size_t k) const;

  /// Rows "i,j,value" with one-based indices and a header line.
  void write_csv(std::ostream& out) const;

 private:
  std::size_t index(std::size_t i, std::size_t j) const {
    return i * n_ - i * (i + 1) / 2 + j;
  }
  std::size_t n_;
  std::vector<double> data_;
};

/// Entries in [-kClampTolerance, 0) are treated as rounding noise and set to 0.
inline constexpr double kClampTolerance = 1e-9;

/// a_ij = H(t_j - t_{i-1}) - H(t_j - t_i) - H(t_{j+1} - t_{i-1}) + H(t_{j+1} - t_i)
/// with t_0 = -inf and t_{n+1} = +inf. Throws ConcavityError on a negative entry.
WeightMatrix weights(const CorrelationStructure& cs, const TimeGrid& grid);

/// b_kl = sum of a_ij over i <= min(k,l), j >= max(k,l).
Eigen::MatrixXd a_to_b(const WeightMatrix& a);
/// Inverse of a_to_b; out-of-range entries of b count as zero.
WeightMatrix b_to_a(const Eigen::MatrixXd& b);

}  // namespace gcid
