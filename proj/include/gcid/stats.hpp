#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "gcid/rng.hpp"
#include "json.hpp"

namespace gcid {

using Complex = std::complex<double>;

/// N x n samples stored row-major, one replication per row.
class SampleMatrix {
 public:
  SampleMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

/// Fills an N x n matrix; replication r draws from Rng::stream(seed, r), so
/// the result does not depend on `threads`.
SampleMatrix generate_samples(std::size_t replications, std::size_t dimension,
                              std::uint64_t seed, unsigned threads,
                              const std::function<void(Rng&, std::span<double>)>& draw);

/// Product grid of theta vectors; the last coordinate varies fastest.
class ThetaGrid {
 public:
  explicit ThetaGrid(std::vector<std::vector<double>> axes);
  /// The same axis repeated for each of `dimension` coordinates.
  static ThetaGrid uniform(std::vector<double> axis, std::size_t dimension);

  std::size_t dimension() const { return axes_.size(); }
  std::size_t size() const { return size_; }
  const std::vector<std::vector<double>>& axes() const { return axes_; }
  std::vector<double> point(std::size_t index) const;

 private:
  std::vector<std::vector<double>> axes_;
  std::size_t size_;
};

/// The fixed per-coordinate axis used for CF comparisons.
const std::vector<double>& default_theta_axis();

struct EmpiricalCF {
  ThetaGrid grid;
  std::vector<Complex> estimates;
  /// Larger of the standard errors of the cosine and sine means.
  std::vector<double> stderrs;
  std::size_t replications = 0;
};

EmpiricalCF empirical_cf(const SampleMatrix& samples, const ThetaGrid& grid, unsigned threads = 1);

/// exp(log_cf(theta)) at every grid point.
std::vector<Complex> analytic_cf(const ThetaGrid& grid,
                                 const std::function<Complex(std::span<const double>)>& log_cf);

struct CovEstimate {
  double value;
  double std_error;
};

/// Unbiased sample covariance for each (column, column) pair.
std::vector<CovEstimate> empirical_cov(const SampleMatrix& samples,
                                       std::span<const std::pair<std::size_t, std::size_t>> pairs,
                                       unsigned threads = 1);

struct MeanEstimate {
  double value;
  double std_error;
};

/// Sample mean of f(row) with its standard error.
MeanEstimate empirical_mean(const SampleMatrix& samples,
                            const std::function<double(std::span<const double>)>& f,
                            unsigned threads = 1);

struct CfDistance {
  double sup;
  double l2;  // root mean square
};

CfDistance cf_distance(const EmpiricalCF& emp, std::span<const Complex> analytic);

/// {grid, estimates: [{theta, re, im, stderr}], distances: {sup, l2}}; the
/// distances member is present only when `analytic` is non-empty.
nlohmann::json cf_report(const EmpiricalCF& emp, std::span<const Complex> analytic = {});

}  // namespace gcid
