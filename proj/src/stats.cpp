#include "gcid/stats.hpp"

#include <algorithm>
#include <cmath>

#include "gcid/errors.hpp"
#include "gcid/parallel.hpp"

namespace gcid {
namespace {

// Running sums for one grid point.
struct Moments {
  double c = 0.0;
  double s = 0.0;
  double cc = 0.0;
  double ss = 0.0;
};

double standard_error(double sum, double sum_sq, std::size_t n) {
  if (n < 2) return 0.0;
  const double mean = sum / static_cast<double>(n);
  const double var = std::max(0.0, (sum_sq - sum * mean) / static_cast<double>(n - 1));
  return std::sqrt(var / static_cast<double>(n));
}

}  // namespace

SampleMatrix generate_samples(std::size_t replications, std::size_t dimension,
                              std::uint64_t seed, unsigned threads,
                              const std::function<void(Rng&, std::span<double>)>& draw) {
  SampleMatrix out(replications, dimension);
  parallel_for(chunk_count(replications), threads, [&](std::size_t chunk) {
    const std::size_t end = std::min(replications, (chunk + 1) * kChunkSize);
    for (std::size_t r = chunk * kChunkSize; r < end; ++r) {
      Rng rng = Rng::stream(seed, r);
      draw(rng, out.row(r));
    }
  });
  return out;
}

ThetaGrid::ThetaGrid(std::vector<std::vector<double>> axes) : axes_(std::move(axes)), size_(1) {
  if (axes_.empty()) throw PreconditionError("theta grid needs at least one axis");
  for (const auto& a : axes_) {
    if (a.empty()) throw PreconditionError("theta grid axes must be non-empty");
    for (double v : a)
      if (!std::isfinite(v)) throw PreconditionError("theta grid values must be finite");
    size_ *= a.size();
  }
}

ThetaGrid ThetaGrid::uniform(std::vector<double> axis, std::size_t dimension) {
  return ThetaGrid(std::vector<std::vector<double>>(dimension, axis));
}

std::vector<double> ThetaGrid::point(std::size_t index) const {
  std::vector<double> p(axes_.size());
  for (std::size_t d = axes_.size(); d-- > 0;) {
    p[d] = axes_[d][index % axes_[d].size()];
    index /= axes_[d].size();
  }
  return p;
}

const std::vector<double>& default_theta_axis() {
  static const std::vector<double> axis{-2.0, -1.0, -0.5, 0.5, 1.0, 2.0};
  return axis;
}

EmpiricalCF empirical_cf(const SampleMatrix& samples, const ThetaGrid& grid, unsigned threads) {
  if (samples.rows() < 1) throw PreconditionError("empirical CF needs at least one sample");
  if (samples.cols() != grid.dimension())
    throw PreconditionError("theta grid dimension must match the sample width");
  const std::size_t dim = grid.dimension();
  const std::size_t points = grid.size();
  const auto& axes = grid.axes();

  std::vector<std::vector<Moments>> partial(chunk_count(samples.rows()));
  parallel_for(partial.size(), threads, [&](std::size_t chunk) {
    std::vector<Moments> acc(points);
    std::vector<std::vector<Complex>> phase(dim);
    std::vector<Complex> prod(points);
    const std::size_t end = std::min(samples.rows(), (chunk + 1) * kChunkSize);
    for (std::size_t r = chunk * kChunkSize; r < end; ++r) {
      const auto row = samples.row(r);
      for (std::size_t d = 0; d < dim; ++d) {
        phase[d].resize(axes[d].size());
        for (std::size_t a = 0; a < axes[d].size(); ++a)
          phase[d][a] = std::polar(1.0, axes[d][a] * row[d]);
      }
      // Expand the product over axes, last coordinate fastest.
      std::size_t filled = 1;
      prod[0] = 1.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const std::size_t m = axes[d].size();
        for (std::size_t q = filled; q-- > 0;)
          for (std::size_t a = m; a-- > 0;) prod[q * m + a] = prod[q] * phase[d][a];
        filled *= m;
      }
      for (std::size_t p = 0; p < points; ++p) {
        const double c = prod[p].real();
        const double s = prod[p].imag();
        acc[p].c += c;
        acc[p].s += s;
        acc[p].cc += c * c;
        acc[p].ss += s * s;
      }
    }
    partial[chunk] = std::move(acc);
  });

  const auto total = tree_reduce(std::move(partial), [](const auto& x, const auto& y) {
    std::vector<Moments> z(x.size());
    for (std::size_t p = 0; p < x.size(); ++p)
      z[p] = {x[p].c + y[p].c, x[p].s + y[p].s, x[p].cc + y[p].cc, x[p].ss + y[p].ss};
    return z;
  });

  EmpiricalCF out{grid, {}, {}, samples.rows()};
  const auto n = static_cast<double>(samples.rows());
  for (std::size_t p = 0; p < points; ++p) {
    const auto& m = total[p];
    out.estimates.emplace_back(m.c / n, m.s / n);
    out.stderrs.push_back(std::max(standard_error(m.c, m.cc, samples.rows()),
                                   standard_error(m.s, m.ss, samples.rows())));
  }
  return out;
}

std::vector<Complex> analytic_cf(const ThetaGrid& grid,
                                 const std::function<Complex(std::span<const double>)>& log_cf) {
  std::vector<Complex> out(grid.size());
  for (std::size_t p = 0; p < grid.size(); ++p) out[p] = std::exp(log_cf(grid.point(p)));
  return out;
}

namespace {

std::vector<double> column_sums(const SampleMatrix& samples, unsigned threads,
                                const std::function<void(std::span<const double>,
                                                         std::vector<double>&)>& add,
                                std::size_t width) {
  std::vector<std::vector<double>> partial(chunk_count(samples.rows()));
  parallel_for(partial.size(), threads, [&](std::size_t chunk) {
    std::vector<double> acc(width, 0.0);
    const std::size_t end = std::min(samples.rows(), (chunk + 1) * kChunkSize);
    for (std::size_t r = chunk * kChunkSize; r < end; ++r) add(samples.row(r), acc);
    partial[chunk] = std::move(acc);
  });
  return tree_reduce(std::move(partial), [](const auto& x, const auto& y) {
    std::vector<double> z(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) z[k] = x[k] + y[k];
    return z;
  });
}

}  // namespace

std::vector<CovEstimate> empirical_cov(const SampleMatrix& samples,
                                       std::span<const std::pair<std::size_t, std::size_t>> pairs,
                                       unsigned threads) {
  if (samples.rows() < 2) throw PreconditionError("covariance needs at least two samples");
  for (const auto& [a, b] : pairs)
    if (a >= samples.cols() || b >= samples.cols())
      throw PreconditionError("covariance column index out of range");
  const std::size_t cols = samples.cols();
  const auto n = static_cast<double>(samples.rows());
  auto sums = column_sums(
      samples, threads,
      [](std::span<const double> row, std::vector<double>& acc) {
        for (std::size_t k = 0; k < row.size(); ++k) acc[k] += row[k];
      },
      cols);
  std::vector<double> mean(cols);
  for (std::size_t k = 0; k < cols; ++k) mean[k] = sums[k] / n;
  // Centred products and their squares, two entries per pair.
  auto prods = column_sums(
      samples, threads,
      [&](std::span<const double> row, std::vector<double>& acc) {
        for (std::size_t q = 0; q < pairs.size(); ++q) {
          const double v = (row[pairs[q].first] - mean[pairs[q].first]) *
                           (row[pairs[q].second] - mean[pairs[q].second]);
          acc[2 * q] += v;
          acc[2 * q + 1] += v * v;
        }
      },
      2 * pairs.size());
  std::vector<CovEstimate> out;
  for (std::size_t q = 0; q < pairs.size(); ++q) {
    const double value = prods[2 * q] / (n - 1.0);
    out.push_back({value, standard_error(prods[2 * q], prods[2 * q + 1], samples.rows())});
  }
  return out;
}

MeanEstimate empirical_mean(const SampleMatrix& samples,
                            const std::function<double(std::span<const double>)>& f,
                            unsigned threads) {
  if (samples.rows() < 1) throw PreconditionError("mean needs at least one sample");
  auto sums = column_sums(
      samples, threads,
      [&](std::span<const double> row, std::vector<double>& acc) {
        const double v = f(row);
        acc[0] += v;
        acc[1] += v * v;
      },
      2);
  return {sums[0] / static_cast<double>(samples.rows()),
          standard_error(sums[0], sums[1], samples.rows())};
}

CfDistance cf_distance(const EmpiricalCF& emp, std::span<const Complex> analytic) {
  if (analytic.size() != emp.estimates.size())
    throw PreconditionError("analytic CF values do not match the empirical grid");
  CfDistance d{0.0, 0.0};
  for (std::size_t p = 0; p < analytic.size(); ++p) {
    const double diff = std::abs(emp.estimates[p] - analytic[p]);
    d.sup = std::max(d.sup, diff);
    d.l2 += diff * diff;
  }
  if (!analytic.empty()) d.l2 = std::sqrt(d.l2 / static_cast<double>(analytic.size()));
  return d;
}

nlohmann::json cf_report(const EmpiricalCF& emp, std::span<const Complex> analytic) {
  nlohmann::json j;
  j["grid"] = emp.grid.axes();
  j["replications"] = emp.replications;
  auto& est = j["estimates"] = nlohmann::json::array();
  for (std::size_t p = 0; p < emp.estimates.size(); ++p) {
    est.push_back({{"theta", emp.grid.point(p)},
                   {"re", emp.estimates[p].real()},
                   {"im", emp.estimates[p].imag()},
                   {"stderr", emp.stderrs[p]}});
  }
  if (!analytic.empty()) {
    const CfDistance d = cf_distance(emp, analytic);
    j["distances"] = {{"sup", d.sup}, {"l2", d.l2}};
  }
  return j;
}

}  // namespace gcid
