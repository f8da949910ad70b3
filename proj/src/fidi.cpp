#include "gcid/fidi.hpp"

#include <cmath>

#include "gcid/errors.hpp"

namespace gcid {
namespace {

constexpr double kPsdTolerance = 1e-10;
constexpr double kZeroMeanTolerance = 1e-12;

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

// E[eta 1(|eta| < 1)].
double truncated_mark_mean(const MarkDistribution& marks) {
  const auto& kind = marks.kind();
  if (const auto* p = std::get_if<MarkDistribution::PointMass>(&kind))
    return std::abs(p->value) < 1.0 ? p->value : 0.0;
  if (const auto* d = std::get_if<MarkDistribution::Discrete>(&kind)) {
    double s = 0.0;
    for (std::size_t k = 0; k < d->values.size(); ++k)
      if (std::abs(d->values[k]) < 1.0) s += d->probs[k] * d->values[k];
    return s;
  }
  const auto& n = std::get<MarkDistribution::Normal>(kind);
  if (n.variance == 0.0) return std::abs(n.mean) < 1.0 ? n.mean : 0.0;
  const double sd = std::sqrt(n.variance);
  const double lo = (-1.0 - n.mean) / sd;
  const double hi = (1.0 - n.mean) / sd;
  return n.mean * (normal_cdf(hi) - normal_cdf(lo)) + sd * (normal_pdf(lo) - normal_pdf(hi));
}

}  // namespace

bool FidiTriplet::is_psd() const {
  if (sigma.size() == 0) return true;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sigma, Eigen::EigenvaluesOnly);
  const double scale = std::max(1.0, solver.eigenvalues().cwiseAbs().maxCoeff());
  return solver.eigenvalues().minCoeff() >= -kPsdTolerance * scale;
}

Complex log_cf(const LevyExponent& law, const WeightMatrix& a, std::span<const double> theta) {
  const std::size_t n = a.size();
  if (theta.size() != n) throw PreconditionError("theta length must match the grid size");
  Complex total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double run = 0.0;
    for (std::size_t j = i; j < n; ++j) {
      run += theta[j];
      const double w = a(i, j);
      if (w != 0.0) total += w * law.eval(run);
    }
  }
  return total;
}

Complex log_cf(const GcidProcess& p, const TimeGrid& grid, std::span<const double> theta) {
  return log_cf(p.law, weights(p.structure, grid), theta);
}

std::pair<Complex, Complex> consistency_check(const GcidProcess& p, const TimeGrid& grid,
                                              std::span<const double> theta, std::size_t k) {
  if (grid.size() < 2 || k >= grid.size())
    throw PreconditionError("consistency check needs n >= 2 and a valid index");
  if (theta.size() != grid.size()) throw PreconditionError("theta length must match the grid size");
  std::vector<double> full(theta.begin(), theta.end());
  full[k] = 0.0;
  std::vector<double> reduced;
  for (std::size_t m = 0; m < theta.size(); ++m)
    if (m != k) reduced.push_back(theta[m]);
  return {log_cf(p, grid, full), log_cf(p, grid.without(k), reduced)};
}

std::pair<double, double> triplet_drift_and_variance(const LevyExponent& law) {
  return std::visit(
      [](const auto& k) -> std::pair<double, double> {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, LevyExponent::Gaussian>) {
          return {k.drift, k.variance};
        } else if constexpr (std::is_same_v<T, LevyExponent::Poisson>) {
          return {0.0, 0.0};  // the single atom sits at 1, outside |x| < 1
        } else if constexpr (std::is_same_v<T, LevyExponent::CompoundPoisson>) {
          return {k.rate * truncated_mark_mean(k.marks), 0.0};
        } else if constexpr (std::is_same_v<T, LevyExponent::Gamma>) {
          return {k.shape * -std::expm1(-1.0), 0.0};
        } else {
          return {k.measure.small_jump_mean(std::nextafter(1.0, 0.0)), 0.0};
        }
      },
      law.kind());
}

FidiTriplet triplet(const GcidProcess& p, const TimeGrid& grid) {
  const WeightMatrix a = weights(p.structure, grid);
  const auto [beta, sigma2] = triplet_drift_and_variance(p.law);
  const Eigen::MatrixXd b = a_to_b(a);
  FidiTriplet out;
  out.beta = beta * b.diagonal();
  out.sigma = sigma2 * b;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i; j < a.size(); ++j)
      if (a(i, j) > 0.0) out.rays.push_back({i, j, a(i, j)});
  if (out.sigma.size() > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(out.sigma, Eigen::EigenvaluesOnly);
    out.min_eigenvalue = solver.eigenvalues().minCoeff();
  }
  return out;
}

void sample_fidi(const LevyExponent& law, const WeightMatrix& a, Rng& rng, std::span<double> out) {
  const std::size_t n = a.size();
  if (out.size() != n) throw PreconditionError("output length must match the grid size");
  // diff[k] accumulates increments entering at k minus those leaving after k-1.
  std::vector<double> diff(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double z = law.sample_increment(a(i, j), rng);
      diff[i] += z;
      diff[j + 1] -= z;
    }
  }
  double run = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    run += diff[k];
    out[k] = run;
  }
}

std::vector<double> sample_fidi(const GcidProcess& p, const TimeGrid& grid, Rng& rng) {
  std::vector<double> out(grid.size());
  sample_fidi(p.law, weights(p.structure, grid), rng, out);
  return out;
}

double covariance(const GcidProcess& p, double h) {
  return p.law.moments().variance * p.structure.survival(std::abs(h));
}

Complex increment_cf(const GcidProcess& p, double h, double theta) {
  if (!(h > 0.0)) throw PreconditionError("increment lag h must be positive");
  if (theta == 0.0) return 1.0;
  return std::exp(p.structure.H(h) * (p.law.eval(theta) + p.law.eval(-theta)));
}

double fourth_moment_from_h(double variance, double fourth_cumulant, double h12, double h23,
                            double h13) {
  const double a0 = h12 + h23 - h13;
  const double a1 = h13 + h12 - h23;
  const double a2 = h13 + h23 - h12;
  return fourth_cumulant * a0 + variance * variance * ((a0 + a1) * (a0 + a2) + 2.0 * a0 * a0);
}

double fourth_moment_increment_product(const GcidProcess& p, double t1, double t2, double t3) {
  if (!(t1 < t2 && t2 < t3)) throw PreconditionError("epochs must satisfy t1 < t2 < t3");
  const LawMoments m = p.law.moments();
  if (std::abs(m.mean) > kZeroMeanTolerance)
    throw PreconditionError("fourth-moment formula requires a zero-mean law");
  const auto& H = p.structure;
  return fourth_moment_from_h(m.variance, p.law.fourth_cumulant(), H.H(t2 - t1), H.H(t3 - t2),
                              H.H(t3 - t1));
}

}  // namespace gcid
