#include "gcid/corrstruct.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include "gcid/errors.hpp"
#include "gcid/quadrature.hpp"

namespace gcid {
namespace {

constexpr double kSimplexTolerance = 1e-9;

bool positive_finite(double v) { return v > 0.0 && std::isfinite(v); }

}  // namespace

// ---------------------------------------------------------------------------
// ServiceDistribution

ServiceDistribution::ServiceDistribution(Kind k) : kind_(std::move(k)) {
  if (const auto* e = std::get_if<Exponential>(&kind_)) {
    mean_ = 1.0 / e->rate;
  } else if (const auto* d = std::get_if<Deterministic>(&kind_)) {
    mean_ = d->value;
  } else if (const auto* p = std::get_if<ParetoTruncated>(&kind_)) {
    const double a = p->shape;
    const double s = p->scale;
    const double z = 1.0 - std::pow(s / p->cap, a);
    mean_ = a * std::pow(s, a) / z * (std::pow(s, 1.0 - a) - std::pow(p->cap, 1.0 - a)) / (a - 1.0);
  } else {
    const auto& d = std::get<Discrete>(kind_);
    mean_ = std::inner_product(d.values.begin(), d.values.end(), d.probs.begin(), 0.0);
    cumulative_.resize(d.probs.size());
    std::partial_sum(d.probs.begin(), d.probs.end(), cumulative_.begin());
  }
}

ServiceDistribution ServiceDistribution::exponential(double rate) {
  if (!positive_finite(rate)) throw PreconditionError("service rate must be positive");
  return ServiceDistribution(Exponential{rate});
}

ServiceDistribution ServiceDistribution::deterministic(double value) {
  if (!positive_finite(value)) throw PreconditionError("deterministic service time must be positive");
  return ServiceDistribution(Deterministic{value});
}

ServiceDistribution ServiceDistribution::pareto_truncated(double shape, double scale, double cap) {
  if (!(shape > 2.0) || !std::isfinite(shape))
    throw PreconditionError("pareto service shape must exceed 2");
  if (!positive_finite(scale)) throw PreconditionError("pareto service scale must be positive");
  if (!(cap > scale) || !std::isfinite(cap))
    throw PreconditionError("pareto service cap must be finite and exceed the scale");
  return ServiceDistribution(ParetoTruncated{shape, scale, cap});
}

ServiceDistribution ServiceDistribution::discrete(std::vector<double> values,
                                                  std::vector<double> probs) {
  if (values.empty() || values.size() != probs.size())
    throw PreconditionError("discrete service law needs equally many values and probabilities");
  double total = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!(values[k] >= 0.0) || !std::isfinite(values[k]))
      throw PreconditionError("discrete service times must be finite and nonnegative");
    if (!(probs[k] >= 0.0) || !std::isfinite(probs[k]))
      throw PreconditionError("discrete service probabilities must be nonnegative");
    total += probs[k];
  }
  if (std::abs(total - 1.0) > kSimplexTolerance)
    throw PreconditionError("discrete service probabilities must sum to 1");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto x, auto y) { return values[x] < values[y]; });
  Discrete d;
  for (auto k : order) {
    d.values.push_back(values[k]);
    d.probs.push_back(probs[k] / total);
  }
  if (!(std::inner_product(d.values.begin(), d.values.end(), d.probs.begin(), 0.0) > 0.0))
    throw PreconditionError("discrete service law must have positive mean");
  return ServiceDistribution(std::move(d));
}

double ServiceDistribution::survival(double x) const {
  if (x < 0.0) return 1.0;
  if (const auto* e = std::get_if<Exponential>(&kind_)) return std::exp(-e->rate * x);
  if (const auto* d = std::get_if<Deterministic>(&kind_)) return x < d->value ? 1.0 : 0.0;
  if (const auto* p = std::get_if<ParetoTruncated>(&kind_)) {
    if (x < p->scale) return 1.0;
    if (x >= p->cap) return 0.0;
    const double tail_cap = std::pow(p->scale / p->cap, p->shape);
    return (std::pow(p->scale / x, p->shape) - tail_cap) / (1.0 - tail_cap);
  }
  const auto& d = std::get<Discrete>(kind_);
  double s = 0.0;
  for (std::size_t k = 0; k < d.values.size(); ++k)
    if (d.values[k] > x) s += d.probs[k];
  return s;
}

double ServiceDistribution::cdf(double x) const { return 1.0 - survival(x); }

double ServiceDistribution::integrated_tail(double t) const {
  if (t <= 0.0) return 0.0;
  if (std::isinf(t)) return 1.0;
  if (const auto* e = std::get_if<Exponential>(&kind_)) return -std::expm1(-e->rate * t);
  if (const auto* d = std::get_if<Deterministic>(&kind_)) return std::min(t, d->value) / d->value;
  if (const auto* p = std::get_if<ParetoTruncated>(&kind_)) {
    if (t >= p->cap) return 1.0;
    const double flat = std::min(t, p->scale);
    double curved = 0.0;
    if (t > p->scale)
      curved = quad::integrate([this](double y) { return survival(y); }, p->scale, t);
    return std::min((flat + curved) / mean_, 1.0);
  }
  const auto& d = std::get<Discrete>(kind_);
  double s = 0.0;
  for (std::size_t k = 0; k < d.values.size(); ++k) s += d.probs[k] * std::min(t, d.values[k]);
  return s / mean_;
}

double ServiceDistribution::integrated_tail_survival(double t) const {
  if (t <= 0.0) return 1.0;
  if (std::isinf(t)) return 0.0;
  if (const auto* e = std::get_if<Exponential>(&kind_)) return std::exp(-e->rate * t);
  if (const auto* d = std::get_if<Deterministic>(&kind_))
    return std::max(d->value - t, 0.0) / d->value;
  if (const auto* p = std::get_if<ParetoTruncated>(&kind_)) {
    if (t >= p->cap) return 0.0;
    const double flat = std::max(p->scale - t, 0.0);
    const double from = std::max(t, p->scale);
    const double curved =
        quad::integrate([this](double y) { return survival(y); }, from, p->cap);
    return std::clamp((flat + curved) / mean_, 0.0, 1.0);
  }
  const auto& d = std::get<Discrete>(kind_);
  double s = 0.0;
  for (std::size_t k = 0; k < d.values.size(); ++k)
    s += d.probs[k] * std::max(d.values[k] - t, 0.0);
  return s / mean_;
}

double ServiceDistribution::quantile(double p) const {
  if (!(p >= 0.0) || !(p < 1.0)) throw PreconditionError("quantile level must lie in [0, 1)");
  if (const auto* e = std::get_if<Exponential>(&kind_)) return -std::log1p(-p) / e->rate;
  if (const auto* d = std::get_if<Deterministic>(&kind_)) return d->value;
  if (const auto* q = std::get_if<ParetoTruncated>(&kind_)) {
    const double z = 1.0 - std::pow(q->scale / q->cap, q->shape);
    return std::min(q->scale * std::pow(1.0 - p * z, -1.0 / q->shape), q->cap);
  }
  const auto& d = std::get<Discrete>(kind_);
  const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), p);
  const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()),
                                         d.values.size() - 1);
  return d.values[idx];
}

double ServiceDistribution::sample(Rng& rng) const {
  if (const auto* e = std::get_if<Exponential>(&kind_)) {
    std::exponential_distribution<double> dist(e->rate);
    return dist(rng);
  }
  if (const auto* d = std::get_if<Deterministic>(&kind_)) return d->value;
  if (std::holds_alternative<ParetoTruncated>(kind_)) return quantile(rng.uniform());
  const auto& d = std::get<Discrete>(kind_);
  const double u = rng.uniform();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()),
                                         d.values.size() - 1);
  return d.values[idx];
}

std::string ServiceDistribution::kind_name() const {
  static const char* names[] = {"exponential", "deterministic", "pareto_truncated", "discrete"};
  return names[kind_.index()];
}

// ---------------------------------------------------------------------------
// CorrelationStructure

CorrelationStructure CorrelationStructure::exponential(double rate) {
  if (!positive_finite(rate)) throw PreconditionError("exponential correlation rate must be positive");
  return CorrelationStructure(Exponential{rate});
}

CorrelationStructure CorrelationStructure::power(double alpha) {
  if (!(alpha > 0.0) || !(alpha <= 1.0))
    throw PreconditionError("power correlation exponent must lie in (0, 1]");
  return CorrelationStructure(Power{alpha});
}

CorrelationStructure CorrelationStructure::integrated_tail(ServiceDistribution service) {
  return CorrelationStructure(IntegratedTail{std::move(service)});
}

CorrelationStructure CorrelationStructure::mixture(
    std::vector<std::pair<double, CorrelationStructure>> parts) {
  if (parts.empty()) throw PreconditionError("mixture needs at least one component");
  double total = 0.0;
  for (const auto& [w, cs] : parts) {
    if (!positive_finite(w)) throw PreconditionError("mixture weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > kSimplexTolerance)
    throw PreconditionError("mixture weights must sum to 1");
  Mixture m;
  for (auto& [w, cs] : parts)
    m.components.push_back({w / total, std::make_shared<const CorrelationStructure>(std::move(cs))});
  return CorrelationStructure(std::move(m));
}

double CorrelationStructure::survival(double t) const {
  if (t <= 0.0) return 1.0;
  if (std::isinf(t)) return 0.0;
  if (const auto* e = std::get_if<Exponential>(&kind_)) return std::exp(-e->rate * t);
  if (const auto* p = std::get_if<Power>(&kind_))
    return t >= 1.0 ? 0.0 : -std::expm1(p->alpha * std::log(t));
  if (const auto* g = std::get_if<IntegratedTail>(&kind_))
    return g->service.integrated_tail_survival(t);
  double s = 0.0;
  for (const auto& c : std::get<Mixture>(kind_).components) s += c.weight * c.structure->survival(t);
  return s;
}

double CorrelationStructure::H(double t) const {
  if (t <= 0.0) return 0.0;
  if (std::isinf(t)) return 1.0;
  if (const auto* e = std::get_if<Exponential>(&kind_)) return -std::expm1(-e->rate * t);
  if (const auto* p = std::get_if<Power>(&kind_)) return t >= 1.0 ? 1.0 : std::pow(t, p->alpha);
  if (const auto* g = std::get_if<IntegratedTail>(&kind_)) return g->service.integrated_tail(t);
  double s = 0.0;
  for (const auto& c : std::get<Mixture>(kind_).components) s += c.weight * c.structure->H(t);
  return s;
}

std::string CorrelationStructure::kind_name() const {
  static const char* names[] = {"exponential", "power", "integrated_tail", "mixture"};
  return names[kind_.index()];
}

// ---------------------------------------------------------------------------
// TimeGrid

TimeGrid::TimeGrid(std::vector<double> epochs) : epochs_(std::move(epochs)) {
  if (epochs_.empty()) throw PreconditionError("time grid needs at least one epoch");
  for (std::size_t k = 0; k < epochs_.size(); ++k) {
    if (!std::isfinite(epochs_[k])) throw PreconditionError("time grid epochs must be finite");
    if (k > 0 && !(epochs_[k] > epochs_[k - 1]))
      throw PreconditionError("time grid epochs must be strictly increasing");
  }
}

TimeGrid TimeGrid::without(std::size_t k) const {
  if (size() < 2 || k >= size()) throw PreconditionError("cannot remove that epoch from the grid");
  std::vector<double> e = epochs_;
  e.erase(e.begin() + static_cast<std::ptrdiff_t>(k));
  return TimeGrid(std::move(e));
}

TimeGrid TimeGrid::shifted(double tau) const {
  std::vector<double> e = epochs_;
  for (double& t : e) t += tau;
  return TimeGrid(std::move(e));
}

// ---------------------------------------------------------------------------
// WeightMatrix

WeightMatrix::WeightMatrix(std::size_t n) : n_(n), data_(n * (n + 1) / 2, 0.0) {}

double WeightMatrix::coverage_sum(std::size_t k) const {
  double s = 0.0;
  for (std::size_t i = 0; i <= k; ++i)
    for (std::size_t j = k; j < n_; ++j) s += (*this)(i, j);
  return s;
}

void WeightMatrix::write_csv(std::ostream& out) const {
  char buf[64];
  out << "i,j,value\n";
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i; j < n_; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", (*this)(i, j));
      out << i + 1 << ',' << j + 1 << ',' << buf << '\n';
    }
}

WeightMatrix weights(const CorrelationStructure& cs, const TimeGrid& grid) {
  const std::size_t n = grid.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  auto left = [&](std::size_t i) { return i == 0 ? -inf : grid[i - 1]; };
  auto right = [&](std::size_t j) { return j + 1 == n ? inf : grid[j + 1]; };
  // Differences involving an infinite boundary are +inf, where survival is 0.
  WeightMatrix a(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double v = cs.survival(grid[j] - grid[i]) - cs.survival(grid[j] - left(i)) -
                       cs.survival(right(j) - grid[i]) + cs.survival(right(j) - left(i));
      if (v < -kClampTolerance) throw ConcavityError(i + 1, j + 1, v);
      a(i, j) = std::max(v, 0.0);
    }
  }
  return a;
}

Eigen::MatrixXd a_to_b(const WeightMatrix& a) {
  const auto n = static_cast<Eigen::Index>(a.size());
  // tail(i, l) = sum_{j >= l} a_ij for l >= i.
  Eigen::MatrixXd tail = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (Eigen::Index l = n - 1; l >= i; --l) {
      s += a(static_cast<std::size_t>(i), static_cast<std::size_t>(l));
      tail(i, l) = s;
    }
  }
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index l = 0; l < n; ++l) {
    double s = 0.0;
    for (Eigen::Index k = 0; k <= l; ++k) {
      s += tail(k, l);
      b(k, l) = s;
      b(l, k) = s;
    }
  }
  return b;
}

WeightMatrix b_to_a(const Eigen::MatrixXd& b) {
  if (b.rows() != b.cols()) throw PreconditionError("b must be square");
  const auto n = b.rows();
  auto at = [&](Eigen::Index i, Eigen::Index j) {
    return (i < 0 || j >= n) ? 0.0 : b(i, j);
  };
  WeightMatrix a(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j)
      a(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
          at(i, j) - at(i, j + 1) - at(i - 1, j) + at(i - 1, j + 1);
  return a;
}

}  // namespace gcid
