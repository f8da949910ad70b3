#include "gcid/levy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>

#include "gcid/errors.hpp"
#include "gcid/quadrature.hpp"

namespace gcid {
namespace {

constexpr std::size_t kJumpBins = 4096;
constexpr int kEnvelopeProbes = 17;
constexpr double kEnvelopeSafety = 1.25;

// exp(i y) - 1 without cancellation in the real part for small y.
Complex expm1_i(double y) {
  const double s = std::sin(0.5 * y);
  return {-2.0 * s * s, std::sin(y)};
}

std::int64_t draw_poisson(double mean, Rng& rng) {
  if (!(mean > 0.0)) return 0;
  std::poisson_distribution<std::int64_t> dist(mean);
  return dist(rng);
}

void require_finite_nonneg(double v, const char* what) {
  if (!std::isfinite(v) || v < 0.0)
    throw PreconditionError(std::string(what) + " must be finite and nonnegative");
}

}  // namespace

// ---------------------------------------------------------------------------
// MarkDistribution

MarkDistribution MarkDistribution::point_mass(double value) {
  if (!std::isfinite(value)) throw PreconditionError("point mass location must be finite");
  return MarkDistribution(PointMass{value});
}

MarkDistribution MarkDistribution::discrete(std::vector<double> values,
                                            std::vector<double> probs) {
  if (values.empty() || values.size() != probs.size())
    throw PreconditionError("discrete marks need equally many values and probabilities");
  double total = 0.0;
  for (double p : probs) {
    require_finite_nonneg(p, "mark probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw PreconditionError("mark probabilities must sum to 1");
  for (double& p : probs) p /= total;
  MarkDistribution d(Discrete{std::move(values), std::move(probs)});
  const auto& disc = std::get<Discrete>(d.kind_);
  d.cumulative_.resize(disc.probs.size());
  std::partial_sum(disc.probs.begin(), disc.probs.end(), d.cumulative_.begin());
  return d;
}

MarkDistribution MarkDistribution::normal(double mean, double variance) {
  if (!std::isfinite(mean)) throw PreconditionError("normal mark mean must be finite");
  require_finite_nonneg(variance, "normal mark variance");
  return MarkDistribution(Normal{mean, variance});
}

Complex MarkDistribution::cf(double theta) const {
  if (const auto* p = std::get_if<PointMass>(&kind_))
    return std::polar(1.0, theta * p->value);
  if (const auto* d = std::get_if<Discrete>(&kind_)) {
    Complex sum = 0.0;
    for (std::size_t k = 0; k < d->values.size(); ++k)
      sum += d->probs[k] * std::polar(1.0, theta * d->values[k]);
    return sum;
  }
  const auto& n = std::get<Normal>(kind_);
  return std::polar(std::exp(-0.5 * n.variance * theta * theta), theta * n.mean);
}

double MarkDistribution::raw_moment(int k) const {
  if (k < 1 || k > 4) throw PreconditionError("mark moments are available for k = 1..4");
  if (const auto* p = std::get_if<PointMass>(&kind_)) return std::pow(p->value, k);
  if (const auto* d = std::get_if<Discrete>(&kind_)) {
    double sum = 0.0;
    for (std::size_t i = 0; i < d->values.size(); ++i)
      sum += d->probs[i] * std::pow(d->values[i], k);
    return sum;
  }
  const auto& n = std::get<Normal>(kind_);
  const double m = n.mean;
  const double v = n.variance;
  switch (k) {
    case 1:
      return m;
    case 2:
      return m * m + v;
    case 3:
      return m * m * m + 3.0 * m * v;
    default:
      return m * m * m * m + 6.0 * m * m * v + 3.0 * v * v;
  }
}

double MarkDistribution::sample(Rng& rng) const {
  if (const auto* p = std::get_if<PointMass>(&kind_)) return p->value;
  if (const auto* d = std::get_if<Discrete>(&kind_)) {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    const auto idx = std::min<std::size_t>(
        static_cast<std::size_t>(it - cumulative_.begin()), d->values.size() - 1);
    return d->values[idx];
  }
  const auto& n = std::get<Normal>(kind_);
  std::normal_distribution<double> dist(n.mean, std::sqrt(n.variance));
  return dist(rng);
}

std::string MarkDistribution::kind_name() const {
  return std::visit(
      [](const auto& k) -> std::string {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, PointMass>) return "point_mass";
        else if constexpr (std::is_same_v<T, Discrete>) return "discrete";
        else return "normal";
      },
      kind_);
}

// ---------------------------------------------------------------------------
// LevyMeasure

LevyMeasure LevyMeasure::atomic(std::vector<double> locations, std::vector<double> masses) {
  if (locations.size() != masses.size())
    throw PreconditionError("atomic measure needs equally many locations and masses");
  for (std::size_t k = 0; k < locations.size(); ++k) {
    if (!(locations[k] > 0.0) || !std::isfinite(locations[k]))
      throw PreconditionError("atoms of a spectrally positive measure must be strictly positive");
    require_finite_nonneg(masses[k], "atom mass");
  }
  LevyMeasure m;
  m.atoms_ = std::move(locations);
  m.masses_ = std::move(masses);
  m.label_ = "atomic";
  return m;
}

LevyMeasure LevyMeasure::density(std::function<double(double)> f, double lower,
                                 double upper, std::string label) {
  if (!f) throw PreconditionError("density function is empty");
  if (!(lower >= 0.0) || !(upper > lower))
    throw PreconditionError("density support must satisfy 0 <= lower < upper");
  LevyMeasure m;
  m.density_ = std::move(f);
  m.lower_ = lower;
  m.upper_ = upper;
  m.label_ = std::move(label);
  return m;
}

LevyMeasure LevyMeasure::tempered_power(TemperedPower p, double lower, double upper) {
  if (!(p.scale > 0.0) || !std::isfinite(p.scale))
    throw PreconditionError("tempered_power scale must be positive");
  if (!(p.exponent < 1.0))
    throw PreconditionError("tempered_power exponent must be < 1 for a finite first moment");
  if (!(p.decay > 0.0)) throw PreconditionError("tempered_power decay must be positive");
  const double c = p.scale;
  const double a = p.exponent;
  const double s = p.decay;
  auto f = [c, a, s](double x) {
    double v = c * std::pow(x, -1.0 - a);
    if (std::isfinite(s)) v *= std::exp(-x / s);
    return v;
  };
  LevyMeasure m = density(f, lower, upper, "tempered_power");
  m.family_ = p;
  return m;
}

LevyMeasure LevyMeasure::inverse_x(double scale, double lower, double upper) {
  LevyMeasure m = tempered_power({scale, 0.0, std::numeric_limits<double>::infinity()},
                                 lower, upper);
  m.label_ = "inverse_x";
  return m;
}

double LevyMeasure::density_at(double x) const {
  if (!density_ || !(x > lower_) || x > upper_) return 0.0;
  return density_(x);
}

LevyMeasure LevyMeasure::scaled(double c) const {
  if (!(c > 0.0) || !std::isfinite(c)) throw PreconditionError("measure scale must be positive");
  LevyMeasure m = *this;
  for (double& w : m.masses_) w *= c;
  if (density_) {
    auto f = density_;
    m.density_ = [f, c](double x) { return c * f(x); };
  }
  if (m.family_) m.family_->scale *= c;
  return m;
}

namespace {

double integrate_support(const std::function<double(double)>& g, double lower,
                         double upper) {
  if (!(upper > lower)) return 0.0;
  if (lower == 0.0) return quad::integrate_from_zero(g, upper);
  return quad::integrate(g, lower, upper);
}

}  // namespace

double LevyMeasure::moment(int q) const {
  if (is_atomic()) {
    double sum = 0.0;
    for (std::size_t k = 0; k < atoms_.size(); ++k) sum += masses_[k] * std::pow(atoms_[k], q);
    return sum;
  }
  try {
    const auto& f = density_;
    const double v =
        integrate_support([&](double x) { return std::pow(x, q) * f(x); }, lower_, upper_);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  } catch (const QuadratureError&) {
    return std::numeric_limits<double>::infinity();
  }
}

double LevyMeasure::tail(double x) const {
  if (is_atomic()) {
    double sum = 0.0;
    for (std::size_t k = 0; k < atoms_.size(); ++k)
      if (atoms_[k] >= x) sum += masses_[k];
    return sum;
  }
  const double a = std::max(x, lower_);
  try {
    return integrate_support(density_, a, upper_);
  } catch (const QuadratureError&) {
    return std::numeric_limits<double>::infinity();
  }
}

double LevyMeasure::first_moment_tail(double x) const {
  if (is_atomic()) {
    double sum = 0.0;
    for (std::size_t k = 0; k < atoms_.size(); ++k)
      if (atoms_[k] >= x) sum += masses_[k] * atoms_[k];
    return sum;
  }
  const auto& f = density_;
  return integrate_support([&](double y) { return y * f(y); }, std::max(x, lower_), upper_);
}

double LevyMeasure::small_jump_mean(double x) const {
  if (is_atomic()) {
    double sum = 0.0;
    for (std::size_t k = 0; k < atoms_.size(); ++k)
      if (atoms_[k] <= x) sum += masses_[k] * atoms_[k];
    return sum;
  }
  const auto& f = density_;
  return integrate_support([&](double y) { return y * f(y); }, lower_, std::min(x, upper_));
}

Complex LevyMeasure::integrate_cf(double theta) const {
  if (theta == 0.0) return 0.0;
  if (is_atomic()) {
    Complex sum = 0.0;
    for (std::size_t k = 0; k < atoms_.size(); ++k) sum += masses_[k] * expm1_i(theta * atoms_[k]);
    return sum;
  }
  const auto& f = density_;
  const double re = integrate_support(
      [&](double x) {
        const double s = std::sin(0.5 * theta * x);
        return -2.0 * s * s * f(x);
      },
      lower_, upper_);
  const double im =
      integrate_support([&](double x) { return std::sin(theta * x) * f(x); }, lower_, upper_);
  return {re, im};
}

// ---------------------------------------------------------------------------
// JumpSampler

JumpSampler::JumpSampler(const LevyMeasure& measure, double threshold)
    : threshold_(threshold) {
  const double a = std::max(threshold, measure.lower());
  double b = measure.upper();
  density_ = [measure](double x) { return measure.density_at(x); };
  if (!(b > a)) return;
  if (std::isinf(b)) {
    // Cut the support where the remaining mass is negligible.
    double cut = std::max(1.0, 2.0 * a);
    const double core = quad::integrate(density_, a, cut);
    while (quad::integrate(density_, cut, std::numeric_limits<double>::infinity()) >
           1e-14 * std::max(core, 1.0)) {
      cut *= 2.0;
    }
    b = cut;
  }
  const bool geometric = a > 0.0 && b / a > 4.0;
  edges_.resize(kJumpBins + 1);
  for (std::size_t k = 0; k <= kJumpBins; ++k) {
    const double u = static_cast<double>(k) / kJumpBins;
    edges_[k] = geometric ? a * std::pow(b / a, u) : a + (b - a) * u;
  }
  edges_.back() = b;
  cumulative_.resize(kJumpBins);
  envelope_.resize(kJumpBins);
  double running = 0.0;
  for (std::size_t k = 0; k < kJumpBins; ++k) {
    const double lo = edges_[k];
    const double hi = edges_[k + 1];
    running += quad::integrate(density_, lo, hi, {1e-12, 1e-300});
    cumulative_[k] = running;
    double peak = 0.0;
    for (int p = 0; p < kEnvelopeProbes; ++p) {
      const double x = lo + (hi - lo) * (p + 0.5) / kEnvelopeProbes;
      peak = std::max(peak, density_(x));
    }
    peak = std::max({peak, density_(std::nextafter(lo, hi)), density_(hi)});
    envelope_[k] = kEnvelopeSafety * peak;
  }
  total_mass_ = running;
}

double JumpSampler::sample(Rng& rng) const {
  const double target = rng.uniform() * total_mass_;
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  const std::size_t k = std::min<std::size_t>(
      static_cast<std::size_t>(it - cumulative_.begin()), cumulative_.size() - 1);
  const double lo = edges_[k];
  const double hi = edges_[k + 1];
  for (;;) {
    const double x = lo + (hi - lo) * rng.uniform_open();
    if (rng.uniform() * envelope_[k] <= density_(x)) return x;
  }
}

// ---------------------------------------------------------------------------
// LevyExponent

LevyExponent LevyExponent::gaussian(double drift, double variance) {
  if (!std::isfinite(drift)) throw PreconditionError("gaussian drift must be finite");
  require_finite_nonneg(variance, "gaussian variance");
  return LevyExponent(Gaussian{drift, variance});
}

LevyExponent LevyExponent::poisson(double rate) {
  require_finite_nonneg(rate, "poisson rate");
  return LevyExponent(Poisson{rate});
}

LevyExponent LevyExponent::compound_poisson(double rate, MarkDistribution marks) {
  require_finite_nonneg(rate, "compound poisson rate");
  return LevyExponent(CompoundPoisson{rate, std::move(marks)});
}

LevyExponent LevyExponent::gamma(double shape) {
  if (!(shape > 0.0) || !std::isfinite(shape))
    throw PreconditionError("gamma shape multiplier must be positive");
  return LevyExponent(Gamma{shape});
}

LevyExponent LevyExponent::spectrally_positive(LevyMeasure measure, double epsilon) {
  if (!(epsilon > 0.0)) throw PreconditionError("truncation level epsilon must be positive");
  const double m1 = measure.moment(1);
  if (!std::isfinite(m1))
    throw PreconditionError("spectrally positive measure needs a finite first moment");
  SpectrallyPositive sp{std::move(measure), epsilon, nullptr, {}, 0.0};
  if (sp.measure.is_atomic()) {
    const auto& masses = sp.measure.masses();
    sp.atom_cumulative.resize(masses.size());
    std::partial_sum(masses.begin(), masses.end(), sp.atom_cumulative.begin());
  } else {
    sp.sampler = std::make_shared<JumpSampler>(sp.measure, epsilon);
    if (sp.measure.lower() < epsilon) sp.small_jump_mean = sp.measure.small_jump_mean(epsilon);
  }
  return LevyExponent(std::move(sp));
}

Complex LevyExponent::eval(double theta) const {
  if (!std::isfinite(theta)) throw PreconditionError("theta must be finite");
  if (theta == 0.0) return 0.0;
  return std::visit(
      [theta](const auto& k) -> Complex {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          return {-0.5 * k.variance * theta * theta, k.drift * theta};
        } else if constexpr (std::is_same_v<T, Poisson>) {
          return k.rate * expm1_i(theta);
        } else if constexpr (std::is_same_v<T, CompoundPoisson>) {
          return k.rate * (k.marks.cf(theta) - 1.0);
        } else if constexpr (std::is_same_v<T, Gamma>) {
          return -k.shape * std::log(Complex(1.0, -theta));
        } else {
          return k.measure.integrate_cf(theta);
        }
      },
      kind_);
}

LawMoments LevyExponent::moments() const {
  return std::visit(
      [](const auto& k) -> LawMoments {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          return {k.drift, k.variance};
        } else if constexpr (std::is_same_v<T, Poisson>) {
          return {k.rate, k.rate};
        } else if constexpr (std::is_same_v<T, CompoundPoisson>) {
          return {k.rate * k.marks.raw_moment(1), k.rate * k.marks.raw_moment(2)};
        } else if constexpr (std::is_same_v<T, Gamma>) {
          return {k.shape, k.shape};
        } else {
          const double m2 = k.measure.moment(2);
          if (!std::isfinite(m2))
            throw UnsupportedMomentError("levy measure has an infinite second moment");
          return {k.measure.moment(1), m2};
        }
      },
      kind_);
}

double LevyExponent::fourth_cumulant() const {
  return std::visit(
      [](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, Poisson>) {
          return k.rate;
        } else if constexpr (std::is_same_v<T, CompoundPoisson>) {
          return k.rate * k.marks.raw_moment(4);
        } else if constexpr (std::is_same_v<T, Gamma>) {
          return 6.0 * k.shape;
        } else {
          const double m4 = k.measure.moment(4);
          if (!std::isfinite(m4))
            throw UnsupportedMomentError("levy measure has an infinite fourth moment");
          return m4;
        }
      },
      kind_);
}

double LevyExponent::sample_increment(double t, Rng& rng) const {
  if (!(t >= 0.0) || !std::isfinite(t))
    throw PreconditionError("increment length t must be finite and nonnegative");
  if (t == 0.0) return 0.0;
  return std::visit(
      [t, &rng](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          if (k.variance == 0.0) return k.drift * t;
          std::normal_distribution<double> dist(k.drift * t, std::sqrt(k.variance * t));
          return dist(rng);
        } else if constexpr (std::is_same_v<T, Poisson>) {
          return static_cast<double>(draw_poisson(k.rate * t, rng));
        } else if constexpr (std::is_same_v<T, CompoundPoisson>) {
          const std::int64_t jumps = draw_poisson(k.rate * t, rng);
          double sum = 0.0;
          for (std::int64_t j = 0; j < jumps; ++j) sum += k.marks.sample(rng);
          return sum;
        } else if constexpr (std::is_same_v<T, Gamma>) {
          std::gamma_distribution<double> dist(k.shape * t, 1.0);
          return dist(rng);
        } else {
          if (k.measure.is_atomic()) {
            if (k.atom_cumulative.empty()) return 0.0;
            const double total = k.atom_cumulative.back();
            const std::int64_t jumps = draw_poisson(total * t, rng);
            const auto& locs = k.measure.locations();
            double sum = 0.0;
            for (std::int64_t j = 0; j < jumps; ++j) {
              const double u = rng.uniform() * total;
              const auto it =
                  std::upper_bound(k.atom_cumulative.begin(), k.atom_cumulative.end(), u);
              const auto idx = std::min<std::size_t>(
                  static_cast<std::size_t>(it - k.atom_cumulative.begin()), locs.size() - 1);
              sum += locs[idx];
            }
            return sum;
          }
          const std::int64_t jumps = draw_poisson(k.sampler->total_mass() * t, rng);
          double sum = k.small_jump_mean * t;
          for (std::int64_t j = 0; j < jumps; ++j) sum += k.sampler->sample(rng);
          return sum;
        }
      },
      kind_);
}

LevyExponent LevyExponent::scaled(double c) const {
  if (!(c > 0.0) || !std::isfinite(c)) throw PreconditionError("exponent scale must be positive");
  return std::visit(
      [c](const auto& k) -> LevyExponent {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          return gaussian(c * k.drift, c * k.variance);
        } else if constexpr (std::is_same_v<T, Poisson>) {
          return poisson(c * k.rate);
        } else if constexpr (std::is_same_v<T, CompoundPoisson>) {
          return compound_poisson(c * k.rate, k.marks);
        } else if constexpr (std::is_same_v<T, Gamma>) {
          return gamma(c * k.shape);
        } else {
          return spectrally_positive(k.measure.scaled(c), k.epsilon);
        }
      },
      kind_);
}

bool LevyExponent::is_nonnegative() const {
  return std::visit(
      [](const auto& k) -> bool {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          return k.variance == 0.0 && k.drift >= 0.0;
        } else if constexpr (std::is_same_v<T, CompoundPoisson>) {
          const auto& mk = k.marks.kind();
          if (const auto* p = std::get_if<MarkDistribution::PointMass>(&mk)) return p->value >= 0.0;
          if (const auto* d = std::get_if<MarkDistribution::Discrete>(&mk))
            return std::all_of(d->values.begin(), d->values.end(),
                               [](double v) { return v >= 0.0; });
          return false;
        } else {
          return true;
        }
      },
      kind_);
}

std::string LevyExponent::kind_name() const {
  return std::visit(
      [](const auto& k) -> std::string {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Gaussian>) return "gaussian";
        else if constexpr (std::is_same_v<T, Poisson>) return "poisson";
        else if constexpr (std::is_same_v<T, CompoundPoisson>) return "compound_poisson";
        else if constexpr (std::is_same_v<T, Gamma>) return "gamma";
        else return "spectrally_positive";
      },
      kind_);
}

}  // namespace gcid
