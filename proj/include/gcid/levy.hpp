#pragma once

#include <complex>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gcid/rng.hpp"

namespace gcid {

using Complex = std::complex<double>;

/// Law of the marks attached to customers of a marked M/GI/inf queue.
class MarkDistribution {
 public:
  struct PointMass {
    double value;
  };
  struct Discrete {
    std::vector<double> values;
    std::vector<double> probs;
  };
  struct Normal {
    double mean;
    double variance;
  };

  static MarkDistribution point_mass(double value);
  static MarkDistribution discrete(std::vector<double> values, std::vector<double> probs);
  static MarkDistribution normal(double mean, double variance);

  /// Characteristic function chi(theta) = E exp(i theta eta).
  Complex cf(double theta) const;
  /// Raw moment E[eta^k] for k in 1..4.
  double raw_moment(int k) const;
  /// Draws one mark. Point masses consume no randomness.
  double sample(Rng& rng) const;

  std::string kind_name() const;
  const auto& kind() const { return kind_; }

 private:
  using Kind = std::variant<PointMass, Discrete, Normal>;
  explicit MarkDistribution(Kind k) : kind_(std::move(k)) {}
  Kind kind_;
  std::vector<double> cumulative_;  // discrete only
};

/// Levy measure concentrated on (0, inf).
class LevyMeasure {
 public:
  /// Parameters of the closed family c x^(-1-a) exp(-x/s) on (lower, upper].
  struct TemperedPower {
    double scale = 1.0;
    double exponent = 0.0;
    double decay = std::numeric_limits<double>::infinity();
  };

  static LevyMeasure atomic(std::vector<double> locations, std::vector<double> masses);
  /// Arbitrary density on (lower, upper]; upper may be +inf.
  static LevyMeasure density(std::function<double(double)> f, double lower,
                             double upper, std::string label = "density");
  static LevyMeasure tempered_power(TemperedPower params, double lower, double upper);
  /// c / x on (lower, upper].
  static LevyMeasure inverse_x(double scale, double lower, double upper);

  bool is_atomic() const { return !atoms_.empty() || !density_; }
  const std::vector<double>& locations() const { return atoms_; }
  const std::vector<double>& masses() const { return masses_; }
  double lower() const { return lower_; }
  double upper() const { return upper_; }
  const std::string& label() const { return label_; }

  /// Density value (zero outside the support). Atomic measures return 0.
  double density_at(double x) const;

  /// Measure scaled by c > 0.
  LevyMeasure scaled(double c) const;

  /// integral of x^q nu(dx) over (0, inf); +inf when divergent.
  double moment(int q) const;
  /// nu[x, inf).
  double tail(double x) const;
  /// integral over [x, inf) of y nu(dy).
  double first_moment_tail(double x) const;
  /// integral over (0, x] of y nu(dy).
  double small_jump_mean(double x) const;
  /// integral of (exp(i theta x) - 1) nu(dx).
  Complex integrate_cf(double theta) const;

  const std::optional<TemperedPower>& family() const { return family_; }

 private:
  LevyMeasure() = default;

  std::vector<double> atoms_;
  std::vector<double> masses_;
  std::function<double(double)> density_;
  double lower_ = 0.0;
  double upper_ = 0.0;
  std::string label_;
  std::optional<TemperedPower> family_;
};

/// Compound-Poisson jump sampler for a density measure restricted to
/// [threshold, upper]. Built once per law; read-only afterwards.
class JumpSampler {
 public:
  JumpSampler(const LevyMeasure& measure, double threshold);

  double total_mass() const { return total_mass_; }
  double threshold() const { return threshold_; }
  double sample(Rng& rng) const;

 private:
  std::function<double(double)> density_;
  std::vector<double> edges_;
  std::vector<double> cumulative_;
  std::vector<double> envelope_;
  double total_mass_ = 0.0;
  double threshold_ = 0.0;
};

struct LawMoments {
  double mean;
  double variance;
};

/// Infinitely divisible law on the real line, given by its characteristic
/// exponent psi(theta) = log E exp(i theta X).
class LevyExponent {
 public:
  struct Gaussian {
    double drift;
    double variance;
  };
  struct Poisson {
    double rate;
  };
  struct CompoundPoisson {
    double rate;
    MarkDistribution marks;
  };
  /// psi(theta) = -shape log(1 - i theta); the default is the unit exponential.
  struct Gamma {
    double shape = 1.0;
  };
  struct SpectrallyPositive {
    LevyMeasure measure;
    double epsilon;
    std::shared_ptr<const JumpSampler> sampler;  // density measures only
    std::vector<double> atom_cumulative;         // atomic measures only
    double small_jump_mean = 0.0;
  };

  /// Default jump-truncation level for infinite-activity measures.
  static constexpr double kDefaultEpsilon = 1e-6;

  static LevyExponent gaussian(double drift, double variance);
  static LevyExponent poisson(double rate);
  static LevyExponent compound_poisson(double rate, MarkDistribution marks);
  static LevyExponent gamma(double shape = 1.0);
  /// psi(theta) = integral (e^{i theta x} - 1) nu(dx). Requires a finite first
  /// moment. Density measures are sampled by truncating jumps below
  /// `epsilon` and adding their mean deterministically.
  static LevyExponent spectrally_positive(LevyMeasure measure,
                                          double epsilon = kDefaultEpsilon);

  /// psi(theta).
  Complex eval(double theta) const;

  /// Mean and variance, -i psi'(0) and -psi''(0).
  LawMoments moments() const;
  /// psi''''(0), the fourth cumulant.
  double fourth_cumulant() const;

  /// Draw of Z(t) for the Levy process with E exp(i theta Z(t)) = exp(t psi).
  double sample_increment(double t, Rng& rng) const;

  /// The law with exponent c psi.
  LevyExponent scaled(double c) const;

  /// True when every increment is nonnegative.
  bool is_nonnegative() const;

  std::string kind_name() const;

  using Kind = std::variant<Gaussian, Poisson, CompoundPoisson, Gamma, SpectrallyPositive>;
  const Kind& kind() const { return kind_; }

 private:
  explicit LevyExponent(Kind k) : kind_(std::move(k)) {}
  Kind kind_;
};

}  // namespace gcid
