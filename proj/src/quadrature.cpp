#include "gcid/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>

#include "gcid/errors.hpp"

namespace gcid::quad {
namespace {

constexpr unsigned kMaxDepth = 30;
constexpr double kDecadeSplitRatio = 1e3;
constexpr int kZeroDecades = 18;

struct Piece {
  double value;
  double error;
  double l1;
};

Piece adaptive(const std::function<double(double)>& f, double a, double b,
               Tolerance tol) {
  double error = 0.0;
  double l1 = 0.0;
  using Rule = boost::math::quadrature::gauss_kronrod<double, 15>;
  if (std::isinf(b)) {
    const double value = Rule::integrate(f, a, b, kMaxDepth, tol.relative, &error, &l1);
    return {value, error, l1};
  }
  // The rule's error estimate ignores the interval width, so integrate over a
  // unit-width image of [a, b] to keep it on the same scale as the value.
  const double width = b - a;
  auto g = [&](double u) { return width * f(a + width * u); };
  const double value = Rule::integrate(g, 0.0, 1.0, kMaxDepth, tol.relative, &error, &l1);
  return {value, error, l1};
}

void check(const Piece& total, Tolerance tol, double a, double b) {
  if (!std::isfinite(total.value)) {
    throw QuadratureError("integral over [" + std::to_string(a) + ", " +
                              std::to_string(b) + "] is not finite",
                          total.value, total.error);
  }
  // Boost measures its relative tolerance against the L1 norm of the
  // integrand, which is the meaningful scale for oscillatory integrands.
  const double allowed = std::max(tol.absolute, tol.relative * total.l1) * 10.0;
  if (total.error > allowed) {
    throw QuadratureError("quadrature over [" + std::to_string(a) + ", " +
                              std::to_string(b) + "] did not converge",
                          total.value, total.error);
  }
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 Tolerance tol) {
  if (a == b) return 0.0;
  if (b < a) return -integrate(f, b, a, tol);
  Piece total{0.0, 0.0, 0.0};
  auto add = [&](double lo, double hi) {
    const Piece p = adaptive(f, lo, hi, tol);
    total.value += p.value;
    total.error += p.error;
    total.l1 += p.l1;
  };
  const bool infinite = std::isinf(b);
  const double finite_end = infinite ? std::max(1.0, 2.0 * a) : b;
  if (a > 0.0 && finite_end / a > kDecadeSplitRatio) {
    double lo = a;
    while (lo < finite_end) {
      const double hi = std::min(lo * 10.0, finite_end);
      add(lo, hi);
      lo = hi;
    }
  } else if (finite_end > a) {
    add(a, finite_end);
  }
  if (infinite) add(finite_end, b);
  check(total, tol, a, b);
  return total.value;
}

double integrate_from_zero(const std::function<double(double)>& f, double b,
                           Tolerance tol) {
  if (b <= 0.0) return 0.0;
  const double finite_end = std::isinf(b) ? 1.0 : b;
  Piece total{0.0, 0.0, 0.0};
  auto add = [&](double lo, double hi) {
    const Piece p = adaptive(f, lo, hi, tol);
    total.value += p.value;
    total.error += p.error;
    total.l1 += p.l1;
  };
  double hi = finite_end;
  for (int k = 0; k < kZeroDecades; ++k) {
    const double lo = hi / 10.0;
    add(lo, hi);
    hi = lo;
  }
  // x = h e^{-s} maps (0, h] to [0, inf) and turns x^{-p} endpoint
  // singularities into exponential decay, which the rule resolves.
  {
    const double h = hi;
    auto g = [&](double s) {
      const double x = h * std::exp(-s);
      return x > 0.0 ? x * f(x) : 0.0;
    };
    const Piece p = adaptive(g, 0.0, std::numeric_limits<double>::infinity(), tol);
    total.value += p.value;
    total.error += p.error;
    total.l1 += p.l1;
  }
  if (std::isinf(b)) add(finite_end, b);
  check(total, tol, 0.0, b);
  return total.value;
}

std::complex<double> integrate_complex(
    const std::function<std::complex<double>(double)>& f, double a, double b,
    Tolerance tol) {
  const double re = integrate([&](double x) { return f(x).real(); }, a, b, tol);
  const double im = integrate([&](double x) { return f(x).imag(); }, a, b, tol);
  return {re, im};
}

}  // namespace gcid::quad
