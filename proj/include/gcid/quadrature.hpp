#pragma once

#include <complex>
#include <functional>

namespace gcid::quad {

inline constexpr double kRelTol = 1e-10;
inline constexpr double kAbsTol = 1e-14;

struct Tolerance {
  double relative = kRelTol;
  double absolute = kAbsTol;
};

/// Adaptive Gauss-Kronrod (7/15) integral of f over [a, b]; b may be +inf.
///
/// Wide ranges with a > 0 are split geometrically (one piece per decade)
/// before the adaptive rule runs, so integrands like 1/x stay resolvable.
/// Throws QuadratureError carrying the residual estimate when the requested
/// tolerance is not met.
double integrate(const std::function<double(double)>& f, double a, double b,
                 Tolerance tol = {});

/// Integral over (0, b] for integrands with an integrable singularity (or a
/// removable one) at the origin. Splits into decades towards zero.
double integrate_from_zero(const std::function<double(double)>& f, double b,
                           Tolerance tol = {});

/// Real and imaginary parts integrated separately over [a, b].
std::complex<double> integrate_complex(
    const std::function<std::complex<double>(double)>& f, double a, double b,
    Tolerance tol = {});

}  // namespace gcid::quad
