#pragma once

// Closed-form convergence rates of the four quadrature methods, expressed per
// total abscissa so that they compare at equal budget, plus method selection
// and the condition numbers where the rates cross.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <utility>

#include "logmq/errors.hpp"
#include "logmq/logm.hpp"
#include "logmq/quad_rules.hpp"

namespace logmq {

// Gauss-Legendre on a balanced operand with condition number kappa:
// 2 log((kappa^{1/4} + 1) / (kappa^{1/4} - 1)). Diverges as kappa -> 1+.
inline double rho_gl(double kappa)
{
  if (!(kappa > 1.0))
    throw DomainError("rho_gl: kappa must exceed 1");
  const double q = std::pow(kappa, 0.25);
  return 2.0 * std::log1p(2.0 / (q - 1.0));
}

// Each preconditioned part has condition sqrt(kappa) and gets half the budget.
inline double rho_pgl(double kappa)
{
  if (!(kappa > 1.0))
    throw DomainError("rho_pgl: kappa must exceed 1");
  return rho_gl(std::sqrt(kappa)) / 2.0;
}

// Width of the strip around the real axis where the tanh-sinh transformed
// integrand for eigenvalue lambda is analytic:
//   arcsin( sqrt( (L + 2 pi^2 - sqrt((L + 2 pi^2)^2 - 4 pi^4)) / (2 pi^2) ) ),
// L = (log lambda)^2. The inner difference is evaluated in the rationalized
// form 4 pi^4 / ((L + 2 pi^2) + sqrt(L (L + 4 pi^2))).
inline double d0(double lambda)
{
  if (!(lambda > 0.0))
    throw DomainError("d0: lambda must be positive");
  constexpr double p = std::numbers::pi * std::numbers::pi;
  const double ll = std::log(lambda);
  const double l2 = ll * ll;
  const double inner = 4.0 * p * p / ((l2 + 2.0 * p) + std::sqrt(l2 * (l2 + 4.0 * p)));
  return std::asin(std::min(1.0, std::sqrt(inner / (2.0 * p))));
}

inline double rho_de(double kappa, double tolerance)
{
  const DeWindow w = de_truncation(tolerance, kappa);
  return 2.0 * std::numbers::pi * d0(std::sqrt(kappa)) / w.width();
}

inline double rho_pde(double kappa, double tolerance)
{
  if (!(kappa >= 1.0))
    throw DomainError("rho_pde: kappa must be >= 1");
  return rho_de(std::sqrt(kappa), tolerance) / 2.0;
}

// Per-total-abscissa decay constant of `method`.
inline double effective_rate(Method method, double kappa, double tolerance)
{
  switch (method)
  {
  case Method::GL: return rho_gl(kappa);
  case Method::DE: return rho_de(kappa, tolerance);
  case Method::PGL: return rho_pgl(kappa);
  case Method::PDE: return rho_pde(kappa, tolerance);
  }
  throw DomainError("effective_rate: unknown method");
}

// Method with the largest rate. Ties go to the first of GL, PGL, DE, PDE.
// kappa = 1 needs no quadrature at all and reports GL.
inline Method fastest_method(double kappa, double tolerance)
{
  if (!(kappa >= 1.0))
    throw DomainError("fastest_method: kappa must be >= 1");
  if (!(tolerance > 0.0 && tolerance < 1.0))
    throw DomainError("fastest_method: tolerance must lie in (0, 1)");
  if (kappa == 1.0)
    return Method::GL;
  constexpr Method preference[] = {Method::GL, Method::PGL, Method::DE, Method::PDE};
  Method best = preference[0];
  double best_rate = effective_rate(best, kappa, tolerance);
  for (Method m : preference)
  {
    const double r = effective_rate(m, kappa, tolerance);
    if (r > best_rate)
    {
      best = m;
      best_rate = r;
    }
  }
  return best;
}

struct Crossovers
{
  double kappa_low = 0.0;  // GL and PGL rates meet
  double kappa_high = 0.0; // PGL and DE rates meet
};

namespace detail {

// First sign change of f(exp(x)) on [x_lo, x_hi], refined by bisection in
// log kappa to relative width 1e-9.
template <typename F>
double first_crossing(F&& f, double x_lo, double x_hi, const char* what)
{
  constexpr int grid = 400;
  double a = x_lo;
  double fa = f(std::exp(a));
  for (int i = 1; i <= grid; ++i)
  {
    double b = x_lo + (x_hi - x_lo) * i / grid;
    const double fb = f(std::exp(b));
    if ((fa > 0.0) != (fb > 0.0))
    {
      for (int it = 0; it < 200 && b - a > 1e-9; ++it)
      {
        const double mid = 0.5 * (a + b);
        const double fm = f(std::exp(mid));
        if ((fm > 0.0) == (fa > 0.0))
        {
          a = mid;
          fa = fm;
        }
        else
        {
          b = mid;
        }
      }
      return std::exp(0.5 * (a + b));
    }
    a = b;
    fa = fb;
  }
  throw ModelError(std::string("crossovers: no sign change found for ") + what);
}

} // namespace detail

inline constexpr double crossover_kappa_max = 1e12;

inline Crossovers crossovers(double tolerance)
{
  if (!(tolerance > 0.0 && tolerance < 1.0))
    throw DomainError("crossovers: tolerance must lie in (0, 1)");
  const double x_max = std::log(crossover_kappa_max);
  Crossovers c;
  c.kappa_low = detail::first_crossing([](double k) { return rho_gl(k) - rho_pgl(k); }, 1e-3, x_max,
                                       "GL/PGL");
  c.kappa_high = detail::first_crossing(
      [tolerance](double k) { return rho_pgl(k) - rho_de(k, tolerance); }, std::log(c.kappa_low), x_max,
      "PGL/DE");
  return c;
}

// Smallest m >= m0 with e0 exp(-rate (m - m0)) <= tolerance, given one
// measured error e0 at m0. A planning forecast; never a stopping rule.
inline std::size_t predict_m(double rate, double tolerance, std::size_t m0, double e0)
{
  if (!(rate > 0.0))
    throw DomainError("predict_m: rate must be positive");
  if (!(tolerance > 0.0))
    throw DomainError("predict_m: tolerance must be positive");
  if (e0 <= tolerance)
    return m0;
  const double steps = std::log(e0 / tolerance) / rate;
  // Absorb rounding in the ratio so exact multiples are not bumped up by one.
  return m0 + static_cast<std::size_t>(std::ceil(steps * (1.0 - 1e-12)));
}

} // namespace logmq
