#pragma once

// Quadrature rules on [-1, 1] for the resolvent integral
//
//   log(A) = (A - I) * int_{-1}^{1} [(1-t) I + (1+t) A]^{-1} dt.
//
// Two families are provided: m-point Gauss-Legendre and the double-exponential
// (tanh-sinh) trapezoidal rule on a truncated window [l, r]. Besides the
// abscissas every rule carries the complements 1-t_k and 1+t_k computed
// without cancellation; the resolvent only ever needs those two numbers, and
// DE nodes crowd against +-1 where forming 1 - t from t loses every digit.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "logmq/errors.hpp"

namespace logmq {

enum class RuleKind
{
  GaussLegendre,
  DoubleExponential,
};

struct DeWindow
{
  double l = 0.0;
  double r = 0.0;

  double width() const noexcept { return r - l; }
};

struct QuadratureRule
{
  RuleKind kind = RuleKind::GaussLegendre;
  std::vector<double> abscissas;
  std::vector<double> weights;
  std::vector<double> one_minus; // 1 - t_k
  std::vector<double> one_plus;  // 1 + t_k
  std::optional<DeWindow> de_window;

  std::size_t m() const noexcept { return abscissas.size(); }
};

namespace detail {

// Legendre P_n(x) and P_{n-1}(x) by the three-term recurrence.
inline std::pair<double, double> legendre_pair(std::size_t n, double x)
{
  double p_prev = 1.0;
  double p = x;
  if (n == 0)
    return {1.0, 0.0};
  for (std::size_t j = 2; j <= n; ++j)
  {
    const double jd = static_cast<double>(j);
    const double p_next = ((2.0 * jd - 1.0) * x * p - (jd - 1.0) * p_prev) / jd;
    p_prev = p;
    p = p_next;
  }
  return {p, p_prev};
}

// log cosh(u) without overflow.
inline double log_cosh(double u)
{
  const double a = std::abs(u);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

// log of phi'(x) for phi(x) = tanh((pi/2) sinh x).
inline double log_de_jacobian(double x)
{
  constexpr double half_pi = std::numbers::pi / 2.0;
  return std::log(half_pi) + log_cosh(x) - 2.0 * log_cosh(half_pi * std::sinh(x));
}

} // namespace detail

inline constexpr int gl_newton_max_iterations = 100;
inline constexpr double gl_newton_tolerance = 1e-15;

// m-point Gauss-Legendre rule, abscissas ascending. Nodes come from Newton's
// method on the Legendre recurrence; the negative half is mirrored from the
// positive half so the rule is exactly symmetric.
inline QuadratureRule gauss_legendre_rule(std::size_t m)
{
  if (m == 0)
    throw DomainError("gauss_legendre_rule: m must be positive");

  QuadratureRule rule;
  rule.kind = RuleKind::GaussLegendre;
  rule.abscissas.assign(m, 0.0);
  rule.weights.assign(m, 0.0);
  rule.one_minus.assign(m, 1.0);
  rule.one_plus.assign(m, 1.0);

  const double md = static_cast<double>(m);
  const std::size_t half = (m + 1) / 2;
  for (std::size_t k = 1; k <= half; ++k)
  {
    double z = std::cos(std::numbers::pi * (static_cast<double>(k) - 0.25) / (md + 0.5));
    if (2 * k - 1 == m)
      z = 0.0;
    double dp = 0.0;
    for (int it = 0; it < gl_newton_max_iterations; ++it)
    {
      const auto [p, p_prev] = detail::legendre_pair(m, z);
      dp = md * (z * p - p_prev) / (z * z - 1.0);
      const double step = p / dp;
      z -= step;
      if (std::abs(step) <= gl_newton_tolerance)
        break;
    }
    const auto [p, p_prev] = detail::legendre_pair(m, z);
    dp = md * (z * p - p_prev) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z) * (1.0 + z) * dp * dp);

    // k-th largest root sits at index m-k; its mirror at k-1.
    const std::size_t hi = m - k;
    const std::size_t lo = k - 1;
    rule.abscissas[hi] = z;
    rule.abscissas[lo] = -z;
    rule.weights[hi] = w;
    rule.weights[lo] = w;
    rule.one_minus[hi] = 1.0 - z;
    rule.one_plus[hi] = 1.0 + z;
    rule.one_minus[lo] = 1.0 + z;
    rule.one_plus[lo] = 1.0 - z;
  }
  return rule;
}

// Truncation window for the tanh-sinh transform. Both tails are cut where the
// transformed integrand bound  phi'(x) * sqrt(kappa)/2  first drops below
// `tolerance`; sqrt(kappa)/2 bounds |(lambda-1) F(t; lambda)| over the
// balanced spectrum [1/sqrt(kappa), sqrt(kappa)].
inline DeWindow de_truncation(double tolerance, double kappa)
{
  if (!(tolerance > 0.0 && tolerance < 1.0))
    throw DomainError("de_truncation: tolerance must lie in (0, 1)");
  if (!(kappa >= 1.0) || !std::isfinite(kappa))
    throw DomainError("de_truncation: kappa must be >= 1");

  const double log_bound = std::log(std::sqrt(kappa) / 2.0);
  const double log_tol = std::log(tolerance);
  auto excess = [&](double x) { return detail::log_de_jacobian(x) + log_bound - log_tol; };

  // Never narrower than this; only reachable for tolerances near 1.
  constexpr double min_half_width = 0.5;
  double lo = 0.0;
  double hi = 1.0;
  while (excess(hi) > 0.0)
    hi *= 2.0;
  if (excess(lo) <= 0.0)
    return {-min_half_width, min_half_width};
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it)
  {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) > 0.0 ? lo : hi) = mid;
  }
  const double r = std::max(hi, min_half_width);
  return {-r, r};
}

// m-point tanh-sinh rule: trapezoidal rule with halved end weights on
// equispaced points of de_truncation(tolerance, kappa).
inline QuadratureRule de_rule(std::size_t m, double tolerance, double kappa)
{
  if (m < 2)
    throw DomainError("de_rule: m must be at least 2");
  const DeWindow win = de_truncation(tolerance, kappa);

  constexpr double half_pi = std::numbers::pi / 2.0;
  const double steps = static_cast<double>(m - 1);
  const double h = win.width() / steps;

  QuadratureRule rule;
  rule.kind = RuleKind::DoubleExponential;
  rule.de_window = win;
  rule.abscissas.resize(m);
  rule.weights.resize(m);
  rule.one_minus.resize(m);
  rule.one_plus.resize(m);
  for (std::size_t j = 0; j < m; ++j)
  {
    const double x = win.l + win.width() * (static_cast<double>(j) / steps);
    const double u = half_pi * std::sinh(x);
    const double e = std::exp(-2.0 * std::abs(u));
    const double near = 2.0 * e / (1.0 + e); // 1 - |tanh u|
    const double t = std::tanh(u);
    rule.abscissas[j] = t;
    rule.one_minus[j] = u >= 0.0 ? near : 1.0 - t;
    rule.one_plus[j] = u <= 0.0 ? near : 1.0 + t;
    double w = h * std::exp(detail::log_de_jacobian(x));
    if (j == 0 || j + 1 == m)
      w *= 0.5;
    rule.weights[j] = w;
  }
  return rule;
}

} // namespace logmq
