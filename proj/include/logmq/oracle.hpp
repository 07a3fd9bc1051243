#pragma once

// Reference values and error measurement: logarithm and exponential through a
// symmetric eigendecomposition, spectral norms, scalar quadrature errors and
// least-squares fits of geometric error decay.

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "logmq/errors.hpp"
#include "logmq/quad_rules.hpp"
#include "logmq/spd_matrix.hpp"

namespace logmq {

enum class ReferenceSource
{
  eigendecomposition,
  closed_form,
};

struct ReferenceLog
{
  Matrix value;
  ReferenceSource source = ReferenceSource::eigendecomposition;
  double certified_accuracy = 0.0; // heuristic n * eps * kappa * ||log A||, not a bound
};

inline constexpr Eigen::Index oracle_max_n = 2048;

namespace detail {

inline bool is_diagonal(const Matrix& a)
{
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (i != j && a(i, j) != 0.0)
        return false;
  return true;
}

inline void require_symmetric(const Matrix& s, double rel_tol, const char* who)
{
  if (s.rows() != s.cols())
    throw DomainError(std::string(who) + ": matrix is not square");
  const double scale = s.size() == 0 ? 0.0 : s.cwiseAbs().maxCoeff();
  if (s.size() != 0 && (s - s.transpose()).cwiseAbs().maxCoeff() > rel_tol * scale)
    throw DomainError(std::string(who) + ": matrix is not symmetric");
}

// Symmetric tridiagonal with constant diagonal d and constant off-diagonal b
// (n >= 2). Returns (d, b) when the pattern matches exactly.
inline std::optional<std::pair<double, double>> toeplitz_tridiagonal(const Matrix& a)
{
  const Eigen::Index n = a.rows();
  if (n < 2)
    return std::nullopt;
  const double d = a(0, 0);
  const double b = a(1, 0);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
    {
      const double want = i == j ? d : (i == j + 1 || j == i + 1) ? b : 0.0;
      if (a(i, j) != want)
        return std::nullopt;
    }
  return std::pair{d, b};
}

} // namespace detail

// Q f(Lambda) Q^T for a symmetric matrix; f is applied to the eigenvalues.
template <typename F>
Matrix eig_function(const Matrix& a, F&& f)
{
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  if (es.info() != Eigen::Success)
    throw ConvergenceError("symmetric eigensolve failed");
  Vector fv = es.eigenvalues().unaryExpr(f);
  const Matrix& q = es.eigenvectors();
  Matrix out = q * fv.asDiagonal() * q.transpose();
  return 0.5 * (out + out.transpose());
}

// Principal logarithm of a dense symmetric positive definite matrix.
inline ReferenceLog eig_logm(const Matrix& a)
{
  if (a.rows() > oracle_max_n)
    throw DomainError("eig_logm: limited to n <= " + std::to_string(oracle_max_n));
  detail::require_symmetric(a, 1e-12, "eig_logm");

  ReferenceLog ref;
  if (detail::is_diagonal(a))
  {
    ref.value = Matrix::Zero(a.rows(), a.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
    {
      if (!(a(i, i) > 0.0))
        throw DefinitenessError("eig_logm: nonpositive eigenvalue");
      ref.value(i, i) = std::log(a(i, i));
    }
    ref.source = ReferenceSource::closed_form;
    ref.certified_accuracy = std::numeric_limits<double>::epsilon() * ref.value.cwiseAbs().maxCoeff();
    return ref;
  }

  // Toeplitz tridiagonal: eigenpairs d + 2b cos(k pi/(n+1)) and
  // sqrt(2/(n+1)) sin(j k pi/(n+1)) are known exactly. The eigenvalues are
  // evaluated through sin^2 / cos^2 of the half angle so the small ones keep
  // their relative accuracy.
  if (const auto tt = detail::toeplitz_tridiagonal(a); tt && tt->second != 0.0)
  {
    const auto [d, b] = *tt;
    const Eigen::Index n = a.rows();
    const double np1 = static_cast<double>(n + 1);
    Vector lv(n);
    Matrix v(n, n);
    for (Eigen::Index k = 1; k <= n; ++k)
    {
      const double half = static_cast<double>(k) * std::numbers::pi / (2.0 * np1);
      const double lam = b < 0.0 ? (d + 2.0 * b) - 4.0 * b * std::sin(half) * std::sin(half)
                                 : (d - 2.0 * b) + 4.0 * b * std::cos(half) * std::cos(half);
      if (!(lam > 0.0))
        throw DefinitenessError("eig_logm: nonpositive eigenvalue " + std::to_string(lam));
      lv[k - 1] = std::log(lam);
      for (Eigen::Index j = 1; j <= n; ++j)
        v(j - 1, k - 1) = std::sqrt(2.0 / np1) *
                          std::sin(static_cast<double>(j * k % (2 * (n + 1))) * std::numbers::pi / np1);
    }
    Matrix out = v * lv.asDiagonal() * v.transpose();
    ref.value = 0.5 * (out + out.transpose());
    ref.source = ReferenceSource::closed_form;
    ref.certified_accuracy = static_cast<double>(n) * std::numeric_limits<double>::epsilon() *
                             lv.cwiseAbs().maxCoeff();
    return ref;
  }

  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  if (es.info() != Eigen::Success)
    throw ConvergenceError("eig_logm: symmetric eigensolve failed");
  const Vector& ev = es.eigenvalues();
  if (!(ev[0] > 0.0))
    throw DefinitenessError("eig_logm: nonpositive eigenvalue " + std::to_string(ev[0]));
  const Vector lv = ev.array().log().matrix();
  const Matrix& q = es.eigenvectors();
  Matrix out = q * lv.asDiagonal() * q.transpose();
  ref.value = 0.5 * (out + out.transpose());
  ref.source = ReferenceSource::eigendecomposition;
  const double kappa = ev[ev.size() - 1] / ev[0];
  ref.certified_accuracy = static_cast<double>(a.rows()) * std::numeric_limits<double>::epsilon() *
                           kappa * lv.cwiseAbs().maxCoeff();
  return ref;
}

inline ReferenceLog eig_logm(const SpdMatrix& a) { return eig_logm(a.to_dense()); }

// exp of a symmetric matrix through its eigendecomposition.
inline Matrix eig_expm(const Matrix& s)
{
  detail::require_symmetric(s, 1e-12, "eig_expm");
  return eig_function(s, [](double x) { return std::exp(x); });
}

inline constexpr int power_iteration_max_steps = 500;
inline constexpr double power_iteration_tolerance = 1e-6;

// ||S||_2 = max |eigenvalue| of a symmetric matrix. Dense eigensolve up to
// oracle_max_n, power iteration above.
inline double spectral_norm(const Matrix& s)
{
  detail::require_symmetric(s, 1e-12, "spectral_norm");
  if (s.size() == 0)
    return 0.0;
  if (s.rows() <= oracle_max_n)
  {
    Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> unif(0.5, 1.5);
  Vector v(s.rows());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v[i] = unif(rng);
  v.normalize();
  double est = 0.0;
  for (int it = 0; it < power_iteration_max_steps; ++it)
  {
    Vector w = s * v;
    const double next = w.norm();
    if (next == 0.0)
      return 0.0;
    v = w / next;
    if (std::abs(next - est) <= power_iteration_tolerance * next)
      return next;
    est = next;
  }
  return est;
}

// |log(lambda) - (lambda - 1) sum_k w_k / ((1 - t_k) + (1 + t_k) lambda)|
inline double scalar_quadrature_error(double lambda, const QuadratureRule& rule)
{
  if (!(lambda > 0.0))
    throw DomainError("scalar_quadrature_error: lambda must be positive");
  double sum = 0.0;
  for (std::size_t k = 0; k < rule.m(); ++k)
    sum += rule.weights[k] / (rule.one_minus[k] + rule.one_plus[k] * lambda);
  return std::abs(std::log(lambda) - (lambda - 1.0) * sum);
}

struct RateFit
{
  double rate = 0.0;     // decay constant rho in error ~ K exp(-rho m)
  double intercept = 0.0; // log K
  std::size_t points = 0;
};

// Which part of an error history counts as the geometric regime. Points above
// `upper` are pre-asymptotic; points below max(lower, floor_margin * min_error)
// are dominated by rounding.
struct FitWindow
{
  double upper = 1e-2;
  double lower = 1e-11;
  double floor_margin = 1e3;
};

// Least-squares slope of log(error) against m over the geometric regime.
inline RateFit fit_decay_rate(std::span<const double> ms, std::span<const double> errors,
                              const FitWindow& window = {})
{
  if (ms.size() != errors.size())
    throw DomainError("fit_decay_rate: length mismatch");
  double floor = std::numeric_limits<double>::infinity();
  for (double e : errors)
    if (e > 0.0)
      floor = std::min(floor, e);
  const double lower = std::max(window.lower, window.floor_margin * floor);

  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < ms.size(); ++i)
    if (errors[i] >= lower && errors[i] <= window.upper)
    {
      xs.push_back(ms[i]);
      ys.push_back(std::log(errors[i]));
    }
  if (xs.size() < 2)
    throw DomainError("fit_decay_rate: fewer than two points in the geometric regime");

  const double n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i)
  {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {-slope, (sy - slope * sx) / n, xs.size()};
}

} // namespace logmq
