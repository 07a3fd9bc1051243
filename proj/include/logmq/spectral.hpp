#pragma once

// Extreme eigenvalues, the balanced scaling A~ = cA with
// c = 1/sqrt(lambda_max * lambda_min), and the constants of the
// preconditioner P~_s = (A~ + sI)^{-1}.

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "logmq/errors.hpp"
#include "logmq/spd_matrix.hpp"

namespace logmq {

struct ExtremeEigenvalues
{
  double lambda_min = 0.0;
  double lambda_max = 0.0;
};

enum class EigenMode
{
  exact,     // dense symmetric eigensolve, n <= exact_eigen_max_n
  iterative, // Lanczos on A and on A^{-1}
};

inline constexpr Eigen::Index exact_eigen_max_n = 2048;

namespace detail {

struct LanczosSettings
{
  int max_steps = 600;
  double tolerance = 1e-10; // relative residual bound on the extreme Ritz value
  std::uint64_t seed = 0x5eed;
};

// Largest eigenvalue of the symmetric operator `op` by Lanczos with full
// reorthogonalization. Returns the Ritz value; throws with a bracket
// [theta - residual, theta + residual] when the step cap is hit.
template <typename Op>
double lanczos_largest(Op&& op, Eigen::Index n, const LanczosSettings& settings)
{
  std::mt19937_64 rng(settings.seed);
  std::uniform_real_distribution<double> unif(0.5, 1.5);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i)
    v[i] = unif(rng);
  v.normalize();

  const Eigen::Index cap = std::min<Eigen::Index>(n, settings.max_steps);
  Matrix basis(n, cap);
  std::vector<double> alpha;
  std::vector<double> beta;
  double theta = 0.0;
  double residual = std::numeric_limits<double>::infinity();

  for (Eigen::Index j = 0; j < cap; ++j)
  {
    basis.col(j) = v;
    Vector w = op(v);
    alpha.push_back(v.dot(w));
    // Two passes of classical Gram-Schmidt against the whole basis.
    for (int pass = 0; pass < 2; ++pass)
      w -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).transpose() * w);
    const double b = w.norm();

    const auto k = static_cast<Eigen::Index>(alpha.size());
    Matrix t = Matrix::Zero(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
    {
      t(i, i) = alpha[static_cast<std::size_t>(i)];
      if (i + 1 < k)
        t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(t);
    theta = es.eigenvalues()[k - 1];
    residual = std::abs(b * es.eigenvectors()(k - 1, k - 1));

    if (residual <= settings.tolerance * std::abs(theta) || b <= 1e-300 || j + 1 == n)
      return theta;
    beta.push_back(b);
    v = w / b;
  }
  throw ConvergenceErrorWith<std::pair<double, double>>(
      "Lanczos did not converge within " + std::to_string(cap) + " steps",
      {theta - residual, theta + residual});
}

} // namespace detail

inline ExtremeEigenvalues extreme_eigenvalues(const SpdMatrix& a, EigenMode mode)
{
  if (mode == EigenMode::exact)
  {
    if (a.n() > exact_eigen_max_n)
      throw DomainError("extreme_eigenvalues: exact mode is limited to n <= " +
                        std::to_string(exact_eigen_max_n));
    Eigen::SelfAdjointEigenSolver<Matrix> es(a.to_dense(), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
      throw ConvergenceError("extreme_eigenvalues: symmetric eigensolve failed");
    const auto& ev = es.eigenvalues();
    if (!(ev[0] > 0.0))
      throw DefinitenessError("matrix is not positive definite (smallest eigenvalue " +
                              std::to_string(ev[0]) + ")");
    return {ev[0], ev[ev.size() - 1]};
  }

  // The factorization both certifies definiteness and applies A^{-1}.
  const ShiftedFactorization inverse(a, 1.0, 0.0);
  const detail::LanczosSettings settings;
  const double lmax = detail::lanczos_largest([&](const Vector& v) -> Vector { return a.apply(v); },
                                              a.n(), settings);
  const double inv_max = detail::lanczos_largest(
      [&](const Vector& v) -> Vector { return inverse.solve(v); }, a.n(), settings);
  return {1.0 / inv_max, lmax};
}

// Default mode: exact when the dense eigensolve is permitted.
inline ExtremeEigenvalues extreme_eigenvalues(const SpdMatrix& a)
{
  return extreme_eigenvalues(a, a.n() <= exact_eigen_max_n ? EigenMode::exact : EigenMode::iterative);
}

// A~ = cA, held implicitly as (c, A) together with the extreme eigenvalues of A.
class ScaledProblem
{
public:
  ScaledProblem(std::shared_ptr<const SpdMatrix> a, double lambda_min, double lambda_max)
      : a_(std::move(a))
      , lambda_min_(lambda_min)
      , lambda_max_(lambda_max)
  {
    if (!a_)
      throw DomainError("ScaledProblem: null matrix");
    if (!(lambda_min > 0.0) || !(lambda_max > 0.0))
      throw DomainError("scale: extreme eigenvalues must be positive");
    if (lambda_min > lambda_max)
      throw DomainError("scale: lambda_min exceeds lambda_max");
    c_ = 1.0 / (std::sqrt(lambda_max) * std::sqrt(lambda_min));
    kappa_ = lambda_max / lambda_min;
  }

  const SpdMatrix& matrix() const noexcept { return *a_; }
  const std::shared_ptr<const SpdMatrix>& matrix_ptr() const noexcept { return a_; }
  Eigen::Index n() const noexcept { return a_->n(); }

  double lambda_min() const noexcept { return lambda_min_; }
  double lambda_max() const noexcept { return lambda_max_; }
  double c() const noexcept { return c_; }
  double kappa() const noexcept { return kappa_; }

  // Extremes of A~; their product is 1.
  double scaled_min() const noexcept { return c_ * lambda_min_; }
  double scaled_max() const noexcept { return c_ * lambda_max_; }

  // A~ * x
  Matrix apply_scaled(const Matrix& x) const { return c_ * a_->apply(x); }

private:
  std::shared_ptr<const SpdMatrix> a_;
  double lambda_min_;
  double lambda_max_;
  double c_ = 1.0;
  double kappa_ = 1.0;
};

inline ScaledProblem scale(std::shared_ptr<const SpdMatrix> a, double lambda_min, double lambda_max)
{
  return ScaledProblem(std::move(a), lambda_min, lambda_max);
}

// Estimates the extremes and builds the scaled problem in one step.
inline ScaledProblem scale(std::shared_ptr<const SpdMatrix> a, EigenMode mode)
{
  const auto ext = extreme_eigenvalues(*a, mode);
  return ScaledProblem(std::move(a), ext.lambda_min, ext.lambda_max);
}

inline ScaledProblem scale(std::shared_ptr<const SpdMatrix> a)
{
  const auto ext = extreme_eigenvalues(*a);
  return ScaledProblem(std::move(a), ext.lambda_min, ext.lambda_max);
}

struct PreconditionConstants
{
  double s = 1.0;
  double c_prime = 1.0;  // scales A~ P~_s
  double c_dprime = 1.0; // scales P~_s
  double kappa_ap = 1.0; // kappa(A~ P~_s)
  double kappa_p = 1.0;  // kappa(P~_s)
};

// With c*lambda_max = sqrt(kappa) and c*lambda_min = 1/sqrt(kappa):
//   kappa(A~P~_s) = sqrt(kappa) (1/sqrt(kappa) + s) / ((1/sqrt(kappa)) (sqrt(kappa) + s))
//   kappa(P~_s)   = (sqrt(kappa) + s) / (1/sqrt(kappa) + s)
//   c' = c''      = sqrt((sqrt(kappa) + s)(1/sqrt(kappa) + s)).
inline PreconditionConstants precondition_constants(double kappa, double s)
{
  if (!(kappa >= 1.0))
    throw DomainError("precondition_constants: kappa must be >= 1");
  if (!(s >= 0.0))
    throw DomainError("precondition_constants: shift must be nonnegative");
  const double hi = std::sqrt(kappa);
  const double lo = 1.0 / hi;
  PreconditionConstants pc;
  pc.s = s;
  pc.kappa_ap = hi * (lo + s) / (lo * (hi + s));
  pc.kappa_p = (hi + s) / (lo + s);
  pc.c_prime = std::sqrt((hi + s) * (lo + s));
  pc.c_dprime = pc.c_prime;
  return pc;
}

// Solves kappa(A~P~_s) = kappa(P~_s) for s >= 0 by bisection. The difference
// is increasing in s, negative at s = 0. Production code uses s = 1 directly;
// this exists to check that the balanced shift is 1 for every kappa.
inline double solve_balanced_shift(double kappa)
{
  if (!(kappa > 1.0))
    throw DomainError("solve_balanced_shift: kappa must exceed 1");
  auto diff = [kappa](double s) {
    const auto pc = precondition_constants(kappa, s);
    return pc.kappa_ap - pc.kappa_p;
  };
  double lo = 0.0;
  double hi = 1.0;
  while (diff(hi) < 0.0)
    hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it)
  {
    const double mid = 0.5 * (lo + hi);
    (diff(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

} // namespace logmq
