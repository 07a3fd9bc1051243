#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include "logmq/matrix_io.hpp"
#include "logmq/spectral.hpp"

using namespace logmq;

namespace {

std::shared_ptr<const SpdMatrix> shared(SpdMatrix a) { return std::make_shared<const SpdMatrix>(std::move(a)); }

double tridiag_eig(int k, int n)
{
  const double s = std::sin(k * std::numbers::pi / (2.0 * (n + 1)));
  return 4.0 * s * s;
}

} // namespace

TEST(SpdMatrix, RejectsAsymmetryAndBadDiagonal)
{
  Matrix a(2, 2);
  a << 2, 1, 0, 2;
  EXPECT_THROW(SpdMatrix::from_dense(a), DomainError);
  Matrix b(2, 2);
  b << 0, 1, 1, 2;
  EXPECT_THROW(SpdMatrix::from_dense(b), DefinitenessError);
  EXPECT_THROW(SpdMatrix::from_dense(Matrix(2, 3)), DomainError);
}

TEST(SpdMatrix, CertifyDefinite)
{
  Matrix indef(2, 2);
  indef << 1, 2, 2, 1;
  const auto a = SpdMatrix::from_dense(indef);
  EXPECT_THROW(a.certify_definite(), DefinitenessError);
  EXPECT_NO_THROW(gen_tridiag(10, -1, 2, -1).certify_definite());
}

TEST(ExtremeEigenvalues, Diagonal)
{
  const std::vector<double> s{1.0, 2.0, 5.0};
  const auto a = gen_diag_spd(s);
  for (EigenMode mode : {EigenMode::exact, EigenMode::iterative})
  {
    const auto e = extreme_eigenvalues(a, mode);
    EXPECT_NEAR(e.lambda_min, 1.0, 1e-8);
    EXPECT_NEAR(e.lambda_max, 5.0, 5e-8);
  }
}

TEST(ExtremeEigenvalues, Identity)
{
  const auto a = SpdMatrix::from_dense(Matrix::Identity(7, 7));
  const auto e = extreme_eigenvalues(a);
  EXPECT_DOUBLE_EQ(e.lambda_min, 1.0);
  EXPECT_DOUBLE_EQ(e.lambda_max, 1.0);
}

TEST(ExtremeEigenvalues, TridiagonalClosedForm)
{
  const int n = 200;
  const auto a = gen_tridiag(n, -1, 2, -1);
  const double lmin = tridiag_eig(1, n);
  const double lmax = tridiag_eig(n, n);
  const auto exact = extreme_eigenvalues(a, EigenMode::exact);
  EXPECT_NEAR(exact.lambda_min / lmin, 1.0, 1e-8);
  EXPECT_NEAR(exact.lambda_max / lmax, 1.0, 1e-8);
  const auto iter = extreme_eigenvalues(a, EigenMode::iterative);
  EXPECT_NEAR(iter.lambda_min / lmin, 1.0, 1e-4);
  EXPECT_NEAR(iter.lambda_max / lmax, 1.0, 1e-4);
  EXPECT_NEAR(lmax / lmin, 16373.241898741244, 1e-6);
}

TEST(ExtremeEigenvalues, IndefiniteIsRejected)
{
  Matrix m(3, 3);
  m << 1, 2, 0, 2, 1, 0, 0, 0, 1;
  const auto a = SpdMatrix::from_dense(m);
  EXPECT_THROW(extreme_eigenvalues(a, EigenMode::exact), DefinitenessError);
  EXPECT_THROW(extreme_eigenvalues(a, EigenMode::iterative), DefinitenessError);
}

TEST(ExtremeEigenvalues, LanczosStepCapCarriesBracket)
{
  const auto spectrum = log_spaced(1.0, 1e3, 60);
  const Matrix d = Vector(Eigen::Map<const Vector>(spectrum.data(), 60)).asDiagonal();
  detail::LanczosSettings settings;
  settings.max_steps = 3;
  try
  {
    detail::lanczos_largest([&](const Vector& v) -> Vector { return d * v; }, 60, settings);
    FAIL() << "expected a convergence error";
  }
  catch (const ConvergenceErrorWith<std::pair<double, double>>& e)
  {
    EXPECT_LT(e.best().first, e.best().second);
    EXPECT_LE(e.best().second, 2e3);
  }
}

TEST(Scale, Examples)
{
  const auto id = shared(SpdMatrix::from_dense(Matrix::Identity(3, 3)));
  const auto p1 = scale(id, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(p1.c(), 1.0);
  EXPECT_DOUBLE_EQ(p1.kappa(), 1.0);

  const auto p2 = scale(id, 1e-2, 1e2);
  EXPECT_NEAR(p2.c(), 1.0, 1e-15);

  const auto p3 = scale(id, 1.0, 1e4);
  EXPECT_NEAR(p3.c(), 1e-2, 1e-16);
  EXPECT_NEAR(p3.scaled_min(), 1e-2, 1e-16);
  EXPECT_NEAR(p3.scaled_max(), 1e2, 1e-12);
  EXPECT_NEAR(p3.scaled_min() * p3.scaled_max(), 1.0, 1e-14);
}

TEST(Scale, BalancesAwkwardExtremes)
{
  const auto id = shared(SpdMatrix::from_dense(Matrix::Identity(2, 2)));
  for (auto [lo, hi] : {std::pair{3.7e-5, 91.0}, std::pair{2.0, 2.0e9}, std::pair{1e-8, 1e-3}})
  {
    const auto p = scale(id, lo, hi);
    EXPECT_NEAR(p.c() * std::sqrt(lo * hi), 1.0, 1e-14);
    EXPECT_NEAR(p.scaled_max() / std::sqrt(p.kappa()), 1.0, 1e-12);
    EXPECT_NEAR(p.scaled_min() * std::sqrt(p.kappa()), 1.0, 1e-12);
  }
}

TEST(Scale, RejectsBadExtremes)
{
  const auto id = shared(SpdMatrix::from_dense(Matrix::Identity(2, 2)));
  EXPECT_THROW(scale(id, 0.0, 1.0), DomainError);
  EXPECT_THROW(scale(id, -1.0, 1.0), DomainError);
  EXPECT_THROW(scale(id, 2.0, 1.0), DomainError);
}

TEST(PreconditionConstants, UnitShiftAtTenThousand)
{
  const auto pc = precondition_constants(1e4, 1.0);
  EXPECT_NEAR(pc.kappa_ap, 100.0, 1e-10);
  EXPECT_NEAR(pc.kappa_p, 100.0, 1e-10);
  EXPECT_NEAR(pc.c_prime, 10.1, 1e-13);
  EXPECT_EQ(pc.c_prime, pc.c_dprime);
}

TEST(PreconditionConstants, ZeroShift)
{
  for (double k : {2.0, 1e3, 1e9})
  {
    const auto pc = precondition_constants(k, 0.0);
    EXPECT_NEAR(pc.kappa_ap, 1.0, 1e-14);
    EXPECT_NEAR(pc.kappa_p / k, 1.0, 1e-13);
  }
}

TEST(PreconditionConstants, LargeShiftLimits)
{
  const auto pc = precondition_constants(1e4, 1e8);
  EXPECT_NEAR(pc.kappa_ap / 1e4, 1.0, 1e-5);
  EXPECT_NEAR(pc.kappa_p, 1.0, 1e-5);
  EXPECT_THROW(precondition_constants(1e4, -0.1), DomainError);
}

TEST(PreconditionConstants, MonotoneInShift)
{
  for (double k : {1.5, 1e2, 1e6, 1e12})
  {
    double prev_ap = 0.0;
    double prev_p = 1e300;
    for (double s = 0.0; s <= 20.0; s += 0.05)
    {
      const auto pc = precondition_constants(k, s);
      EXPECT_GE(pc.kappa_ap, prev_ap);
      EXPECT_LE(pc.kappa_p, prev_p);
      prev_ap = pc.kappa_ap;
      prev_p = pc.kappa_p;
    }
  }
}

TEST(PreconditionConstants, UnitShiftMinimisesTheWorseConditionNumber)
{
  // Log-uniform kappa samples; grid of s with spacing 0.01 contains s = 1.
  for (double e = 0.05; e <= 12.0; e += 0.37)
  {
    const double k = std::pow(10.0, e);
    double best_s = -1.0;
    double best = 1e300;
    for (int i = 0; i <= 500; ++i)
    {
      const double s = 0.01 * i;
      const auto pc = precondition_constants(k, s);
      const double worst = std::max(pc.kappa_ap, pc.kappa_p);
      if (worst < best)
      {
        best = worst;
        best_s = s;
      }
    }
    EXPECT_NEAR(best_s, 1.0, 1e-12) << "kappa=" << k;
    const auto pc = precondition_constants(k, 1.0);
    EXPECT_NEAR(pc.kappa_ap * pc.kappa_p / k, 1.0, 1e-10);
  }
}

TEST(PreconditionConstants, BothOperandsBalanced)
{
  // c' A~ P~_1 has extremes c' sqrt(k)/(sqrt(k)+1) and c' (1/sqrt(k))/(1/sqrt(k)+1);
  // c'' P~_1 has c''/(sqrt(k)+1) and c''/(1/sqrt(k)+1). Both products are 1.
  for (double k : {3.0, 1e4, 1e10})
  {
    const auto pc = precondition_constants(k, 1.0);
    const double hi = std::sqrt(k);
    const double lo = 1.0 / hi;
    EXPECT_NEAR(pc.c_prime * hi / (hi + 1) * pc.c_prime * lo / (lo + 1), 1.0, 1e-12);
    EXPECT_NEAR(pc.c_dprime / (hi + 1) * pc.c_dprime / (lo + 1), 1.0, 1e-12);
  }
}

TEST(BalancedShift, IsOne)
{
  EXPECT_NEAR(solve_balanced_shift(1e4), 1.0, 1e-10);
  EXPECT_NEAR(solve_balanced_shift(2.0), 1.0, 1e-10);
  EXPECT_NEAR(solve_balanced_shift(1e10), 1.0, 1e-8);
  EXPECT_THROW(solve_balanced_shift(1.0), DomainError);
}
