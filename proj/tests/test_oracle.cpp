#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "logmq/matrix_io.hpp"
#include "logmq/oracle.hpp"

using namespace logmq;

TEST(EigLogm, Diagonal)
{
  const std::vector<double> s{0.25, 3.0, 1e5};
  const auto ref = eig_logm(gen_diag_spd(s));
  EXPECT_EQ(ref.source, ReferenceSource::closed_form);
  for (int i = 0; i < 3; ++i)
    EXPECT_NEAR(ref.value(i, i), std::log(s[static_cast<std::size_t>(i)]),
                1e-15 * std::abs(std::log(s[static_cast<std::size_t>(i)])));
  EXPECT_EQ(ref.value(0, 1), 0.0);
}

TEST(EigLogm, TwoByTwo)
{
  Matrix a(2, 2);
  a << 2, 1, 1, 2;
  const auto ref = eig_logm(a);
  const double h = std::log(3.0) / 2.0; // 0.5493061443340548...
  EXPECT_NEAR(h, 0.54930614433405485, 1e-16);
  EXPECT_LE((ref.value - Matrix::Constant(2, 2, h)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(EigLogm, ToeplitzTridiagonalClosedForm)
{
  const auto ref = eig_logm(gen_tridiag(3, -1, 2, -1));
  EXPECT_EQ(ref.source, ReferenceSource::closed_form);
  // Independent: eigendecomposition of the 3x3, eigenvalues 2 -+ sqrt 2 and 2.
  const Matrix a = gen_tridiag(3, -1, 2, -1).to_dense();
  const Matrix viaeig = eig_function(a, [](double x) { return std::log(x); });
  EXPECT_LE((ref.value - viaeig).cwiseAbs().maxCoeff(), 1e-15);
  // Positive off-diagonal branch.
  const Matrix b = gen_tridiag(6, 0.3, 1.0, 0.3).to_dense();
  EXPECT_LE((eig_logm(b).value - eig_function(b, [](double x) { return std::log(x); })).cwiseAbs().maxCoeff(),
            1e-14);
}

TEST(EigLogm, ExpRoundTrip)
{
  for (std::uint64_t seed : {1u, 2u, 3u, 4u})
  {
    const Matrix a = gen_random_spd(30, 1e4, seed).to_dense();
    const Matrix back = eig_expm(eig_logm(a).value);
    EXPECT_LE(spectral_norm(back - a), 1e-12 * spectral_norm(a));
  }
}

TEST(EigLogm, ScalingShiftsByLogC)
{
  // The two eigensolves each carry an error of order n eps kappa, so the
  // 1e-12 check is made at moderate conditioning.
  for (std::uint64_t seed : {5u, 6u})
  {
    const Matrix a = gen_random_spd(25, 1e3, seed).to_dense();
    const double c = 0.0137;
    const Matrix d = eig_logm(Matrix(c * a)).value - eig_logm(a).value;
    EXPECT_LE(spectral_norm(d - std::log(c) * Matrix::Identity(25, 25)), 1e-12);
  }
}

TEST(EigLogm, RejectsIndefinite)
{
  Matrix a(2, 2);
  a << 1, 2, 2, 1;
  EXPECT_THROW(eig_logm(a), DefinitenessError);
}

TEST(SpectralNorm, Examples)
{
  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 1, -3, 2;
  EXPECT_DOUBLE_EQ(spectral_norm(d), 3.0);
  EXPECT_EQ(spectral_norm(Matrix::Zero(4, 4)), 0.0);
  Matrix asym(2, 2);
  asym << 1, 1, 0, 1;
  EXPECT_THROW(spectral_norm(asym), DomainError);
}

TEST(SpectralNorm, RandomSymmetric)
{
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  Matrix s(30, 30);
  for (Eigen::Index i = 0; i < s.size(); ++i)
    s.data()[i] = g(rng);
  s = (s + s.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
  const double expect = std::max(std::abs(es.eigenvalues()[0]), std::abs(es.eigenvalues()[29]));
  EXPECT_NEAR(spectral_norm(s) / expect, 1.0, 1e-10);
}

TEST(ScalarQuadrature, UnitLambdaIsExact)
{
  EXPECT_EQ(scalar_quadrature_error(1.0, gauss_legendre_rule(5)), 0.0);
  EXPECT_EQ(scalar_quadrature_error(1.0, de_rule(9, 1e-12, 1e4)), 0.0);
  EXPECT_THROW(scalar_quadrature_error(0.0, gauss_legendre_rule(5)), DomainError);
}

TEST(ScalarQuadrature, GlRateForLambdaFour)
{
  std::vector<double> ms, errs;
  for (int m = 1; m <= 20; ++m)
  {
    ms.push_back(m);
    errs.push_back(scalar_quadrature_error(4.0, gauss_legendre_rule(static_cast<std::size_t>(m))));
  }
  const auto fit = fit_decay_rate(ms, errs);
  EXPECT_GE(fit.points, 3u);
  EXPECT_NEAR(fit.rate / std::log(9.0), 1.0, 0.25);
}

TEST(ScalarQuadrature, ReciprocalLambdaSameRate)
{
  for (double l : {4.0, 50.0})
  {
    std::vector<double> ms, e1, e2;
    for (int m = 2; m <= 60; m += 2)
    {
      const auto r = gauss_legendre_rule(static_cast<std::size_t>(m));
      ms.push_back(m);
      e1.push_back(scalar_quadrature_error(l, r));
      e2.push_back(scalar_quadrature_error(1.0 / l, r));
    }
    EXPECT_NEAR(fit_decay_rate(ms, e1).rate / fit_decay_rate(ms, e2).rate, 1.0, 0.05);
  }
}

TEST(FitDecayRate, ExactGeometricSequence)
{
  std::vector<double> ms, errs;
  for (int m = 0; m < 40; ++m)
  {
    ms.push_back(m);
    errs.push_back(std::max(3.0 * std::exp(-0.7 * m), 1e-16));
  }
  const auto fit = fit_decay_rate(ms, errs);
  EXPECT_NEAR(fit.rate, 0.7, 1e-12);
  EXPECT_NEAR(fit.intercept, std::log(3.0), 1e-10);
  EXPECT_THROW(fit_decay_rate(std::vector<double>{1.0}, std::vector<double>{1e-5}), DomainError);
}
