#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>

#include "logmq/matrix_io.hpp"

using namespace logmq;

namespace {

SpdMatrix parse(const std::string& text)
{
  std::istringstream in(text);
  return parse_matrix_market(in);
}

std::size_t parse_error_line(const std::string& text)
{
  try
  {
    parse(text);
  }
  catch (const ParseError& e)
  {
    return e.line();
  }
  ADD_FAILURE() << "no parse error for:\n" << text;
  return 0;
}

const std::string header = "%%MatrixMarket matrix coordinate real symmetric\n";

} // namespace

TEST(ParseMatrixMarket, Diagonal)
{
  const auto a = parse(header + "2 2 2\n1 1 2.0\n2 2 3.0\n");
  Matrix expect(2, 2);
  expect << 2, 0, 0, 3;
  EXPECT_TRUE(a.is_sparse());
  EXPECT_EQ(a.to_dense(), expect);
}

TEST(ParseMatrixMarket, MirrorsLowerTriangle)
{
  const auto a = parse(header + "% a comment\n\n2 2 3\n1 1 2.0\n2 1 1.0\n2 2 3.0\n");
  Matrix expect(2, 2);
  expect << 2, 1, 1, 3;
  EXPECT_EQ(a.to_dense(), expect);
}

TEST(ParseMatrixMarket, SumsDuplicates)
{
  const auto a = parse(header + "2 2 3\n1 1 1.5\n1 1 0.5\n2 2 3\n");
  EXPECT_EQ(a.to_dense()(0, 0), 2.0);
}

TEST(ParseMatrixMarket, GeneralWithSymmetricContent)
{
  const auto a = parse("%%MatrixMarket matrix coordinate real general\n2 2 4\n1 1 4\n1 2 -1\n2 1 -1\n2 2 4\n");
  EXPECT_EQ(a.to_dense()(0, 1), -1.0);
  EXPECT_THROW(parse("%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 4\n1 2 -1\n2 2 4\n"),
               ParseError);
}

TEST(ParseMatrixMarket, IntegerFieldAccepted)
{
  const auto a = parse("%%MatrixMarket matrix coordinate integer symmetric\n1 1 1\n1 1 7\n");
  EXPECT_EQ(a.to_dense()(0, 0), 7.0);
}

TEST(ParseMatrixMarket, ErrorsCarryLineNumbers)
{
  EXPECT_EQ(parse_error_line("%%MatrixMarket matrix coordinate complex symmetric\n1 1 1\n1 1 1 0\n"), 1u);
  EXPECT_EQ(parse_error_line("%%MatrixMarket matrix coordinate pattern symmetric\n1 1 1\n1 1\n"), 1u);
  EXPECT_EQ(parse_error_line("%%MatrixMarket matrix array real symmetric\n1 1\n1\n"), 1u);
  EXPECT_EQ(parse_error_line("%MatrixMarket nonsense\n"), 1u);
  EXPECT_EQ(parse_error_line(header + "% c\n2 3 1\n1 1 1\n"), 3u);
  EXPECT_EQ(parse_error_line(header + "2 2 2\n1 1 1\n3 1 1\n"), 4u);
  EXPECT_EQ(parse_error_line(header + "2 2 2\n1 1 1\n2 2 x\n"), 4u);
  EXPECT_EQ(parse_error_line(header + "2 2 2\n1 1 1\n2 2\n"), 4u);
  EXPECT_EQ(parse_error_line(header + "2 2 3\n1 1 1\n2 2 1\n"), 4u);
}

TEST(ParseMatrixMarket, NonpositiveDiagonalIsADefinitenessError)
{
  EXPECT_THROW(parse(header + "2 2 2\n1 1 -1\n2 2 1\n"), DefinitenessError);
}

TEST(WriteMatrixMarket, RoundTripIsBitExact)
{
  for (const SpdMatrix& a : {gen_tridiag(17, -1, 2, -1), gen_random_spd(9, 1e5, 4), gen_tridiag(5, 0.1, 1.0 / 3.0, 0.1)})
  {
    std::ostringstream out;
    write_matrix_market(out, a);
    const auto b = parse(out.str());
    EXPECT_EQ(a.to_dense(), b.to_dense());
  }
  const std::vector<double> s{1e-2, std::numbers::pi, 1e2};
  std::ostringstream out;
  write_matrix_market(out, gen_diag_spd(s));
  EXPECT_EQ(parse(out.str()).to_dense().diagonal()[1], std::numbers::pi);
}

TEST(WriteMatrixMarket, DenseLowerTriangleFormat)
{
  Matrix m(2, 2);
  m << 0.5, -0.25, -0.25, 0.0;
  std::ostringstream out;
  write_matrix_market(out, m);
  EXPECT_EQ(out.str(), "%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 0.5\n2 1 -0.25\n");
}

TEST(GenTridiag, Examples)
{
  EXPECT_EQ(gen_tridiag(1, -1, 2, -1).to_dense(), Matrix::Constant(1, 1, 2.0));
  const Matrix t3 = gen_tridiag(3, -1, 2, -1).to_dense();
  Eigen::SelfAdjointEigenSolver<Matrix> es(t3);
  EXPECT_NEAR(es.eigenvalues()[0], 2.0 - std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(es.eigenvalues()[1], 2.0, 1e-14);
  EXPECT_NEAR(es.eigenvalues()[2], 2.0 + std::sqrt(2.0), 1e-14);
  EXPECT_THROW(gen_tridiag(4, -1, 2, -0.5), DomainError);
  EXPECT_THROW(gen_tridiag(0, -1, 2, -1), DomainError);
}

TEST(GenTridiag, SpectrumMatchesClosedForm)
{
  for (int n : {10, 57, 200})
  {
    Eigen::SelfAdjointEigenSolver<Matrix> es(gen_tridiag(n, -1, 2, -1).to_dense(), Eigen::EigenvaluesOnly);
    for (int k = 1; k <= n; ++k)
      EXPECT_NEAR(es.eigenvalues()[k - 1], 2.0 - 2.0 * std::cos(k * std::numbers::pi / (n + 1)), 1e-10);
  }
}

TEST(GenDiag, Examples)
{
  const std::vector<double> one{1.0};
  EXPECT_EQ(gen_diag_spd(one).to_dense(), Matrix::Identity(1, 1));
  const std::vector<double> bal{1e-2, 1e2};
  const Matrix d = gen_diag_spd(bal).to_dense();
  EXPECT_EQ(d(0, 0) * d(1, 1), 1.0);
  const auto s = log_spaced(1e-3, 1e3, 50);
  EXPECT_EQ(s.front(), 1e-3);
  EXPECT_EQ(s.back(), 1e3);
  const std::vector<double> bad{1.0, 0.0};
  EXPECT_THROW(gen_diag_spd(bad), DomainError);
}

TEST(GenRandomSpd, ConditionNumberAndDeterminism)
{
  EXPECT_EQ(gen_random_spd(6, 1.0, 9).to_dense(), Matrix::Identity(6, 6));
  for (double k : {10.0, 1e3, 1e6})
  {
    const auto a = gen_random_spd(30, k, 17);
    Eigen::SelfAdjointEigenSolver<Matrix> es(a.to_dense(), Eigen::EigenvaluesOnly);
    const double measured = es.eigenvalues()[29] / es.eigenvalues()[0];
    EXPECT_NEAR(measured / k, 1.0, 1e-8);
  }
  EXPECT_EQ(gen_random_spd(12, 50.0, 3), gen_random_spd(12, 50.0, 3));
  EXPECT_FALSE(gen_random_spd(12, 50.0, 3) == gen_random_spd(12, 50.0, 4));
  EXPECT_THROW(gen_random_spd(5, 0.5, 1), DomainError);
}

TEST(Catalog, KnownEntries)
{
  const auto fv3 = find_catalog_entry("fv3");
  ASSERT_TRUE(fv3.has_value());
  EXPECT_EQ(fv3->n, 9801);
  EXPECT_EQ(fv3->kappa, 2.0e3);
  EXPECT_EQ(find_catalog_entry("gyro_m")->kappa, 1.2e6);
  EXPECT_FALSE(find_catalog_entry("nope").has_value());
}
