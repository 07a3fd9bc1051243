#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>

#include "logmq/errors.hpp"

namespace logmq {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

inline constexpr double symmetry_tolerance = 1e-14;

// Symmetric matrix with positive diagonal, in dense or sparse storage. Both
// triangles are stored. Positive definiteness is not checked on construction;
// certify_definite() does that by factorization.
class SpdMatrix
{
public:
  static SpdMatrix from_dense(Matrix a)
  {
    if (a.rows() != a.cols())
      throw DomainError("SpdMatrix: matrix is not square");
    const double scale = a.cwiseAbs().maxCoeff();
    const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
    if (asym > symmetry_tolerance * scale)
      throw DomainError("SpdMatrix: matrix is not symmetric (max |a_ij - a_ji| = " +
                        std::to_string(asym) + ")");
    check_diagonal(a.diagonal());
    return SpdMatrix(std::move(a));
  }

  static SpdMatrix from_sparse(SparseMatrix a)
  {
    if (a.rows() != a.cols())
      throw DomainError("SpdMatrix: matrix is not square");
    a.makeCompressed();
    const SparseMatrix at = a.transpose();
    double scale = 0.0;
    for (int k = 0; k < a.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(a, k); it; ++it)
        scale = std::max(scale, std::abs(it.value()));
    const SparseMatrix diff = a - at;
    for (int k = 0; k < diff.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(diff, k); it; ++it)
        if (std::abs(it.value()) > symmetry_tolerance * scale)
          throw DomainError("SpdMatrix: matrix is not symmetric at (" + std::to_string(it.row() + 1) +
                            ", " + std::to_string(it.col() + 1) + ")");
    check_diagonal(Vector(a.diagonal()));
    return SpdMatrix(std::move(a));
  }

  Eigen::Index n() const noexcept
  {
    return std::visit([](const auto& m) { return m.rows(); }, storage_);
  }

  bool is_sparse() const noexcept { return std::holds_alternative<SparseMatrix>(storage_); }

  const SparseMatrix* sparse() const noexcept { return std::get_if<SparseMatrix>(&storage_); }
  const Matrix* dense() const noexcept { return std::get_if<Matrix>(&storage_); }

  Matrix to_dense() const
  {
    if (const auto* d = dense())
      return *d;
    return Matrix(*sparse());
  }

  // A * x
  Matrix apply(const Matrix& x) const
  {
    if (const auto* d = dense())
      return (*d) * x;
    return (*sparse()) * x;
  }

  // Throws DefinitenessError unless a Cholesky-type factorization succeeds
  // with a strictly positive pivot sequence.
  void certify_definite() const;

  friend bool operator==(const SpdMatrix& a, const SpdMatrix& b)
  {
    if (a.n() != b.n())
      return false;
    return a.to_dense() == b.to_dense();
  }

private:
  explicit SpdMatrix(Matrix a)
      : storage_(std::move(a))
  {
  }
  explicit SpdMatrix(SparseMatrix a)
      : storage_(std::move(a))
  {
  }

  static void check_diagonal(const Vector& d)
  {
    for (Eigen::Index i = 0; i < d.size(); ++i)
      if (!(d[i] > 0.0))
        throw DefinitenessError("SpdMatrix: diagonal entry " + std::to_string(i + 1) +
                                " is not positive");
  }

  std::variant<Matrix, SparseMatrix> storage_;
};

// Factorization of (alpha * A + beta * I), reusable across right-hand sides.
// Dense operands use LLT, sparse operands a simplicial LDL^T with
// fill-reducing ordering.
class ShiftedFactorization
{
public:
  ShiftedFactorization(const SpdMatrix& a, double alpha, double beta)
      : alpha_(alpha)
      , beta_(beta)
  {
    if (const auto* d = a.dense())
    {
      Matrix m = alpha * (*d);
      m.diagonal().array() += beta;
      auto& llt = solver_.emplace<Eigen::LLT<Matrix>>(m);
      if (llt.info() != Eigen::Success)
        fail();
    }
    else
    {
      const SparseMatrix& s = *a.sparse();
      SparseMatrix id(s.rows(), s.cols());
      id.setIdentity();
      SparseMatrix m = alpha * s + beta * id;
      auto& ldlt = solver_.emplace<Eigen::SimplicialLDLT<SparseMatrix>>();
      ldlt.compute(m);
      if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0.0))
        fail();
    }
  }

  Matrix solve(const Matrix& rhs) const
  {
    return std::visit(
        [&](const auto& s) -> Matrix {
          if constexpr (std::is_same_v<std::decay_t<decltype(s)>, std::monostate>)
            throw DefinitenessError("solve on an empty factorization");
          else
            return s.solve(rhs);
        },
        solver_);
  }

private:
  [[noreturn]] void fail() const
  {
    std::ostringstream os;
    os.precision(17);
    os << "factorization of (alpha*A + beta*I) broke down, alpha=" << alpha_ << ", beta=" << beta_;
    throw DefinitenessError(os.str());
  }

  double alpha_;
  double beta_;
  std::variant<std::monostate, Eigen::LLT<Matrix>, Eigen::SimplicialLDLT<SparseMatrix>> solver_;
};

inline void SpdMatrix::certify_definite() const
{
  try
  {
    ShiftedFactorization(*this, 1.0, 0.0);
  }
  catch (const DefinitenessError&)
  {
    throw DefinitenessError("matrix is not positive definite (Cholesky pivot <= 0)");
  }
}

} // namespace logmq
