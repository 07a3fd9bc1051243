#pragma once

// Matrix Market coordinate I/O and synthetic SPD test matrices.

#include <Eigen/QR>

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "logmq/errors.hpp"
#include "logmq/spd_matrix.hpp"

namespace logmq {

struct MatrixSource
{
  enum class Origin
  {
    file,
    generator,
  };

  Origin origin = Origin::file;
  std::string location; // path, or generator name
  std::string name;
  std::optional<double> expected_kappa; // metadata only, never used as input
};

inline constexpr std::array<std::string_view, 3> generator_names = {"tridiag", "diag", "random"};

struct CatalogEntry
{
  std::string_view name;
  Eigen::Index n;
  double kappa;
};

// SuiteSparse matrices of the published benchmark, with their reported sizes
// and condition numbers (two significant digits).
inline constexpr std::array<CatalogEntry, 9> suitesparse_catalog = {{
    {"Kuu", 7102, 3.4e4},
    {"fv3", 9801, 2.0e3},
    {"bundle1", 10581, 1.0e3},
    {"crystm02", 13965, 2.5e2},
    {"Pres_Poisson", 14822, 3.5e5},
    {"Dubcova1", 16129, 6.8e4},
    {"gyro_m", 17361, 1.2e6},
    {"bodyy5", 18589, 7.9e3},
    {"bodyy6", 19366, 7.7e4},
}};

inline std::optional<CatalogEntry> find_catalog_entry(std::string_view name)
{
  for (const auto& e : suitesparse_catalog)
    if (e.name == name)
      return e;
  return std::nullopt;
}

namespace detail {

inline std::string lower(std::string_view s)
{
  std::string out(s);
  for (auto& ch : out)
    ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

inline std::vector<std::string_view> split_ws(std::string_view line)
{
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size())
  {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    if (i > start)
      out.push_back(line.substr(start, i - start));
  }
  return out;
}

template <typename T>
T parse_number(std::string_view tok, std::size_t line, const char* what)
{
  if (!tok.empty() && tok.front() == '+')
    tok.remove_prefix(1);
  T value{};
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError(std::string("invalid ") + what + " '" + std::string(tok) + "'", line);
  return value;
}

} // namespace detail

// Reads a coordinate Matrix Market stream with a real (or integer) field and
// symmetric or general symmetry. Symmetric files are mirrored; duplicates are
// summed. General files must have symmetric content.
inline SpdMatrix parse_matrix_market(std::istream& in)
{
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line))
    throw ParseError("empty input", 0);
  ++lineno;

  const auto head = detail::split_ws(line);
  if (head.size() != 5 || detail::lower(head[0]) != "%%matrixmarket" || detail::lower(head[1]) != "matrix")
    throw ParseError("malformed header, expected '%%MatrixMarket matrix <format> <field> <symmetry>'", lineno);
  const std::string format = detail::lower(head[2]);
  const std::string field = detail::lower(head[3]);
  const std::string symmetry = detail::lower(head[4]);
  if (format != "coordinate")
    throw ParseError("unsupported format '" + format + "', only coordinate is accepted", lineno);
  if (field == "pattern")
    throw ParseError("pattern-only matrices carry no values", lineno);
  if (field != "real" && field != "integer")
    throw ParseError("unsupported field '" + field + "', a real field is required", lineno);
  if (symmetry != "symmetric" && symmetry != "general")
    throw ParseError("unsupported symmetry '" + symmetry + "'", lineno);
  const bool mirror = symmetry == "symmetric";

  std::vector<std::string_view> tok;
  while (std::getline(in, line))
  {
    ++lineno;
    tok = detail::split_ws(line);
    if (!tok.empty() && tok[0].front() != '%')
      break;
    tok.clear();
  }
  if (tok.size() != 3)
    throw ParseError("malformed size line, expected 'rows cols entries'", lineno);
  const auto rows = detail::parse_number<long long>(tok[0], lineno, "row count");
  const auto cols = detail::parse_number<long long>(tok[1], lineno, "column count");
  const auto nnz = detail::parse_number<long long>(tok[2], lineno, "entry count");
  if (rows <= 0 || cols <= 0 || nnz < 0)
    throw ParseError("nonpositive dimension", lineno);
  if (rows != cols)
    throw ParseError("matrix is not square (" + std::to_string(rows) + " x " + std::to_string(cols) + ")",
                     lineno);

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(mirror ? 2 * nnz : nnz));
  long long seen = 0;
  while (seen < nnz && std::getline(in, line))
  {
    ++lineno;
    tok = detail::split_ws(line);
    if (tok.empty() || tok[0].front() == '%')
      continue;
    if (tok.size() != 3)
      throw ParseError("expected 'row col value'", lineno);
    const auto i = detail::parse_number<long long>(tok[0], lineno, "row index");
    const auto j = detail::parse_number<long long>(tok[1], lineno, "column index");
    const auto v = detail::parse_number<double>(tok[2], lineno, "value");
    if (i < 1 || i > rows || j < 1 || j > cols)
      throw ParseError("index (" + std::to_string(i) + ", " + std::to_string(j) + ") out of bounds", lineno);
    const auto r = static_cast<int>(i - 1);
    const auto c = static_cast<int>(j - 1);
    trips.emplace_back(r, c, v);
    if (mirror && r != c)
      trips.emplace_back(c, r, v);
    ++seen;
  }
  if (seen != nnz)
    throw ParseError("expected " + std::to_string(nnz) + " entries, found " + std::to_string(seen), lineno);

  SparseMatrix a(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  a.setFromTriplets(trips.begin(), trips.end()); // sums duplicates
  try
  {
    return SpdMatrix::from_sparse(std::move(a));
  }
  catch (const DomainError& e)
  {
    throw ParseError(e.what(), 0);
  }
}

namespace detail {

inline std::string format_double(double v)
{
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

} // namespace detail

// Writes the lower triangle in `symmetric` coordinate form, 17 significant
// digits, so that parse(write(M)) == M bit for bit.
inline void write_matrix_market(std::ostream& out, const SpdMatrix& a)
{
  struct Entry
  {
    Eigen::Index i, j;
    double v;
  };
  std::vector<Entry> entries;
  if (const auto* s = a.sparse())
  {
    for (int k = 0; k < s->outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(*s, k); it; ++it)
        if (it.row() >= it.col())
          entries.push_back({it.row(), it.col(), it.value()});
  }
  else
  {
    const Matrix& d = *a.dense();
    for (Eigen::Index j = 0; j < d.cols(); ++j)
      for (Eigen::Index i = j; i < d.rows(); ++i)
        if (d(i, j) != 0.0)
          entries.push_back({i, j, d(i, j)});
  }
  out << "%%MatrixMarket matrix coordinate real symmetric\n";
  out << a.n() << ' ' << a.n() << ' ' << entries.size() << '\n';
  for (const auto& e : entries)
    out << e.i + 1 << ' ' << e.j + 1 << ' ' << detail::format_double(e.v) << '\n';
}

// Dense symmetric matrix (e.g. a computed logarithm) in the same format.
// Zeros are skipped; the logarithm need not be definite, so no SPD checks.
inline void write_matrix_market(std::ostream& out, const Matrix& sym)
{
  std::size_t count = 0;
  for (Eigen::Index j = 0; j < sym.cols(); ++j)
    for (Eigen::Index i = j; i < sym.rows(); ++i)
      count += sym(i, j) != 0.0;
  out << "%%MatrixMarket matrix coordinate real symmetric\n";
  out << sym.rows() << ' ' << sym.cols() << ' ' << count << '\n';
  for (Eigen::Index j = 0; j < sym.cols(); ++j)
    for (Eigen::Index i = j; i < sym.rows(); ++i)
      if (sym(i, j) != 0.0)
        out << i + 1 << ' ' << j + 1 << ' ' << detail::format_double(sym(i, j)) << '\n';
}

inline SpdMatrix gen_tridiag(Eigen::Index n, double sub, double diag, double super)
{
  if (n < 1)
    throw DomainError("gen_tridiag: n must be positive");
  if (sub != super)
    throw DomainError("gen_tridiag: sub- and super-diagonal must match for symmetry");
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(3 * n));
  for (Eigen::Index i = 0; i < n; ++i)
  {
    trips.emplace_back(i, i, diag);
    if (i + 1 < n && sub != 0.0)
    {
      trips.emplace_back(i + 1, i, sub);
      trips.emplace_back(i, i + 1, super);
    }
  }
  SparseMatrix a(n, n);
  a.setFromTriplets(trips.begin(), trips.end());
  return SpdMatrix::from_sparse(std::move(a));
}

inline SpdMatrix gen_diag_spd(std::span<const double> spectrum)
{
  if (spectrum.empty())
    throw DomainError("gen_diag_spd: empty spectrum");
  for (double s : spectrum)
    if (!(s > 0.0))
      throw DomainError("gen_diag_spd: spectrum entries must be positive");
  const auto n = static_cast<Eigen::Index>(spectrum.size());
  SparseMatrix a(n, n);
  a.reserve(Eigen::VectorXi::Constant(n, 1));
  for (Eigen::Index i = 0; i < n; ++i)
    a.insert(i, i) = spectrum[static_cast<std::size_t>(i)];
  a.makeCompressed();
  return SpdMatrix::from_sparse(std::move(a));
}

// n values log-spaced from lo to hi inclusive.
inline std::vector<double> log_spaced(double lo, double hi, std::size_t n)
{
  std::vector<double> v(n);
  if (n == 1)
  {
    v[0] = lo;
    return v;
  }
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  v.front() = lo;
  v.back() = hi;
  return v;
}

// Q^T D Q with D log-spaced on [1, kappa_target] and Q a seeded random
// orthogonal matrix. Dense storage.
inline SpdMatrix gen_random_spd(Eigen::Index n, double kappa_target, std::uint64_t seed)
{
  if (n < 1)
    throw DomainError("gen_random_spd: n must be positive");
  if (!(kappa_target >= 1.0))
    throw DomainError("gen_random_spd: kappa_target must be >= 1");
  if (kappa_target == 1.0)
    return SpdMatrix::from_dense(Matrix::Identity(n, n));
  if (n == 1)
    throw DomainError("gen_random_spd: a 1x1 matrix has kappa = 1");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix g(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      g(i, j) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  const Matrix q = qr.householderQ();

  const auto spectrum = log_spaced(1.0, kappa_target, static_cast<std::size_t>(n));
  const Eigen::Map<const Vector> d(spectrum.data(), n);
  Matrix a = q.transpose() * d.asDiagonal() * q;
  a = 0.5 * (a + a.transpose()).eval();
  return SpdMatrix::from_dense(std::move(a));
}

} // namespace logmq
