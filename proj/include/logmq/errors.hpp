#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace logmq {

// Base of every error raised by the library. The CLI maps each concrete
// type onto a distinct process exit code.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// Argument outside an operation's documented domain.
class DomainError : public Error
{
public:
  using Error::Error;
};

class ParseError : public Error
{
public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what)
      , line_(line)
  {
  }

  // 1-based line number of the offending input, 0 when not line-specific.
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

// Raised when a matrix that must be SPD fails factorization or shows a
// nonpositive eigenvalue.
class DefinitenessError : public Error
{
public:
  using Error::Error;
};

// Iterative procedure exhausted its budget.
class ConvergenceError : public Error
{
public:
  using Error::Error;
};

// Convergence failure carrying the best result found (a bracket, an iterate).
template <typename Payload>
class ConvergenceErrorWith : public ConvergenceError
{
public:
  ConvergenceErrorWith(const std::string& what, Payload best)
      : ConvergenceError(what)
      , best_(std::move(best))
  {
  }

  const Payload& best() const noexcept { return best_; }

private:
  Payload best_;
};

// The rate model could not bracket a crossover.
class ModelError : public Error
{
public:
  using Error::Error;
};

} // namespace logmq
