#pragma once

// Quadrature evaluation of log(A~) and log(A~) b for the scaled problem
// A~ = cA. Every integrand evaluation is one solve with a shifted operator
// (alpha A~ + beta I):
//
//   GL, DE     log(A~)       = (A~ - I) sum_k w_k [(1+t_k) A~ + (1-t_k) I]^{-1}
//   PGL, PDE   log(A~)       = log(c' A~ (A~+I)^{-1}) - log(c'' (A~+I)^{-1})
//              log(B1)       = ((c'-1) A~ - I)  sum_k w_k N_k^{-1},
//                  N_k = ((1-t_k) + (1+t_k) c') A~ + (1-t_k) I
//              log(B2)       = ((c''-1) I - A~) sum_k w_k M_k^{-1},
//                  M_k = (1-t_k) A~ + ((1-t_k) + (1+t_k) c'') I
//
// so neither (A~+I)^{-1} nor any product of operators is ever formed.
// Results are log(A~) * RHS; subtract_scaling turns them into log(A) * RHS.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "logmq/errors.hpp"
#include "logmq/oracle.hpp"
#include "logmq/parallel.hpp"
#include "logmq/quad_rules.hpp"
#include "logmq/spd_matrix.hpp"
#include "logmq/spectral.hpp"

namespace logmq {

enum class Method
{
  GL,
  DE,
  PGL,
  PDE,
};

inline constexpr Method all_methods[] = {Method::GL, Method::DE, Method::PGL, Method::PDE};

inline std::string_view to_string(Method m)
{
  switch (m)
  {
  case Method::GL: return "GL";
  case Method::DE: return "DE";
  case Method::PGL: return "PGL";
  case Method::PDE: return "PDE";
  }
  return "?";
}

inline std::optional<Method> parse_method(std::string_view s)
{
  std::string up(s);
  for (auto& ch : up)
    ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  for (Method m : all_methods)
    if (up == to_string(m))
      return m;
  return std::nullopt;
}

inline bool is_preconditioned(Method m) { return m == Method::PGL || m == Method::PDE; }

inline RuleKind rule_kind(Method m)
{
  return (m == Method::GL || m == Method::PGL) ? RuleKind::GaussLegendre : RuleKind::DoubleExponential;
}

struct PartSplit
{
  std::size_t first = 0;  // abscissas for log(c' A~ P~_1)
  std::size_t second = 0; // abscissas for log(c'' P~_1)
};

struct MethodPlan
{
  Method kind = Method::GL;
  std::size_t total_m = 0;
  double tolerance = 1e-12; // DE truncation tolerance
  PartSplit split;          // PGL/PDE only
  std::optional<PreconditionConstants> constants;
};

// Builds a plan with total_m abscissas. Preconditioned plans split the budget
// evenly, the odd abscissa going to the first part, and use s = 1.
inline MethodPlan make_plan(Method kind, std::size_t total_m, double tolerance, double kappa)
{
  if (!(tolerance > 0.0 && tolerance < 1.0))
    throw DomainError("make_plan: tolerance must lie in (0, 1)");
  const std::size_t min_m = [&] {
    switch (kind)
    {
    case Method::GL: return std::size_t{1};
    case Method::DE: return std::size_t{2};
    case Method::PGL: return std::size_t{2};
    case Method::PDE: return std::size_t{4};
    }
    return std::size_t{1};
  }();
  if (total_m < min_m)
    throw DomainError("make_plan: " + std::string(to_string(kind)) + " needs at least " +
                      std::to_string(min_m) + " abscissas");
  MethodPlan plan;
  plan.kind = kind;
  plan.total_m = total_m;
  plan.tolerance = tolerance;
  if (is_preconditioned(kind))
  {
    plan.split = {(total_m + 1) / 2, total_m / 2};
    plan.constants = precondition_constants(kappa, 1.0);
  }
  return plan;
}

// Right-hand side selector: the identity (full logarithm) or a vector b
// (action of the logarithm).
class Target
{
public:
  static Target full() { return Target(std::nullopt); }
  static Target action(Vector b) { return Target(std::move(b)); }

  bool is_full() const noexcept { return !b_.has_value(); }
  const Vector& b() const { return *b_; }

  Eigen::Index columns(Eigen::Index n) const noexcept { return is_full() ? n : 1; }

private:
  explicit Target(std::optional<Vector> b)
      : b_(std::move(b))
  {
  }
  std::optional<Vector> b_;
};

// The operator alpha * A~ + beta * I.
struct ShiftedSystem
{
  double alpha = 0.0;
  double beta = 1.0;
};

struct LogmResult
{
  Matrix value; // n x n (full) or n x 1 (action)
  bool full = true;
  std::size_t evaluations = 0; // shifted solves inside quadrature sums
  MethodPlan method;
  double asymmetry = 0.0; // max |X - X^T| / max |X| before symmetrization
};

struct ExecOptions
{
  unsigned threads = 1;
};

inline constexpr Eigen::Index full_mode_block_columns = 64;

namespace detail {

inline void require_spd_system(const ScaledProblem& problem, const ShiftedSystem& sys)
{
  // Linear in lambda, so the extremes decide.
  const double lo = sys.alpha * problem.scaled_min() + sys.beta;
  const double hi = sys.alpha * problem.scaled_max() + sys.beta;
  if (!(lo > 0.0 && hi > 0.0))
    throw DefinitenessError("shifted system is not SPD: alpha=" + std::to_string(sys.alpha) +
                            ", beta=" + std::to_string(sys.beta));
}

inline Matrix solve_target(const ScaledProblem& problem, const ShiftedSystem& sys, const Target& target)
{
  require_spd_system(problem, sys);
  const ShiftedFactorization fact(problem.matrix(), sys.alpha * problem.c(), sys.beta);
  const Eigen::Index n = problem.n();
  if (!target.is_full())
    return fact.solve(target.b());
  Matrix x(n, n);
  for (Eigen::Index j0 = 0; j0 < n; j0 += full_mode_block_columns)
  {
    const Eigen::Index nb = std::min(full_mode_block_columns, n - j0);
    Matrix block = Matrix::Zero(n, nb);
    for (Eigen::Index j = 0; j < nb; ++j)
      block(j0 + j, j) = 1.0;
    x.middleCols(j0, nb) = fact.solve(block);
  }
  return x;
}

// sum_k w_k (system_for(k))^{-1} RHS, accumulated in ascending k whatever the
// thread count.
template <typename SystemFor>
Matrix quadrature_sum(const ScaledProblem& problem, const QuadratureRule& rule, SystemFor&& system_for,
                      const Target& target, const ExecOptions& opts)
{
  const Eigen::Index n = problem.n();
  Matrix sum = Matrix::Zero(n, target.columns(n));
  const std::size_t m = rule.m();
  const std::size_t batch = std::max(1u, opts.threads);
  std::vector<Matrix> terms(std::min(batch, m));
  for (std::size_t k0 = 0; k0 < m; k0 += batch)
  {
    const std::size_t count = std::min(batch, m - k0);
    parallel_for(count, opts.threads, [&](std::size_t i) {
      terms[i] = solve_target(problem, system_for(k0 + i), target);
    });
    for (std::size_t i = 0; i < count; ++i)
      sum += rule.weights[k0 + i] * terms[i];
  }
  return sum;
}

inline LogmResult finish(Matrix value, bool full, std::size_t evaluations, MethodPlan plan)
{
  LogmResult r;
  r.full = full;
  r.evaluations = evaluations;
  r.method = std::move(plan);
  if (full && value.size() > 0)
  {
    const double scale = value.cwiseAbs().maxCoeff();
    const double asym = (value - value.transpose()).cwiseAbs().maxCoeff();
    r.asymmetry = scale > 0.0 ? asym / scale : 0.0;
    value = 0.5 * (value + value.transpose()).eval();
  }
  r.value = std::move(value);
  return r;
}

inline MethodPlan plan_for_rule(const QuadratureRule& rule)
{
  MethodPlan p;
  p.kind = rule.kind == RuleKind::GaussLegendre ? Method::GL : Method::DE;
  p.total_m = rule.m();
  return p;
}

inline LogmResult zero_result(const ScaledProblem& problem, const Target& target, MethodPlan plan)
{
  const Eigen::Index n = problem.n();
  return finish(Matrix::Zero(n, target.columns(n)), target.is_full(), 0, std::move(plan));
}

} // namespace detail

// X solving (alpha A~ + beta I) X = rhs.
inline Matrix shifted_solve(const ScaledProblem& problem, const ShiftedSystem& sys, const Matrix& rhs)
{
  detail::require_spd_system(problem, sys);
  return ShiftedFactorization(problem.matrix(), sys.alpha * problem.c(), sys.beta).solve(rhs);
}

// log(A~) RHS by the plain quadrature sum. kappa = 1 means A~ = I and returns
// an exact zero without solving.
inline LogmResult logm_direct(const ScaledProblem& problem, const QuadratureRule& rule, const Target& target,
                              const ExecOptions& opts = {})
{
  if (problem.kappa() == 1.0)
    return detail::zero_result(problem, target, detail::plan_for_rule(rule));
  const Matrix s = detail::quadrature_sum(
      problem, rule, [&](std::size_t k) { return ShiftedSystem{rule.one_plus[k], rule.one_minus[k]}; },
      target, opts);
  Matrix value = problem.apply_scaled(s) - s;
  return detail::finish(std::move(value), target.is_full(), rule.m(), detail::plan_for_rule(rule));
}

namespace detail {

inline void require_unit_shift(const PreconditionConstants& pc)
{
  if (pc.s != 1.0)
    throw DomainError("preconditioned parts require the shift s = 1");
}

} // namespace detail

// log(c' A~ (A~ + I)^{-1}) RHS.
inline LogmResult logm_pre_part1(const ScaledProblem& problem, const PreconditionConstants& pc,
                                 const QuadratureRule& rule, const Target& target, const ExecOptions& opts = {})
{
  detail::require_unit_shift(pc);
  const double cp = pc.c_prime;
  const Matrix s = detail::quadrature_sum(
      problem, rule,
      [&](std::size_t k) {
        return ShiftedSystem{rule.one_minus[k] + rule.one_plus[k] * cp, rule.one_minus[k]};
      },
      target, opts);
  Matrix value = (cp - 1.0) * problem.apply_scaled(s) - s;
  return detail::finish(std::move(value), target.is_full(), rule.m(), detail::plan_for_rule(rule));
}

// log(c'' (A~ + I)^{-1}) RHS.
inline LogmResult logm_pre_part2(const ScaledProblem& problem, const PreconditionConstants& pc,
                                 const QuadratureRule& rule, const Target& target, const ExecOptions& opts = {})
{
  detail::require_unit_shift(pc);
  const double cdp = pc.c_dprime;
  const Matrix s = detail::quadrature_sum(
      problem, rule,
      [&](std::size_t k) {
        return ShiftedSystem{rule.one_minus[k], rule.one_minus[k] + rule.one_plus[k] * cdp};
      },
      target, opts);
  Matrix value = (cdp - 1.0) * s - problem.apply_scaled(s);
  return detail::finish(std::move(value), target.is_full(), rule.m(), detail::plan_for_rule(rule));
}

// The two quadrature rules of a preconditioned plan. DE windows use the
// condition number sqrt(kappa) shared by both preconditioned operands.
inline std::pair<QuadratureRule, QuadratureRule> part_rules(const MethodPlan& plan)
{
  if (!is_preconditioned(plan.kind) || !plan.constants)
    throw DomainError("part_rules: plan is not preconditioned");
  if (plan.split.first + plan.split.second != plan.total_m)
    throw DomainError("part_rules: split does not sum to total_m");
  if (plan.kind == Method::PGL)
    return {gauss_legendre_rule(plan.split.first), gauss_legendre_rule(plan.split.second)};
  const double k = plan.constants->kappa_ap;
  return {de_rule(plan.split.first, plan.tolerance, k), de_rule(plan.split.second, plan.tolerance, k)};
}

inline LogmResult logm_preconditioned(const ScaledProblem& problem, const MethodPlan& plan, const Target& target,
                                      const ExecOptions& opts = {})
{
  if (!is_preconditioned(plan.kind))
    throw DomainError("logm_preconditioned: plan must be PGL or PDE");
  if (problem.kappa() == 1.0)
    return detail::zero_result(problem, target, plan);
  const auto [rule1, rule2] = part_rules(plan);
  LogmResult p1 = logm_pre_part1(problem, *plan.constants, rule1, target, opts);
  LogmResult p2 = logm_pre_part2(problem, *plan.constants, rule2, target, opts);
  return detail::finish(p1.value - p2.value, target.is_full(), p1.evaluations + p2.evaluations, plan);
}

// Dispatches a plan to the matching evaluator; returns log(A~) RHS.
inline LogmResult run_method(const ScaledProblem& problem, const MethodPlan& plan, const Target& target,
                             const ExecOptions& opts = {})
{
  if (is_preconditioned(plan.kind))
    return logm_preconditioned(problem, plan, target, opts);
  const QuadratureRule rule = plan.kind == Method::GL
                                  ? gauss_legendre_rule(plan.total_m)
                                  : de_rule(plan.total_m, plan.tolerance, problem.kappa());
  LogmResult r = logm_direct(problem, rule, target, opts);
  r.method = plan;
  return r;
}

// log(cA) = log(A) + log(c) I, so log(A) RHS = log(A~) RHS - log(c) RHS.
inline LogmResult subtract_scaling(LogmResult result, double c, const Target& target)
{
  if (!(c > 0.0))
    throw DomainError("subtract_scaling: c must be positive");
  const double lc = std::log(c);
  if (result.full)
    result.value.diagonal().array() -= lc;
  else
    result.value -= lc * target.b();
  return result;
}

struct AdaptiveStep
{
  std::size_t m = 0;
  double difference = 0.0; // ||X_m - X_previous||, NaN for the first step
};

struct AdaptiveResult
{
  LogmResult result;
  std::vector<AdaptiveStep> history;
  double last_difference = 0.0;
};

struct AdaptiveSettings
{
  std::size_t m_start = 8;
  double growth = 1.5;
  std::size_t m_max = 4096;
};

inline std::size_t next_abscissa_count(std::size_t m, double growth)
{
  return static_cast<std::size_t>(std::ceil(static_cast<double>(m) * growth));
}

inline double difference_norm(const Matrix& a, const Matrix& b, bool full)
{
  const Matrix d = a - b;
  return full ? spectral_norm(d) : d.norm();
}

// Runs `kind` on the geometric schedule m_start, ceil(growth m), ... until two
// successive iterates differ by at most tolerance / 2. Returns log(A~) RHS.
inline AdaptiveResult adaptive_m(const ScaledProblem& problem, Method kind, double tolerance, const Target& target,
                                 const ExecOptions& opts = {}, const AdaptiveSettings& settings = {})
{
  if (!(tolerance > 0.0 && tolerance < 1.0))
    throw DomainError("adaptive_m: tolerance must lie in (0, 1)");

  AdaptiveResult out;
  std::size_t m = settings.m_start;
  LogmResult prev = run_method(problem, make_plan(kind, m, tolerance, problem.kappa()), target, opts);
  out.history.push_back({m, std::nan("")});
  if (problem.kappa() == 1.0)
  {
    out.result = std::move(prev);
    out.last_difference = 0.0;
    return out;
  }
  for (;;)
  {
    const std::size_t next = next_abscissa_count(m, settings.growth);
    if (next > settings.m_max)
    {
      out.result = std::move(prev);
      throw ConvergenceErrorWith<AdaptiveResult>(
          std::string(to_string(kind)) + " did not reach tolerance within m_max = " +
              std::to_string(settings.m_max) + " abscissas",
          std::move(out));
    }
    m = next;
    LogmResult cur = run_method(problem, make_plan(kind, m, tolerance, problem.kappa()), target, opts);
    const double diff = difference_norm(cur.value, prev.value, target.is_full());
    out.history.push_back({m, diff});
    out.last_difference = diff;
    prev = std::move(cur);
    if (diff <= tolerance / 2.0)
      break;
  }
  out.result = std::move(prev);
  return out;
}

} // namespace logmq
