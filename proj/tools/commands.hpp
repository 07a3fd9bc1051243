#pragma once

// Subcommands of the logmq tool. run_cli() is the whole program; main() only
// forwards argv and the standard streams.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "logmq/logmq.hpp"

namespace logmq::cli {

enum ExitCode : int
{
  exit_ok = 0,
  exit_parse = 2,
  exit_definiteness = 3,
  exit_convergence = 4,
  exit_config = 5,
};

// Bad flag combinations and out-of-range option values.
class ConfigError : public Error
{
public:
  using Error::Error;
};

inline constexpr const char* threads_env = "LOGMQ_THREADS";

inline unsigned default_threads()
{
  if (const char* env = std::getenv(threads_env))
  {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1)
      return static_cast<unsigned>(v);
    throw ConfigError(std::string(threads_env) + " must be a positive integer");
  }
  return 1;
}

struct SolveConfig
{
  std::string input;
  std::string method = "auto";
  double tolerance = 1e-12;
  std::optional<std::size_t> m;
  unsigned threads = 0; // 0: take the environment default
  std::string output;
  std::string b_path;
  std::string eig = "auto";
};

struct RatesConfig
{
  double kappa_min = 2.0;
  double kappa_max = 1e12;
  std::size_t points = 45;
  double tolerance = 1e-12;
  std::string output;
};

struct ConvergeConfig
{
  std::string input;
  std::string methods = "GL,DE,PGL";
  std::size_t m_min = 4;
  std::size_t m_max = 160;
  std::size_t m_step = 4;
  double tolerance = 1e-12;
  unsigned threads = 0;
  std::string output;
};

struct PredictConfig
{
  double kappa = 0.0;
  double tolerance = 1e-12;
};

struct GenConfig
{
  std::string kind;
  long long n = 200;
  double sub = -1.0;
  double diag = 2.0;
  std::string spectrum;
  double kappa = 1e3;
  std::uint64_t seed = 1;
  std::string output;
};

namespace detail {

inline std::string fmt(double v) { return logmq::detail::format_double(v); }

inline std::string short_fmt(double v)
{
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(6) << v;
  return os.str();
}

inline void check_tolerance(double tol)
{
  if (!(tol > 0.0 && tol < 1.0))
    throw ConfigError("--tol must lie in (0, 1)");
}

inline unsigned resolve_threads(unsigned flag) { return flag == 0 ? default_threads() : flag; }

inline std::shared_ptr<const SpdMatrix> load_matrix(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open input '" + path + "'");
  return std::make_shared<const SpdMatrix>(parse_matrix_market(in));
}

inline std::vector<double> parse_list(const std::string& text, const char* what)
{
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
  {
    try
    {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size())
        throw std::invalid_argument(item);
    }
    catch (const std::exception&)
    {
      throw ConfigError(std::string("cannot parse ") + what + " entry '" + item + "'");
    }
  }
  if (out.empty())
    throw ConfigError(std::string(what) + " is empty");
  return out;
}

inline Vector read_vector(const std::string& path, Eigen::Index n)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open vector file '" + path + "'");
  std::vector<double> v;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line))
  {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '%' || line[0] == '#')
      continue;
    try
    {
      v.push_back(std::stod(line));
    }
    catch (const std::exception&)
    {
      throw ParseError("cannot parse vector entry '" + line + "'", lineno);
    }
  }
  if (static_cast<Eigen::Index>(v.size()) != n)
    throw ConfigError("vector has " + std::to_string(v.size()) + " entries, matrix has n = " + std::to_string(n));
  return Eigen::Map<Vector>(v.data(), n);
}

// Runs `body` with an output stream that is the file at `path`, or `fallback`
// when path is empty.
template <typename Body>
void with_output(const std::string& path, std::ostream& fallback, Body&& body)
{
  if (path.empty())
  {
    body(fallback);
    return;
  }
  std::ofstream f(path);
  if (!f)
    throw ConfigError("cannot open output '" + path + "'");
  f.imbue(std::locale::classic());
  body(f);
}

inline EigenMode parse_eig_mode(const std::string& s, Eigen::Index n)
{
  if (s == "exact")
    return EigenMode::exact;
  if (s == "iterative")
    return EigenMode::iterative;
  if (s == "auto")
    return n <= exact_eigen_max_n ? EigenMode::exact : EigenMode::iterative;
  throw ConfigError("--eig must be auto, exact or iterative");
}

inline Method resolve_method(const std::string& s, double kappa, double tol)
{
  if (s == "auto" || s == "AUTO")
    return fastest_method(kappa, tol);
  if (auto m = parse_method(s))
    return *m;
  throw ConfigError("unknown method '" + s + "' (expected auto, GL, DE, PGL or PDE)");
}

inline std::vector<Method> parse_methods(const std::string& text)
{
  std::vector<Method> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
  {
    const auto m = parse_method(item);
    if (!m)
      throw ConfigError("unknown method '" + item + "'");
    out.push_back(*m);
  }
  if (out.empty())
    throw ConfigError("--methods is empty");
  return out;
}

} // namespace detail

// logm / logmv. `action` selects log(A) b instead of the full logarithm.
inline int cmd_solve(const SolveConfig& cfg, bool action, std::ostream& out)
{
  detail::check_tolerance(cfg.tolerance);
  const unsigned threads = detail::resolve_threads(cfg.threads);
  const auto a = detail::load_matrix(cfg.input);
  const Eigen::Index n = a->n();
  const EigenMode mode = detail::parse_eig_mode(cfg.eig, n);

  const ScaledProblem problem = scale(a, mode);
  const Method method = detail::resolve_method(cfg.method, problem.kappa(), cfg.tolerance);

  Target target = Target::full();
  if (action)
    target = cfg.b_path.empty() ? Target::action(Vector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n))))
                                : Target::action(detail::read_vector(cfg.b_path, n));

  const ExecOptions opts{threads};
  const auto t0 = std::chrono::steady_clock::now();
  LogmResult result;
  std::optional<double> difference;
  if (cfg.m)
  {
    result = run_method(problem, make_plan(method, *cfg.m, cfg.tolerance, problem.kappa()), target, opts);
  }
  else
  {
    AdaptiveResult ar = adaptive_m(problem, method, cfg.tolerance, target, opts);
    difference = ar.last_difference;
    result = std::move(ar.result);
  }
  result = subtract_scaling(std::move(result), problem.c(), target);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (!cfg.output.empty())
    detail::with_output(cfg.output, out, [&](std::ostream& os) {
      if (action)
        for (Eigen::Index i = 0; i < n; ++i)
          os << detail::fmt(result.value(i, 0)) << '\n';
      else
        write_matrix_market(os, result.value);
    });

  const std::string name = std::filesystem::path(cfg.input).stem().string();
  out << "name=" << name << " n=" << n << " kappa=" << detail::short_fmt(problem.kappa())
      << " method=" << to_string(method) << " evaluations=" << result.evaluations
      << " time_s=" << detail::short_fmt(seconds) << " (excludes eigenvalue estimation)"
      << " difference=" << (difference ? detail::short_fmt(*difference) : std::string("n/a")) << '\n';
  return exit_ok;
}

inline int cmd_rates(const RatesConfig& cfg, std::ostream& out)
{
  detail::check_tolerance(cfg.tolerance);
  if (!(cfg.kappa_min > 1.0 && cfg.kappa_min < cfg.kappa_max))
    throw ConfigError("rates: need 1 < kappa-min < kappa-max");
  if (cfg.points < 2)
    throw ConfigError("rates: need at least 2 points");
  const Crossovers x = crossovers(cfg.tolerance);
  detail::with_output(cfg.output, out, [&](std::ostream& os) {
    os << "kappa,rho_gl,rho_de,rho_pgl,rho_pde\n";
    for (double k : log_spaced(cfg.kappa_min, cfg.kappa_max, cfg.points))
      os << detail::fmt(k) << ',' << detail::fmt(rho_gl(k)) << ',' << detail::fmt(rho_de(k, cfg.tolerance))
         << ',' << detail::fmt(rho_pgl(k)) << ',' << detail::fmt(rho_pde(k, cfg.tolerance)) << '\n';
    os << "# crossovers kappa_low=" << detail::fmt(x.kappa_low) << " kappa_high=" << detail::fmt(x.kappa_high)
       << " tol=" << detail::short_fmt(cfg.tolerance) << '\n';
  });
  return exit_ok;
}

inline int cmd_converge(const ConvergeConfig& cfg, std::ostream& out)
{
  detail::check_tolerance(cfg.tolerance);
  if (cfg.m_step == 0 || cfg.m_min == 0 || cfg.m_min > cfg.m_max)
    throw ConfigError("converge: need 0 < m-min <= m-max and m-step > 0");
  const auto methods = detail::parse_methods(cfg.methods);
  const unsigned threads = detail::resolve_threads(cfg.threads);
  const auto a = detail::load_matrix(cfg.input);
  if (a->n() > oracle_max_n)
    throw ConfigError("converge: the reference needs n <= " + std::to_string(oracle_max_n));

  const ScaledProblem problem = scale(a, EigenMode::exact);
  const Matrix at = problem.c() * a->to_dense();
  const Matrix ref = eig_logm(at).value;
  const ExecOptions opts{threads};
  const Target full = Target::full();

  detail::with_output(cfg.output, out, [&](std::ostream& os) {
    os << "method,m,error\n";
    for (Method method : methods)
      for (std::size_t m = cfg.m_min; m <= cfg.m_max; m += cfg.m_step)
      {
        const LogmResult r = run_method(problem, make_plan(method, m, cfg.tolerance, problem.kappa()), full, opts);
        os << to_string(method) << ',' << m << ',' << detail::fmt(spectral_norm(r.value - ref)) << '\n';
      }

    bool want_parts = false;
    for (Method method : methods)
      want_parts |= method == Method::PGL;
    if (!want_parts)
      return;
    // Each part against the logarithm of its own preconditioned operand; m is
    // the per-part abscissa count.
    const PreconditionConstants pc = precondition_constants(problem.kappa(), 1.0);
    const Eigen::Index n = problem.n();
    Matrix shifted = at;
    shifted.diagonal().array() += 1.0;
    const Eigen::LLT<Matrix> llt(shifted);
    const Matrix p = llt.solve(Matrix::Identity(n, n));
    Matrix b1 = pc.c_prime * at * p;
    Matrix b2 = pc.c_dprime * p;
    b1 = 0.5 * (b1 + b1.transpose()).eval();
    b2 = 0.5 * (b2 + b2.transpose()).eval();
    const Matrix ref1 = eig_logm(b1).value;
    const Matrix ref2 = eig_logm(b2).value;
    for (std::size_t m = cfg.m_min; m <= cfg.m_max; m += cfg.m_step)
    {
      const QuadratureRule rule = gauss_legendre_rule(m);
      os << "pgl_part1," << m << ','
         << detail::fmt(spectral_norm(logm_pre_part1(problem, pc, rule, full, opts).value - ref1)) << '\n';
    }
    for (std::size_t m = cfg.m_min; m <= cfg.m_max; m += cfg.m_step)
    {
      const QuadratureRule rule = gauss_legendre_rule(m);
      os << "pgl_part2," << m << ','
         << detail::fmt(spectral_norm(logm_pre_part2(problem, pc, rule, full, opts).value - ref2)) << '\n';
    }
  });
  return exit_ok;
}

inline int cmd_predict(const PredictConfig& cfg, std::ostream& out)
{
  detail::check_tolerance(cfg.tolerance);
  if (!(cfg.kappa >= 1.0))
    throw ConfigError("predict: --kappa must be >= 1");
  const Method best = fastest_method(cfg.kappa, cfg.tolerance);
  out << "kappa " << detail::short_fmt(cfg.kappa) << ", tolerance " << detail::short_fmt(cfg.tolerance) << '\n';
  if (cfg.kappa == 1.0)
  {
    out << "kappa = 1: log(A) is a multiple of I, no quadrature needed\n";
    out << "recommended " << to_string(best) << '\n';
    return exit_ok;
  }
  out << "method  rate/abscissa  forecast_m (error 1 at m = 0)\n";
  for (Method m : {Method::GL, Method::PGL, Method::DE, Method::PDE})
  {
    const double rate = effective_rate(m, cfg.kappa, cfg.tolerance);
    out << std::left << std::setw(8) << to_string(m) << std::setw(15) << detail::short_fmt(rate)
        << predict_m(rate, cfg.tolerance, 0, 1.0) << '\n';
  }
  out << "recommended " << to_string(best) << '\n';
  return exit_ok;
}

inline int cmd_gen(const GenConfig& cfg, std::ostream& out)
{
  SpdMatrix a = [&] {
    if (cfg.kind == "tridiag")
    {
      if (cfg.n < 1)
        throw ConfigError("gen tridiag: --n must be positive");
      return gen_tridiag(cfg.n, cfg.sub, cfg.diag, cfg.sub);
    }
    if (cfg.kind == "diag")
    {
      if (cfg.spectrum.empty())
        throw ConfigError("gen diag: --spectrum is required");
      const auto s = detail::parse_list(cfg.spectrum, "--spectrum");
      for (double v : s)
        if (!(v > 0.0))
          throw ConfigError("gen diag: spectrum entries must be positive");
      return gen_diag_spd(s);
    }
    if (cfg.kind == "random")
    {
      if (cfg.n < 1 || !(cfg.kappa >= 1.0) || (cfg.n == 1 && cfg.kappa != 1.0))
        throw ConfigError("gen random: need n >= 1, kappa >= 1 (kappa = 1 when n = 1)");
      return gen_random_spd(cfg.n, cfg.kappa, cfg.seed);
    }
    throw ConfigError("unknown generator '" + cfg.kind + "' (expected tridiag, diag or random)");
  }();
  detail::with_output(cfg.output, out, [&](std::ostream& os) { write_matrix_market(os, a); });
  return exit_ok;
}

// Maps library exceptions onto the documented exit codes.
inline int report(const std::exception& e, std::ostream& err)
{
  err << "error: " << e.what() << '\n';
  if (dynamic_cast<const ParseError*>(&e))
    return exit_parse;
  if (dynamic_cast<const DefinitenessError*>(&e))
    return exit_definiteness;
  if (dynamic_cast<const ConvergenceError*>(&e))
    return exit_convergence;
  return exit_config;
}

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  CLI::App app{"Logarithm of symmetric positive definite matrices by quadrature", "logmq"};
  app.require_subcommand(1);

  SolveConfig solve_cfg;
  auto add_solve = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--input", solve_cfg.input, "Matrix Market file")->required();
    sub->add_option("--method", solve_cfg.method, "auto, GL, DE, PGL or PDE")->capture_default_str();
    sub->add_option("--tol", solve_cfg.tolerance, "Adaptive stopping tolerance")->capture_default_str();
    sub->add_option("--m", solve_cfg.m, "Fixed abscissa count (disables the adaptive schedule)");
    sub->add_option("--threads", solve_cfg.threads,
                    std::string("Worker threads (default: $") + threads_env + " or 1)");
    sub->add_option("--output", solve_cfg.output, "Result file");
    sub->add_option("--eig", solve_cfg.eig, "Eigenvalue estimation: auto, exact or iterative")
        ->capture_default_str();
    return sub;
  };
  auto* logm = add_solve("logm", "Full logarithm log(A), written in Matrix Market form");
  auto* logmv = add_solve("logmv", "Action log(A) b, one value per line");
  logmv->add_option("--b", solve_cfg.b_path, "Vector file (default: ones / sqrt(n))");

  RatesConfig rates_cfg;
  auto* rates = app.add_subcommand("rates", "Convergence rates of all methods as CSV");
  rates->add_option("--kappa-min", rates_cfg.kappa_min)->capture_default_str();
  rates->add_option("--kappa-max", rates_cfg.kappa_max)->capture_default_str();
  rates->add_option("--points", rates_cfg.points)->capture_default_str();
  rates->add_option("--tol", rates_cfg.tolerance)->capture_default_str();
  rates->add_option("--output", rates_cfg.output);

  ConvergeConfig conv_cfg;
  auto* converge = app.add_subcommand("converge", "Error against the eigendecomposition reference as CSV");
  converge->add_option("--input", conv_cfg.input, "Matrix Market file")->required();
  converge->add_option("--methods", conv_cfg.methods, "Comma-separated methods")->capture_default_str();
  converge->add_option("--m-min", conv_cfg.m_min)->capture_default_str();
  converge->add_option("--m-max", conv_cfg.m_max)->capture_default_str();
  converge->add_option("--m-step", conv_cfg.m_step)->capture_default_str();
  converge->add_option("--tol", conv_cfg.tolerance, "DE truncation tolerance")->capture_default_str();
  converge->add_option("--threads", conv_cfg.threads);
  converge->add_option("--output", conv_cfg.output);

  PredictConfig pred_cfg;
  auto* predict = app.add_subcommand("predict", "Rates, recommended method and abscissa forecasts");
  predict->add_option("--kappa", pred_cfg.kappa)->required();
  predict->add_option("--tol", pred_cfg.tolerance)->capture_default_str();

  GenConfig gen_cfg;
  auto* gen = app.add_subcommand("gen", "Write a generated test matrix");
  gen->add_option("kind", gen_cfg.kind, "tridiag, diag or random")->required();
  gen->add_option("--n", gen_cfg.n)->capture_default_str();
  gen->add_option("--sub", gen_cfg.sub, "Off-diagonal value (tridiag)")->capture_default_str();
  gen->add_option("--diag", gen_cfg.diag, "Diagonal value (tridiag)")->capture_default_str();
  gen->add_option("--spectrum", gen_cfg.spectrum, "Comma-separated diagonal (diag)");
  gen->add_option("--kappa", gen_cfg.kappa, "Condition number (random)")->capture_default_str();
  gen->add_option("--seed", gen_cfg.seed)->capture_default_str();
  gen->add_option("--output", gen_cfg.output);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try
  {
    app.parse(reversed);
  }
  catch (const CLI::CallForHelp&)
  {
    const auto chosen = app.get_subcommands();
    out << (chosen.empty() ? app.help() : chosen.front()->help());
    return exit_ok;
  }
  catch (const CLI::ParseError& e)
  {
    err << "error: " << e.what() << '\n';
    return exit_config;
  }

  try
  {
    if (logm->parsed() || logmv->parsed())
      return cmd_solve(solve_cfg, logmv->parsed(), out);
    if (rates->parsed())
      return cmd_rates(rates_cfg, out);
    if (converge->parsed())
      return cmd_converge(conv_cfg, out);
    if (predict->parsed())
      return cmd_predict(pred_cfg, out);
    if (gen->parsed())
      return cmd_gen(gen_cfg, out);
  }
  catch (const std::exception& e)
  {
    return report(e, err);
  }
  return exit_config;
}

} // namespace logmq::cli
