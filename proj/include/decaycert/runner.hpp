#pragma once

/** @file decaycert/runner.hpp
    @brief Executes a validated Scenario and writes report.txt plus CSV trajectories.

    Every checked inequality in the report carries the equation tag it
    instantiates. Numbers are printed with 17 significant digits so repeated
    runs produce byte-identical files.
*/

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "decaycert/scenario.hpp"

namespace decaycert
{

struct RunResult
{
  int exit_code = exit_pass;
  std::string report;
  std::vector<std::filesystem::path> files;
};

namespace detail
{

inline std::string num(double x) { return fmt::format("{:.17g}", x); }

class ReportBuilder
{
public:
  void line(const std::string& s) { out_ << s << '\n'; }

  void check(const CheckedInequality& c)
  {
    line(fmt::format("  {:<9} {:<32} lhs={} rhs={} slack={} {}", c.equation, c.statement + (c.strict ? " (strict)" : ""),
                     num(c.lhs), num(c.rhs), num(c.slack()), c.holds ? "holds" : "VIOLATED"));
  }

  void synthesis(const SynthesisResult& r)
  {
    line(fmt::format("[synthesis] regime={} feasible={}", to_string(r.regime), r.feasible ? "yes" : "no"));
    if (r.regime == Regime::forced)
      line(fmt::format("  lambda0={} nu={} h_min={} initial_radius={}", num(r.lambda), num(r.rate), num(*r.h_min),
                       num(r.initial_radius)));
    else if (r.regime == Regime::power)
      line(fmt::format("  lambda={} nu={} initial_radius={}", num(r.lambda), num(r.rate), num(r.initial_radius)));
    else
      line(fmt::format("  lambda={} b={} initial_radius={}", num(r.lambda), num(r.rate), num(r.initial_radius)));
    line("  bound: |u(t)| <= " + num(1.0 / r.lambda) + " * " + r.decay_description);
    for (const auto& c : r.checks)
      check(c);
  }

  void certificate(const Certificate& c)
  {
    line(fmt::format("[certificate] feasible={} grid_points={} tol={}", c.feasible ? "yes" : "no", c.times.size(),
                     num(c.tolerance)));
    std::size_t worst = 0;
    for (std::size_t i = 1; i < c.slack.size(); ++i)
      if (c.slack[i] < c.slack[worst])
        worst = i;
    line(fmt::format("  {:<9} {:<32} min_slack={} at t={} slack(0)={} {}", "Eq. (9)",
                     "alpha(t,1/mu)+beta <= (gamma-mu'/mu)/mu", num(c.slack[worst]), num(c.times[worst]),
                     num(c.slack.front()), c.first_violation ? "VIOLATED" : "holds"));
    if (c.first_violation)
      line("  first violation at t=" + num(*c.first_violation));
    line(fmt::format("  {:<9} {:<32} lhs={} rhs=1 slack={} {}", "Eq. (10)", "mu(0) g(0) <= 1", num(c.initial_product),
                     num(1.0 - c.initial_product),
                     !c.initial_ok ? "VIOLATED" : (c.borderline ? "holds (borderline, non-strict bound)" : "holds")));
    switch (c.reduction)
    {
      case Reduction::exponential:
        line("  Eq. (28)  reduces to its value at t=0 (Eq. (29)): certified for all t >= 0");
        break;
      case Reduction::power:
        line("  Eq. (36)  reduces to its value at t=0 (Eq. (38)): certified for all t >= 0");
        break;
      case Reduction::forced:
        line("  Eq. (46)  reduces to its value at t=0 (Eq. (47)): certified for all t >= 0");
        break;
      case Reduction::none:
        line("  grid-verified only, not proven for all t");
        break;
    }
    if (c.feasible)
      line(fmt::format("  Eq. (11)  conclusion: 0 <= g(t) {} 1/mu(t)", c.strict ? "<" : "<="));
  }

  std::string str() const { return out_.str(); }

private:
  std::ostringstream out_;
};

class CsvWriter
{
public:
  CsvWriter(const std::filesystem::path& path, const std::string& header) : path_(path), out_(path)
  {
    if (!out_)
      throw ScenarioError(exit_io, "cannot write " + path.string());
    out_ << header << '\n';
  }

  template <class... Cols>
  void row(Cols... cols)
  {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(cols), first = false), ...);
    out_ << '\n';
  }

  void close()
  {
    out_.close();
    if (!out_)
      throw ScenarioError(exit_io, "failed writing " + path_.string());
  }

private:
  static std::string cell(double x) { return num(x); }
  static std::string cell(std::size_t x) { return std::to_string(x); }

  std::filesystem::path path_;
  std::ofstream out_;
};

inline void write_certificate_csv(const std::filesystem::path& path, const Certificate& c)
{
  CsvWriter csv(path, "t,lhs,rhs,slack,bound");
  for (std::size_t i = 0; i < c.times.size(); ++i)
    csv.row(c.times[i], c.lhs[i], c.rhs[i], c.slack[i], c.bound[i]);
  csv.close();
}

inline void write_trajectory_csv(const std::filesystem::path& path, std::span<const double> times,
                                 std::span<const double> g, const std::optional<Majorant>& mu)
{
  CsvWriter csv(path, "t,g,bound,slack");
  for (std::size_t i = 0; i < times.size(); ++i)
  {
    const double bound = mu ? bound_at(*mu, times[i]) : NAN;
    csv.row(times[i], g[i], bound, bound - g[i]);
  }
  csv.close();
}

inline void header(ReportBuilder& rep, const Scenario& s)
{
  rep.line("scenario: " + s.name);
  rep.line(std::string("mode: ") + to_string(s.mode));
}

inline int run_certify(const Scenario& s, ReportBuilder& rep, RunResult& out)
{
  const TimeGrid grid = s.grid.build();
  if (s.synthesis)
    rep.synthesis(*s.synthesis);
  const Certificate cert = check_majorant_condition(*s.alpha, *s.beta, *s.gamma, *s.mu, *s.g0, grid, s.tol);
  rep.certificate(cert);
  write_certificate_csv(s.output / "certificate.csv", cert);
  out.files.push_back(s.output / "certificate.csv");

  bool ok = cert.feasible;
  try
  {
    const auto cmp = solve_comparison_ode(*s.alpha, *s.beta, *s.gamma, *s.g0, grid);
    const auto env = cmp.envelope(*s.mu);
    CsvWriter csv(s.output / "comparison.csv", "t,w,a_over_mu");
    double worst = 0.0;
    for (std::size_t i = 0; i < cmp.times.size(); ++i)
    {
      csv.row(cmp.times[i], cmp.w[i], env[i]);
      worst = std::max(worst, cmp.w[i] / env[i]);
    }
    csv.close();
    out.files.push_back(s.output / "comparison.csv");
    const bool dominated = worst <= 1.0 + 1e-6 && !cmp.blow_up_time;
    rep.line(fmt::format("  {:<9} {:<32} max w mu/a={} {}", "Eq. (20)", "0 <= w(t) <= a(t)/mu(t)", num(worst),
                         dominated ? "holds" : "VIOLATED"));
    if (cmp.blow_up_time)
      rep.line("  comparison solution escapes at t=" + num(*cmp.blow_up_time));
    if (cert.feasible && !dominated)
      ok = false;
  }
  catch (const std::overflow_error& e)
  {
    rep.line(std::string("  comparison equation skipped: ") + e.what());
  }
  return ok ? exit_pass : exit_fail;
}

inline int run_simulate(const Scenario& s, ReportBuilder& rep, RunResult& out)
{
  const TimeGrid grid = s.grid.build();
  const auto& problem = *s.problem;
  rep.line(fmt::format("[problem] dim={} |u0|={} margin(0)={}", problem.dim(), num(problem.u0().norm()),
                       num(problem.linear().margin(0.0))));
  const auto traj = integrate(problem, grid);
  write_trajectory_csv(s.output / "trajectory.csv", traj.times, traj.norms, s.mu);
  out.files.push_back(s.output / "trajectory.csv");
  rep.line(fmt::format("[integration] points={} substeps={} unconverged_intervals={}", traj.times.size(),
                       traj.diagnostics.substeps, traj.diagnostics.unconverged_intervals));
  bool ok = true;
  if (traj.blow_up_time)
  {
    rep.line("  blow-up at t=" + num(*traj.blow_up_time));
    ok = false;
  }
  rep.line("  g(T)=" + num(traj.norms.back()) + " at T=" + num(traj.times.back()));
  if (s.mu)
  {
    const auto b = verify_bound(traj.times, traj.norms, *s.mu, s.tol);
    rep.line(fmt::format("  {:<9} {:<32} max g mu={} violations={} {}", "Eq. (11)", "g(t) <= 1/mu(t)", num(b.max_ratio),
                         b.violation_times.size(), b.ok ? "holds" : "VIOLATED"));
    if (b.decays)
      rep.line("  mu(t) -> infinity, so g(t) -> 0");
    ok = ok && b.ok;
  }
  return ok ? exit_pass : exit_fail;
}

inline int run_synthesize(const Scenario& s, ReportBuilder& rep, RunResult&)
{
  rep.synthesis(*s.synthesis);
  if (s.synthesis->regime == Regime::forced && s.constants)
  {
    const auto& c = *s.constants;
    if (auto best = largest_forced_rate(*c.c1, *c.q1, c.c0, c.p, *c.c2, *c.q2))
      rep.line("  largest admissible nu=" + num(*best));
    else
      rep.line("  no admissible nu for these constants");
  }
  return s.synthesis->feasible ? exit_pass : exit_fail;
}

inline int run_discrete(const Scenario& s, ReportBuilder& rep, RunResult& out)
{
  const auto& d = *s.discrete;
  const auto check = check_discrete_condition(d.scheme, d.g0, s.tol);
  double min_slack = INFINITY;
  std::size_t worst = 0;
  for (std::size_t i = 0; i < check.slack.size(); ++i)
    if (check.slack[i] < min_slack)
    {
      min_slack = check.slack[i];
      worst = i;
    }
  rep.line(fmt::format("[discrete] n_max={} feasible={}", d.scheme.n_max(), check.feasible ? "yes" : "no"));
  rep.line(fmt::format("  {:<9} {:<32} min_slack={} at n={} {}", "Eq. (22)", "alpha(n,1/mu_n)+beta_n <= ...",
                       num(min_slack), worst, check.first_violation ? "VIOLATED" : "holds"));
  if (check.first_violation)
    rep.line("  first violation at n=" + std::to_string(*check.first_violation));
  const double inv_mu0 = 1.0 / d.scheme.mu().front();
  rep.line(fmt::format("  {:<9} {:<32} lhs={} rhs={} slack={} {}", "Eq. (23)", "g_0 <= 1/mu_0", num(d.g0), num(inv_mu0),
                       num(inv_mu0 - d.g0), check.initial_ok ? "holds" : "VIOLATED"));

  const auto seq = evolve_extremal(d.scheme, d.g0);
  CsvWriter csv(s.output / "discrete.csv", "n,g,bound");
  for (std::size_t n = 0; n < seq.g.size(); ++n)
    csv.row(n, seq.g[n], 1.0 / d.scheme.mu()[n]);
  csv.close();
  out.files.push_back(s.output / "discrete.csv");

  if (!check.feasible)
  {
    rep.line("  preconditions fail: no bound claimed");
    return exit_fail;
  }
  const auto b = verify_discrete_bound(d.scheme, d.g0, s.tol);
  rep.line(fmt::format("  {:<9} {:<32} max g mu={} violations={} {}", "Eq. (24)", "0 <= g_n <= 1/mu_n", num(b.max_ratio),
                       b.violations.size(), b.ok ? "holds" : "VIOLATED (engine bug)"));
  return b.ok ? exit_pass : exit_fail;
}

inline int run_end2end(const Scenario& s, ReportBuilder& rep, RunResult& out)
{
  const TimeGrid grid = s.grid.build();
  EndToEndOptions opts;
  opts.tol = s.tol;
  const auto e2e = end_to_end_verify(*s.problem, *s.regime, *s.constants, grid, opts);
  for (const auto& st : e2e.stages)
    rep.line(fmt::format("[stage {}] {} {}", st.name, st.ok ? "ok" : "FAILED", st.detail));
  if (e2e.synthesis)
    rep.synthesis(*e2e.synthesis);
  if (e2e.certificate)
  {
    rep.certificate(*e2e.certificate);
    write_certificate_csv(s.output / "certificate.csv", *e2e.certificate);
    out.files.push_back(s.output / "certificate.csv");
  }
  if (e2e.trajectory)
  {
    write_trajectory_csv(s.output / "trajectory.csv", e2e.trajectory->times, e2e.trajectory->norms,
                         e2e.synthesis ? std::optional<Majorant>(e2e.synthesis->majorant) : std::nullopt);
    out.files.push_back(s.output / "trajectory.csv");
  }
  if (e2e.bound)
  {
    rep.line(fmt::format("  {:<9} {:<32} max g mu={} violations={} {}", "Eq. (11)", "|u(t)| <= 1/mu(t)",
                         num(e2e.bound->max_ratio), e2e.bound->violation_times.size(), e2e.bound->ok ? "holds" : "VIOLATED"));
    if (e2e.bound->decays)
      rep.line("  mu(t) -> infinity, so |u(t)| -> 0");
  }
  return e2e.pass ? exit_pass : exit_fail;
}

} // namespace detail

/// Runs the scenario's pipeline, writing report.txt and CSV files into s.output.
inline RunResult run(const Scenario& s)
{
  RunResult out;
  std::error_code ec;
  std::filesystem::create_directories(s.output, ec);
  if (ec)
    throw ScenarioError(exit_io, "cannot create output directory " + s.output.string() + ": " + ec.message());

  detail::ReportBuilder rep;
  detail::header(rep, s);
  switch (s.mode)
  {
    case Mode::certify: out.exit_code = detail::run_certify(s, rep, out); break;
    case Mode::simulate: out.exit_code = detail::run_simulate(s, rep, out); break;
    case Mode::synthesize: out.exit_code = detail::run_synthesize(s, rep, out); break;
    case Mode::discrete: out.exit_code = detail::run_discrete(s, rep, out); break;
    case Mode::end2end: out.exit_code = detail::run_end2end(s, rep, out); break;
  }
  rep.line(std::string("verdict: ") + (out.exit_code == exit_pass ? "PASS" : "FAIL"));
  out.report = rep.str();

  const auto report_path = s.output / "report.txt";
  std::ofstream f(report_path);
  f << out.report;
  f.close();
  if (!f)
    throw ScenarioError(exit_io, "failed writing " + report_path.string());
  out.files.insert(out.files.begin(), report_path);
  return out;
}

} // namespace decaycert
