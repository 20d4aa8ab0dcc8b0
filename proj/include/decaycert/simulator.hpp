#pragma once

/** @file decaycert/simulator.hpp
    @brief Finite-dimensional instances of u' = A(t) u + F(t, u) + b(t), u(0) = u0.

    Scalar is double or std::complex<double>. Norms are the Euclidean
    (Hermitian) norm. The linear part is either a constant matrix or a matrix
    scaled by a coefficient function; the nonlinearity is c0 |u|^(p-1) D u;
    the forcing is beta(t) e with a unit vector e.
*/

#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "decaycert/families.hpp"
#include "decaycert/grid.hpp"
#include "decaycert/inequality.hpp"
#include "decaycert/rk4.hpp"
#include "decaycert/synthesis.hpp"

namespace decaycert
{

template <class Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <class Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Largest gamma with Re(A u, u) <= -gamma |u|^2: minus the top eigenvalue of (A + A^H)/2.
template <class Scalar>
double dissipativity_margin(const Mat<Scalar>& a)
{
  detail::require(a.rows() == a.cols(), "dissipativity margin needs a square matrix");
  detail::require(a.rows() > 0, "dissipativity margin needs a nonempty matrix");
  detail::require(a.allFinite(), "matrix entries must be finite");
  const Mat<Scalar> hermitian = (a + a.adjoint()) / Scalar(2.0);
  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> solver(hermitian, Eigen::EigenvaluesOnly);
  return -solver.eigenvalues().maxCoeff();
}

// ---------------------------------------------------------------------------
// Problem pieces
// ---------------------------------------------------------------------------

template <class Scalar>
struct ConstantMatrix
{
  Mat<Scalar> m;
};

/// s(t) * M
template <class Scalar>
struct ScaledMatrix
{
  Mat<Scalar> m;
  CoefficientFunction s;
};

template <class Scalar>
class LinearOperator
{
public:
  using Variant = std::variant<ConstantMatrix<Scalar>, ScaledMatrix<Scalar>>;

  template <class Kind>
    requires std::is_constructible_v<Variant, Kind>
  LinearOperator(Kind kind) : v_(std::move(kind))
  {
    const auto& m = base();
    detail::require(m.rows() == m.cols() && m.rows() > 0, "A must be a nonempty square matrix");
    detail::require(m.allFinite(), "A must have finite entries");
    margin_ = dissipativity_margin<Scalar>(m);
  }

  const Variant& variant() const noexcept { return v_; }
  const Mat<Scalar>& base() const { return std::visit([](const auto& a) -> const Mat<Scalar>& { return a.m; }, v_); }
  Eigen::Index dim() const { return base().rows(); }

  double scale(double t) const
  {
    if (const auto* s = std::get_if<ScaledMatrix<Scalar>>(&v_))
      return s->s(t);
    return 1.0;
  }

  Mat<Scalar> at(double t) const { return Scalar(scale(t)) * base(); }

  Vec<Scalar> apply(double t, const Vec<Scalar>& u) const { return Scalar(scale(t)) * (base() * u); }

  /// Margin of A(t); s(t) >= 0 scales the margin of the base matrix.
  double margin(double t) const { return scale(t) * margin_; }

private:
  Variant v_;
  double margin_ = 0.0;
};

template <class Scalar>
struct ZeroNonlinearity
{
};

/// F(t, u) = c0 |u|^(p-1) D u; |F| <= c0 |u|^p whenever |D| <= 1.
template <class Scalar>
struct NormPower
{
  double c0;
  double p;
  Mat<Scalar> d;
};

template <class Scalar>
using NonlinearTerm = std::variant<ZeroNonlinearity<Scalar>, NormPower<Scalar>>;

template <class Scalar>
struct ZeroForcing
{
};

/// b(t) = beta(t) e, |e| = 1.
template <class Scalar>
struct EnvelopeForcing
{
  CoefficientFunction beta;
  Vec<Scalar> e;
};

template <class Scalar>
using Forcing = std::variant<ZeroForcing<Scalar>, EnvelopeForcing<Scalar>>;

template <class Scalar>
Vec<Scalar> eval_nonlinear(const NonlinearTerm<Scalar>& f, double, const Vec<Scalar>& u)
{
  if (const auto* np = std::get_if<NormPower<Scalar>>(&f))
  {
    const double n = u.norm();
    if (n == 0.0 || np->c0 == 0.0)
      return Vec<Scalar>::Zero(u.size());
    return Scalar(np->c0 * std::pow(n, np->p - 1.0)) * (np->d * u);
  }
  return Vec<Scalar>::Zero(u.size());
}

template <class Scalar>
Vec<Scalar> eval_forcing(const Forcing<Scalar>& b, double t, Eigen::Index dim)
{
  if (const auto* env = std::get_if<EnvelopeForcing<Scalar>>(&b))
    return Scalar(env->beta(t)) * env->e;
  return Vec<Scalar>::Zero(dim);
}

template <class Scalar>
class EvolutionProblem
{
public:
  EvolutionProblem(LinearOperator<Scalar> a, NonlinearTerm<Scalar> f, Forcing<Scalar> b, Vec<Scalar> u0)
      : a_(std::move(a)), f_(std::move(f)), b_(std::move(b)), u0_(std::move(u0))
  {
    const auto n = a_.dim();
    detail::require(u0_.size() == n, "u0 dimension does not match A");
    detail::require(u0_.allFinite(), "u0 must be finite");
    if (const auto* np = std::get_if<NormPower<Scalar>>(&f_))
    {
      detail::require(np->c0 >= 0.0 && std::isfinite(np->c0), "nonlinearity c0 must be nonnegative");
      detail::require(np->p > 1.0, "p must exceed 1");
      detail::require(np->d.rows() == n && np->d.cols() == n, "direction matrix D must match the state dimension");
    }
    if (const auto* env = std::get_if<EnvelopeForcing<Scalar>>(&b_))
    {
      detail::require(env->e.size() == n, "forcing direction e must match the state dimension");
      detail::require(std::abs(env->e.norm() - 1.0) <= 1e-12, "forcing direction e must be a unit vector");
    }
  }

  Eigen::Index dim() const { return a_.dim(); }
  const LinearOperator<Scalar>& linear() const noexcept { return a_; }
  const NonlinearTerm<Scalar>& nonlinear() const noexcept { return f_; }
  const Forcing<Scalar>& forcing() const noexcept { return b_; }
  const Vec<Scalar>& u0() const noexcept { return u0_; }

  Vec<Scalar> rhs(double t, const Vec<Scalar>& u) const
  {
    Vec<Scalar> out = a_.apply(t, u);
    if (!std::holds_alternative<ZeroNonlinearity<Scalar>>(f_))
      out += eval_nonlinear(f_, t, u);
    if (!std::holds_alternative<ZeroForcing<Scalar>>(b_))
      out += eval_forcing(b_, t, dim());
    return out;
  }

  EvolutionProblem with_initial(Vec<Scalar> u0) const { return EvolutionProblem(a_, f_, b_, std::move(u0)); }

private:
  LinearOperator<Scalar> a_;
  NonlinearTerm<Scalar> f_;
  Forcing<Scalar> b_;
  Vec<Scalar> u0_;
};

// ---------------------------------------------------------------------------
// Nonlinearity envelope
// ---------------------------------------------------------------------------

template <class Scalar>
struct EnvelopeReport
{
  bool ok = true;
  double max_ratio = 0.0; ///< max |F(t,u)| / (c0 |u|^p)
  std::optional<double> witness_t;
  std::optional<Vec<Scalar>> witness_u;
};

namespace detail
{

template <class Scalar, class Rng>
Vec<Scalar> random_vector(Rng& rng, Eigen::Index n)
{
  std::normal_distribution<double> normal;
  Vec<Scalar> v(n);
  for (Eigen::Index i = 0; i < n; ++i)
  {
    if constexpr (std::is_same_v<Scalar, double>)
      v[i] = normal(rng);
    else
      v[i] = Scalar(normal(rng), normal(rng));
  }
  return v;
}

} // namespace detail

/// Samples |F(t,u)| <= c0 |u|^p (1 + 1e-12) at random t in [0, 100] and |u| in [1e-6, 10].
template <class Scalar>
EnvelopeReport<Scalar> verify_nonlinearity_envelope(const NonlinearTerm<Scalar>& f, Eigen::Index dim, double c0,
                                                    double p, std::size_t samples, std::uint64_t seed = 0x5eed)
{
  detail::require(samples >= 1, "envelope check needs at least one sample");
  detail::require(c0 > 0.0 && p > 1.0, "envelope needs c0 > 0 and p > 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  EnvelopeReport<Scalar> rep;
  for (std::size_t s = 0; s < samples; ++s)
  {
    const double t = 100.0 * unit(rng);
    Vec<Scalar> dir = detail::random_vector<Scalar>(rng, dim);
    while (dir.norm() == 0.0)
      dir = detail::random_vector<Scalar>(rng, dim);
    const double radius = std::pow(10.0, -6.0 + 7.0 * unit(rng));
    const Vec<Scalar> u = (radius / dir.norm()) * dir;
    const double envelope = c0 * std::pow(u.norm(), p);
    const double ratio = eval_nonlinear(f, t, u).norm() / envelope;
    if (ratio > rep.max_ratio)
      rep.max_ratio = ratio;
    if (!(ratio <= 1.0 + 1e-12) && rep.ok)
    {
      rep.ok = false;
      rep.witness_t = t;
      rep.witness_u = u;
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Integration
// ---------------------------------------------------------------------------

template <class Scalar>
struct Trajectory
{
  std::vector<double> times;
  std::vector<Vec<Scalar>> states;
  std::vector<double> norms;
  std::optional<double> blow_up_time;
  IntegratorDiagnostics diagnostics;
};

template <class Scalar>
Trajectory<Scalar> integrate(const EvolutionProblem<Scalar>& problem, const TimeGrid& grid,
                             const IntegratorOptions& opts = {})
{
  auto rhs = [&](double t, const Vec<Scalar>& u) { return problem.rhs(t, u); };
  auto norm = [](const Vec<Scalar>& u) { return u.norm(); };
  auto sol = integrate_on_grid(rhs, problem.u0(), grid, norm, opts);

  Trajectory<Scalar> out;
  out.states = std::move(sol.states);
  out.blow_up_time = sol.blow_up_time;
  out.diagnostics = sol.diagnostics;
  out.times.assign(grid.points().begin(), grid.points().begin() + static_cast<std::ptrdiff_t>(out.states.size()));
  out.norms.reserve(out.states.size());
  for (const auto& u : out.states)
    out.norms.push_back(u.norm());
  return out;
}

// ---------------------------------------------------------------------------
// Closed-form scalar solution of g' = -k g + c0 g^p
// ---------------------------------------------------------------------------

struct BernoulliValue
{
  std::optional<double> value;         ///< u(t) when the solution exists at t
  std::optional<double> blow_up_time;  ///< finite escape time, if any
};

/// Escape time of g' = -k g + c0 g^p, g(0) = u0, or nullopt when the solution is global.
inline std::optional<double> bernoulli_escape_time(double k, double c0, double p, double u0)
{
  detail::require(k > 0.0 && c0 >= 0.0 && p > 1.0 && u0 > 0.0, "bernoulli oracle needs k > 0, c0 >= 0, p > 1, u0 > 0");
  const double drive = c0 * std::pow(u0, p - 1.0);
  if (drive <= k)
    return std::nullopt;
  return std::log(drive / (drive - k)) / ((p - 1.0) * k);
}

/// With v = u^(1-p): u(t) = [(u0^(1-p) - c0/k) e^{(p-1)kt} + c0/k]^(-1/(p-1)).
inline BernoulliValue bernoulli_oracle(double k, double c0, double p, double u0, double t)
{
  detail::require_time(t);
  BernoulliValue out;
  out.blow_up_time = bernoulli_escape_time(k, c0, p, u0);
  if (out.blow_up_time && t >= *out.blow_up_time)
    return out;
  const double ratio = c0 / k;
  const double bracket = (std::pow(u0, 1.0 - p) - ratio) * std::exp((p - 1.0) * k * t) + ratio;
  out.value = std::pow(bracket, -1.0 / (p - 1.0));
  return out;
}

// ---------------------------------------------------------------------------
// End-to-end pipeline
// ---------------------------------------------------------------------------

struct StageResult
{
  std::string name;
  bool ok = false;
  std::string detail;
};

template <class Scalar>
struct EndToEndReport
{
  bool pass = false;
  std::vector<StageResult> stages;
  std::optional<SynthesisResult> synthesis;
  std::optional<Certificate> certificate;
  std::optional<Trajectory<Scalar>> trajectory;
  std::optional<BoundReport> bound;
  double min_margin_excess = INFINITY; ///< min over grid of gamma_est(t) - gamma(t)
};

struct EndToEndOptions
{
  double tol = kDefaultTolerance;
  double margin_tol = 1e-10;
  std::size_t envelope_samples = 1000;
  IntegratorOptions integrator{};
};

/// Measured preconditions, then synthesize -> certify -> integrate -> verify bound.
/// The first failing stage stops the pipeline.
template <class Scalar>
EndToEndReport<Scalar> end_to_end_verify(const EvolutionProblem<Scalar>& problem, Regime regime,
                                         ProblemConstants constants, const TimeGrid& grid,
                                         const EndToEndOptions& opts = {})
{
  EndToEndReport<Scalar> rep;
  auto stage = [&](std::string name, bool ok, std::string detail) {
    rep.stages.push_back({std::move(name), ok, std::move(detail)});
    return ok;
  };

  if (regime == Regime::exponential_from_u0 && !constants.u0_norm)
    constants.u0_norm = problem.u0().norm();
  const RegimeFamilies fam = regime_families(constants, regime);

  // gamma(t) must not exceed the measured margin of A(t).
  {
    std::optional<double> worst_t;
    for (double t : grid.points())
    {
      const double excess = problem.linear().margin(t) - fam.gamma(t);
      if (excess < rep.min_margin_excess)
      {
        rep.min_margin_excess = excess;
        worst_t = t;
      }
    }
    if (!stage("dissipativity", rep.min_margin_excess >= -opts.margin_tol,
               "min over grid of gamma_est(t) - gamma(t) = " + detail::show(rep.min_margin_excess) +
                   (worst_t ? " at t = " + detail::show(*worst_t) : std::string())))
      return rep;
  }

  {
    bool ok = true;
    std::string text = "F = 0";
    if (!std::holds_alternative<ZeroNonlinearity<Scalar>>(problem.nonlinear()))
    {
      const auto env = verify_nonlinearity_envelope<Scalar>(problem.nonlinear(), problem.dim(), constants.c0,
                                                            constants.p, opts.envelope_samples);
      ok = env.ok;
      text = "max |F| / (c0 |u|^p) = " + detail::show(env.max_ratio);
    }
    double worst = 0.0;
    for (double t : grid.points())
    {
      const double excess = eval_forcing(problem.forcing(), t, problem.dim()).norm() - fam.beta(t);
      worst = std::max(worst, excess);
    }
    ok = ok && worst <= opts.tol;
    text += "; max |b(t)| - beta(t) = " + detail::show(worst);
    if (!stage("envelope", ok, text))
      return rep;
  }

  rep.synthesis = synthesize(constants, regime);
  {
    std::string text = "lambda = " + detail::show(rep.synthesis->lambda) +
                         ", rate = " + detail::show(rep.synthesis->rate) +
                         ", radius = " + detail::show(rep.synthesis->initial_radius);
    for (const auto* v : rep.synthesis->violations())
      text += "; violated " + v->equation + ": " + v->statement;
    if (!stage("synthesis", rep.synthesis->feasible, text))
      return rep;
  }

  const double g0 = problem.u0().norm();
  rep.certificate = check_majorant_condition(fam.alpha, fam.beta, fam.gamma, rep.synthesis->majorant, g0, grid, opts.tol);
  {
    const auto& c = *rep.certificate;
    std::string text = "mu(0) g(0) = " + detail::show(c.initial_product) +
                         ", min slack = " + detail::show(c.min_slack()) +
                         (c.proven_for_all_t() ? ", proven for all t" : ", grid-verified only");
    if (!stage("certificate", c.feasible, text))
      return rep;
  }

  rep.trajectory = integrate(problem, grid, opts.integrator);
  if (!stage("integration", !rep.trajectory->blow_up_time,
             rep.trajectory->blow_up_time ? "blow-up at t = " + detail::show(*rep.trajectory->blow_up_time)
                                          : "substeps = " + std::to_string(rep.trajectory->diagnostics.substeps)))
    return rep;

  rep.bound = verify_bound(rep.trajectory->times, rep.trajectory->norms, rep.synthesis->majorant, opts.tol);
  stage("bound", rep.bound->ok,
        "max g mu = " + detail::show(rep.bound->max_ratio) + ", violations = " +
            std::to_string(rep.bound->violation_times.size()));
  rep.pass = rep.bound->ok;
  return rep;
}

} // namespace decaycert
