#pragma once

/** @file decaycert/inequality.hpp
    @brief Continuous-time certification of g' <= -gamma g + alpha(t, g) + beta.

    A majorant mu certifies g(t) <= 1/mu(t) when, for all t >= 0,

        alpha(t, 1/mu) + beta(t) <= (1/mu) (gamma(t) - mu'(t)/mu(t))

    and mu(0) g(0) <= 1. The condition is sampled on a TimeGrid. For the
    analytic family combinations where every term of mu * LHS, rescaled by the
    decay of gamma, is nonincreasing in t, the check at t = 0 implies all t and
    the certificate is marked as proven rather than grid-verified.
*/

#include <cfloat>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "decaycert/families.hpp"
#include "decaycert/grid.hpp"
#include "decaycert/quadrature.hpp"
#include "decaycert/rk4.hpp"

namespace decaycert
{

inline constexpr double kDefaultTolerance = 1e-12;

/// Which exact reduction (if any) lifted the grid check to all t >= 0.
enum class Reduction
{
  none,        ///< grid-verified only
  exponential, ///< constant gamma, exponential majorant
  power,       ///< power-decay gamma, power majorant, no forcing
  forced,      ///< power-decay gamma, power majorant, power-decay forcing
};

inline const char* to_string(Reduction r)
{
  switch (r)
  {
    case Reduction::exponential: return "exponential";
    case Reduction::power: return "power";
    case Reduction::forced: return "forced";
    case Reduction::none: break;
  }
  return "none";
}

struct Certificate
{
  bool feasible = false;
  bool initial_ok = false;
  bool borderline = false; ///< mu(0) g(0) == 1 within tolerance
  bool strict = false;     ///< conclusion is g < 1/mu rather than g <= 1/mu
  Reduction reduction = Reduction::none;
  double initial_product = 0.0; ///< mu(0) * g(0)
  double tolerance = kDefaultTolerance;
  std::vector<double> times;
  std::vector<double> lhs;   ///< alpha(t, 1/mu) + beta(t)
  std::vector<double> rhs;   ///< (1/mu)(gamma - mu'/mu)
  std::vector<double> slack; ///< rhs - lhs
  std::vector<double> bound; ///< 1/mu(t)
  std::optional<double> first_violation;

  /// True when the verdict covers every t >= 0, not only the grid.
  bool proven_for_all_t() const { return reduction != Reduction::none; }

  double min_slack() const
  {
    double m = INFINITY;
    for (double s : slack)
      m = std::min(m, s);
    return m;
  }
};

namespace detail
{

inline Reduction detect_reduction(const Nonlinearity& alpha, const CoefficientFunction& beta,
                                  const CoefficientFunction& gamma, const Majorant& mu)
{
  const auto* law = alpha.as<PowerLaw>();
  if (!law)
    return Reduction::none;

  if (const auto* em = mu.as<ExponentialMajorant>())
  {
    // mu*LHS = c0 lambda^(1-p) e^{-(p-1)bt} + lambda e^{bt} beta(t) + b must not increase; gamma constant.
    if (em->b < 0.0 || !gamma.as<Constant>())
      return Reduction::none;
    if (beta.is_zero())
      return Reduction::exponential;
    if (const auto* ed = beta.as<ExponentialDecay>(); ed && ed->r >= em->b)
      return Reduction::exponential;
    if (beta.as<Constant>() && em->b == 0.0)
      return Reduction::exponential;
    return Reduction::none;
  }

  if (const auto* pm = mu.as<PowerMajorant>())
  {
    // Multiply by (1+t)^q1: every term carries (1+t)^(q1 - rate) and needs rate >= q1.
    const double nu = pm->nu;
    double q1 = 0.0;
    if (const auto* pd = gamma.as<PowerDecay>())
      q1 = pd->q;
    else if (!gamma.as<Constant>())
      return Reduction::none;
    if (nu < 0.0 || q1 > 1.0)
      return Reduction::none;
    if (law->c0 > 0.0 && (law->p - 1.0) * nu < q1)
      return Reduction::none;
    if (beta.is_zero())
      return Reduction::power;
    double q2 = 0.0;
    if (const auto* bd = beta.as<PowerDecay>())
      q2 = bd->q;
    else if (!beta.as<Constant>())
      return Reduction::none;
    return q2 - nu >= q1 ? Reduction::forced : Reduction::none;
  }
  return Reduction::none;
}

} // namespace detail

/// g(t) <= 1/mu(t).
inline double bound_at(const Majorant& mu, double t) { return 1.0 / mu(t); }

/// Precomputed antiderivative of gamma, giving a(t) = exp(int_0^t gamma).
class IntegratingFactor
{
public:
  explicit IntegratingFactor(CoefficientFunction gamma, double quad_tol = 1e-10)
      : gamma_(std::move(gamma)), quad_tol_(quad_tol)
  {
    if (const auto* tab = gamma_.as<Tabulated>())
    {
      cumulative_.assign(tab->knots.size(), 0.0);
      for (std::size_t i = 1; i < tab->knots.size(); ++i)
        cumulative_[i] = cumulative_[i - 1] + piece(tab->knots[i - 1], tab->knots[i]);
    }
  }

  /// int_0^t gamma(s) ds.
  double exponent(double t) const
  {
    detail::require_time(t);
    if (const auto* c = gamma_.as<Constant>())
      return c->c * t;
    if (const auto* pd = gamma_.as<PowerDecay>())
    {
      if (pd->q == 1.0)
        return pd->c * std::log1p(t);
      return pd->c * std::expm1((1.0 - pd->q) * std::log1p(t)) / (1.0 - pd->q);
    }
    if (const auto* ed = gamma_.as<ExponentialDecay>())
      return ed->r == 0.0 ? ed->c * t : ed->c * (-std::expm1(-ed->r * t)) / ed->r;

    const auto& tab = *gamma_.as<Tabulated>();
    if (t >= tab.knots.back())
      return cumulative_.back() + piece(tab.knots.back(), t);
    const std::size_t i = detail::interval_index(tab.knots, t);
    return cumulative_[i] + piece(tab.knots[i], t);
  }

  /// a(t); throws std::overflow_error when the exponent leaves double range.
  double operator()(double t) const
  {
    const double e = exponent(t);
    if (e > std::log(DBL_MAX))
      throw std::overflow_error("integrating factor overflows at t = " + std::to_string(t));
    return std::exp(e);
  }

  const CoefficientFunction& gamma() const noexcept { return gamma_; }

private:
  double piece(double a, double b) const
  {
    return adaptive_simpson([this](double s) { return gamma_(s); }, a, b, quad_tol_);
  }

  CoefficientFunction gamma_;
  double quad_tol_;
  std::vector<double> cumulative_;
};

inline double integrating_factor(const CoefficientFunction& gamma, double t) { return IntegratingFactor(gamma)(t); }

/// Samples the majorant condition and the initial condition mu(0) g0 <= 1.
inline Certificate check_majorant_condition(const Nonlinearity& alpha, const CoefficientFunction& beta,
                                            const CoefficientFunction& gamma, const Majorant& mu, double g0,
                                            const TimeGrid& grid, double tol = kDefaultTolerance)
{
  detail::require(std::isfinite(g0) && g0 >= 0.0, "g0 must be finite and nonnegative");
  detail::require(std::isfinite(tol) && tol >= 0.0, "tolerance must be nonnegative");

  Certificate cert;
  cert.tolerance = tol;
  const std::size_t n = grid.size();
  cert.times.assign(grid.points().begin(), grid.points().end());
  cert.lhs.resize(n);
  cert.rhs.resize(n);
  cert.slack.resize(n);
  cert.bound.resize(n);

  bool grid_ok = true;
  for (std::size_t i = 0; i < n; ++i)
  {
    const double t = grid[i];
    const double inv_mu = 1.0 / mu(t);
    cert.bound[i] = inv_mu;
    cert.lhs[i] = alpha(t, inv_mu) + beta(t);
    cert.rhs[i] = inv_mu * (gamma(t) - mu.log_derivative(t));
    cert.slack[i] = cert.rhs[i] - cert.lhs[i];
    if (!(cert.slack[i] >= -tol))
    {
      grid_ok = false;
      if (!cert.first_violation)
        cert.first_violation = t;
    }
  }

  cert.initial_product = mu(0.0) * g0;
  if (cert.initial_product < 1.0)
  {
    cert.initial_ok = true;
    cert.strict = true;
  }
  else if (cert.initial_product - 1.0 <= tol)
  {
    cert.initial_ok = true;
    cert.borderline = true;
  }

  cert.feasible = grid_ok && cert.initial_ok;
  if (grid_ok)
    cert.reduction = detail::detect_reduction(alpha, beta, gamma, mu);
  return cert;
}

/// Solution of the comparison equation w' = a(t) [alpha(t, w/a) + beta(t)], w(0) = v0.
struct ComparisonTrajectory
{
  std::vector<double> times;
  std::vector<double> w;
  std::vector<double> a;
  std::optional<double> blow_up_time;
  IntegratorDiagnostics diagnostics;

  /// a(t_i) / mu(t_i), the envelope w must stay under.
  std::vector<double> envelope(const Majorant& mu) const
  {
    std::vector<double> out(times.size());
    for (std::size_t i = 0; i < times.size(); ++i)
      out[i] = a[i] / mu(times[i]);
    return out;
  }
};

inline ComparisonTrajectory solve_comparison_ode(const Nonlinearity& alpha, const CoefficientFunction& beta,
                                                 const CoefficientFunction& gamma, double v0, const TimeGrid& grid,
                                                 const IntegratorOptions& opts = {})
{
  detail::require(std::isfinite(v0) && v0 >= 0.0, "v0 must be finite and nonnegative");
  const IntegratingFactor a(gamma);
  auto rhs = [&](double t, double w) {
    const double at = a(t);
    return at * (alpha(t, std::max(w, 0.0) / at) + beta(t));
  };
  auto sol = integrate_on_grid(rhs, v0, grid, [](double w) { return std::abs(w); }, opts);

  ComparisonTrajectory out;
  out.w = std::move(sol.states);
  out.blow_up_time = sol.blow_up_time;
  out.diagnostics = sol.diagnostics;
  out.times.assign(grid.points().begin(), grid.points().begin() + static_cast<std::ptrdiff_t>(out.w.size()));
  out.a.resize(out.times.size());
  for (std::size_t i = 0; i < out.times.size(); ++i)
    out.a[i] = a(out.times[i]);
  return out;
}

struct BoundReport
{
  bool ok = true;
  std::vector<double> violation_times;
  double min_margin = INFINITY;          ///< min over the grid of 1/mu - g
  double min_relative_margin = INFINITY; ///< min over the grid of 1 - g mu
  double max_ratio = 0.0;                ///< max over the grid of g mu
  bool decays = false;                   ///< mu provably unbounded, so g -> 0
};

/// Checks g(t_i) <= 1/mu(t_i) + tol along a sampled trajectory.
inline BoundReport verify_bound(std::span<const double> times, std::span<const double> values, const Majorant& mu,
                                double tol = kDefaultTolerance)
{
  detail::require(times.size() == values.size(), "trajectory times and values differ in length");
  BoundReport rep;
  rep.decays = mu.provably_unbounded();
  for (std::size_t i = 0; i < times.size(); ++i)
  {
    const double m = mu(times[i]);
    const double bound = 1.0 / m;
    const double g = values[i];
    rep.min_margin = std::min(rep.min_margin, bound - g);
    rep.min_relative_margin = std::min(rep.min_relative_margin, 1.0 - g * m);
    rep.max_ratio = std::max(rep.max_ratio, g * m);
    if (!(g <= bound + tol))
    {
      rep.ok = false;
      rep.violation_times.push_back(times[i]);
    }
  }
  return rep;
}

} // namespace decaycert
