#pragma once

/** @file decaycert/discrete.hpp
    @brief Discrete analogue of the majorant certificate.

    For sequences with

        g_{n+1} <= (1 - h_n gamma_n) g_n + h_n alpha(n, g_n) + h_n beta_n,  0 < h_n gamma_n < 1,

    a positive sequence mu_n with

        alpha(n, 1/mu_n) + beta_n <= (1/mu_n)(gamma_n - (mu_{n+1} - mu_n) / (h_n mu_n))

    and g_0 <= 1/mu_0 gives g_n <= 1/mu_n for every n.
*/

#include <cmath>
#include <cstddef>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "decaycert/families.hpp"

namespace decaycert
{

class DiscreteScheme
{
public:
  /// h, gamma and beta hold n_max entries; mu holds n_max + 1.
  DiscreteScheme(std::vector<double> h, std::vector<double> gamma, std::vector<double> beta, std::vector<double> mu,
                 Nonlinearity alpha, bool use_time_map = false)
      : h_(std::move(h)), gamma_(std::move(gamma)), beta_(std::move(beta)), mu_(std::move(mu)),
        alpha_(std::move(alpha)), use_time_map_(use_time_map)
  {
    const std::size_t n = h_.size();
    detail::require(n >= 1, "discrete scheme needs at least one step");
    detail::require(gamma_.size() == n && beta_.size() == n, "discrete scheme: h, gamma, beta lengths differ");
    detail::require(mu_.size() == n + 1, "discrete scheme: mu needs n_max + 1 entries");
    for (std::size_t i = 0; i < n; ++i)
    {
      detail::require(std::isfinite(h_[i]) && h_[i] > 0.0, "discrete scheme: h_n must be positive");
      const double hg = h_[i] * gamma_[i];
      if (!(hg > 0.0 && hg < 1.0))
        throw std::invalid_argument("discrete scheme: 0 < h_n gamma_n < 1 violated at n = " + std::to_string(i));
      detail::require(std::isfinite(beta_[i]) && beta_[i] >= 0.0, "discrete scheme: beta_n must be nonnegative");
    }
    for (double m : mu_)
      detail::require(std::isfinite(m) && m > 0.0, "discrete scheme: mu_n must be positive");
    times_.assign(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      times_[i + 1] = times_[i] + h_[i];
  }

  /// Constant step h with the continuous families sampled at t_n = n h.
  static DiscreteScheme from_continuous(const Nonlinearity& alpha, const CoefficientFunction& beta,
                                        const CoefficientFunction& gamma, const Majorant& mu, double h,
                                        std::size_t n_max)
  {
    std::vector<double> hs(n_max, h), gs(n_max), bs(n_max), ms(n_max + 1);
    for (std::size_t i = 0; i < n_max; ++i)
    {
      const double t = h * static_cast<double>(i);
      gs[i] = gamma(t);
      bs[i] = beta(t);
    }
    for (std::size_t i = 0; i <= n_max; ++i)
      ms[i] = mu(h * static_cast<double>(i));
    return DiscreteScheme(std::move(hs), std::move(gs), std::move(bs), std::move(ms), alpha, true);
  }

  std::size_t n_max() const noexcept { return h_.size(); }
  const std::vector<double>& h() const noexcept { return h_; }
  const std::vector<double>& gamma() const noexcept { return gamma_; }
  const std::vector<double>& beta() const noexcept { return beta_; }
  const std::vector<double>& mu() const noexcept { return mu_; }
  const Nonlinearity& alpha() const noexcept { return alpha_; }

  /// Time at which alpha is evaluated for index n.
  double time(std::size_t n) const { return use_time_map_ ? times_[n] : static_cast<double>(n); }

  double alpha_at(std::size_t n, double g) const { return alpha_(time(n), g); }

  /// (1/mu_n)(gamma_n - (mu_{n+1} - mu_n)/(h_n mu_n)) - alpha(n, 1/mu_n) - beta_n
  double slack(std::size_t n) const
  {
    const double inv = 1.0 / mu_[n];
    const double growth = (mu_[n + 1] - mu_[n]) / (h_[n] * mu_[n]);
    return inv * (gamma_[n] - growth) - alpha_at(n, inv) - beta_[n];
  }

  double step(std::size_t n, double g) const
  {
    return (1.0 - h_[n] * gamma_[n]) * g + h_[n] * alpha_at(n, g) + h_[n] * beta_[n];
  }

private:
  std::vector<double> h_, gamma_, beta_, mu_, times_;
  Nonlinearity alpha_;
  bool use_time_map_;
};

struct DiscreteCheck
{
  bool feasible = false;
  bool initial_ok = false;
  std::vector<double> slack;
  std::vector<bool> step_ok;
  std::optional<std::size_t> first_violation;
};

inline DiscreteCheck check_discrete_condition(const DiscreteScheme& s, double g0, double tol = 1e-12)
{
  detail::require(std::isfinite(g0) && g0 >= 0.0, "g0 must be finite and nonnegative");
  DiscreteCheck out;
  const std::size_t n = s.n_max();
  out.slack.resize(n);
  out.step_ok.resize(n);
  bool all = true;
  for (std::size_t i = 0; i < n; ++i)
  {
    out.slack[i] = s.slack(i);
    out.step_ok[i] = out.slack[i] >= -tol;
    if (!out.step_ok[i])
    {
      all = false;
      if (!out.first_violation)
        out.first_violation = i;
    }
  }
  out.initial_ok = g0 <= (1.0 / s.mu().front()) * (1.0 + tol);
  out.feasible = all && out.initial_ok;
  return out;
}

struct ExtremalSequence
{
  std::vector<double> g; ///< g_0 .. g_k, k = n_max unless divergence
  std::optional<std::size_t> divergence_index;
};

/// Iterates the recursion with equality, the largest sequence it admits.
inline ExtremalSequence evolve_extremal(const DiscreteScheme& s, double g0, double overflow_guard = 1e300)
{
  detail::require(std::isfinite(g0) && g0 >= 0.0, "g0 must be finite and nonnegative");
  ExtremalSequence out;
  out.g.reserve(s.n_max() + 1);
  out.g.push_back(g0);
  double g = g0;
  for (std::size_t n = 0; n < s.n_max(); ++n)
  {
    g = s.step(n, g);
    if (!std::isfinite(g) || g > overflow_guard)
    {
      out.divergence_index = n + 1;
      return out;
    }
    out.g.push_back(g);
  }
  return out;
}

struct DiscreteBoundReport
{
  bool precondition_met = false;
  bool ok = false;
  /// A violation on a feasible scheme is impossible in exact arithmetic and signals a bug.
  bool engine_bug = false;
  std::vector<std::size_t> violations;
  double min_margin = INFINITY; ///< min over n of 1/mu_n - g_n
  double max_ratio = 0.0;       ///< max over n of g_n mu_n
  ExtremalSequence sequence;
};

/// Runs the extremal recursion and checks g_n <= (1/mu_n)(1 + tol).
inline DiscreteBoundReport verify_discrete_bound(const DiscreteScheme& s, double g0, double tol = 1e-12)
{
  DiscreteBoundReport rep;
  rep.precondition_met = check_discrete_condition(s, g0, tol).feasible;
  if (!rep.precondition_met)
    return rep;
  rep.sequence = evolve_extremal(s, g0);
  const auto& g = rep.sequence.g;
  for (std::size_t n = 0; n < g.size(); ++n)
  {
    const double bound = 1.0 / s.mu()[n];
    rep.min_margin = std::min(rep.min_margin, bound - g[n]);
    rep.max_ratio = std::max(rep.max_ratio, g[n] * s.mu()[n]);
    if (!(g[n] >= 0.0 && g[n] <= bound * (1.0 + tol)))
      rep.violations.push_back(n);
  }
  rep.ok = rep.violations.empty() && !rep.sequence.divergence_index;
  rep.engine_bug = !rep.ok;
  return rep;
}

struct RandomSchemeOptions
{
  std::size_t n_max = 10000;
  double c0_min = 0.1, c0_max = 2.0;
  double p_min = 1.5, p_max = 4.0;
  double hgamma_min = 0.05, hgamma_max = 0.95;
  double growth_cap = 1e6; ///< mu_n stays within [mu_0, growth_cap * mu_0]
};

struct RandomScheme
{
  DiscreteScheme scheme;
  double g0;
};

/// Draws a scheme that satisfies the discrete majorant condition by construction.
///
/// mu* is the largest mu_{n+1} the condition admits at step n. The next value
/// is f * min(mu*, cap) with f ~ U[0.5, 1] (f = 1 one time in ten), but never
/// below mu_n. mu_0 and the forcing scale keep alpha(n, 1/mu) and mu beta below
/// a fifth of the smallest gamma_n each, so mu* > mu_n on [mu_0, cap].
template <class Rng>
RandomScheme random_feasible_scheme(Rng& rng, const RandomSchemeOptions& opts = {})
{
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  const double c0 = uniform(opts.c0_min, opts.c0_max);
  const double p = uniform(opts.p_min, opts.p_max);
  const Nonlinearity alpha = Nonlinearity::power_law(c0, p);
  // h_n <= 1 so gamma_n >= hgamma_min.
  const double drive_cap = 0.2 * opts.hgamma_min;
  const double mu0 = std::pow(c0 / drive_cap, 1.0 / (p - 1.0)) * uniform(1.0, 2.0);
  const double cap = opts.growth_cap * mu0;
  const double beta_scale = drive_cap / cap * unit(rng);

  const std::size_t n = opts.n_max;
  std::vector<double> h(n), gamma(n), beta(n), mu(n + 1);
  mu[0] = mu0;
  for (std::size_t i = 0; i < n; ++i)
  {
    h[i] = std::max(1e-3, unit(rng));
    gamma[i] = uniform(opts.hgamma_min, opts.hgamma_max) / h[i];
    beta[i] = beta_scale * unit(rng);
    const double inv = 1.0 / mu[i];
    const double drive = mu[i] * (c0 * std::pow(inv, p) + beta[i]);
    const double mu_star = mu[i] * (1.0 + h[i] * (gamma[i] - drive));
    const double upper = std::min(mu_star, cap);
    // One draw decides both branches: v < 0.1 keeps f = 1, otherwise f ~ U[0.5, 1].
    const double v = unit(rng);
    const double f = v < 0.1 ? 1.0 : 0.5 + (v - 0.1) / 1.8;
    mu[i + 1] = std::max(f * upper, std::min(mu[i], upper));
  }
  const double g0 = unit(rng) < 0.1 ? 1.0 / mu0 : unit(rng) / mu0;
  return {DiscreteScheme(std::move(h), std::move(gamma), std::move(beta), std::move(mu), alpha), g0};
}

} // namespace decaycert
