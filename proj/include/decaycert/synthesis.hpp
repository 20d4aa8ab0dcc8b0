#pragma once

/** @file decaycert/synthesis.hpp
    @brief Explicit majorants for the three standard decay regimes.

    exponential  gamma = k,                 mu = lambda e^{(k - eps) t}
    power        gamma = c1 / (1+t)^q1,     mu = lambda (1+t)^{c1 - eps}
    forced       gamma = c1 / (1+t)^q1,     beta = c2 / (1+t)^q2,   mu = lambda0 (1+t)^nu

    In every regime alpha(t, g) = c0 g^p. lambda is always the smallest
    admissible scale, which gives the largest initial radius 1/lambda.
    Infeasible constants are reported in the result, not thrown.
*/

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "decaycert/families.hpp"

namespace decaycert
{

/// One inequality evaluated during synthesis: lhs <= rhs (or lhs < rhs when strict).
struct CheckedInequality
{
  std::string equation;  ///< equation tag, e.g. "Eq. (50)"
  std::string statement; ///< the inequality in words/symbols
  double lhs = 0.0;
  double rhs = 0.0;
  bool strict = false;
  bool holds = false;

  double slack() const { return rhs - lhs; }
};

namespace detail
{

inline constexpr double kSynthesisTolerance = 1e-12;

inline CheckedInequality check_le(std::string eq, std::string statement, double lhs, double rhs)
{
  const bool holds = lhs <= rhs + kSynthesisTolerance * std::max(1.0, std::abs(rhs));
  return {std::move(eq), std::move(statement), lhs, rhs, false, holds};
}

inline CheckedInequality check_lt(std::string eq, std::string statement, double lhs, double rhs)
{
  return {std::move(eq), std::move(statement), lhs, rhs, true, lhs < rhs};
}

} // namespace detail

enum class Regime
{
  exponential,
  exponential_from_u0,
  power,
  forced,
};

inline const char* to_string(Regime r)
{
  switch (r)
  {
    case Regime::exponential: return "exponential";
    case Regime::exponential_from_u0: return "exponential_from_u0";
    case Regime::power: return "power";
    case Regime::forced: return "forced";
  }
  return "?";
}

struct SynthesisResult
{
  Regime regime = Regime::exponential;
  bool feasible = false;
  Majorant majorant = Majorant::exponential(1.0, 0.0);
  double lambda = 1.0;         ///< majorant scale mu(0)
  double rate = 0.0;           ///< b (exponential) or nu (power, forced)
  double initial_radius = 1.0; ///< 1 / lambda
  std::optional<double> h_min; ///< forced regime only
  std::string decay_description;
  std::vector<CheckedInequality> checks;

  std::vector<const CheckedInequality*> violations() const
  {
    std::vector<const CheckedInequality*> out;
    for (const auto& c : checks)
      if (!c.holds)
        out.push_back(&c);
    return out;
  }
};

/// Optional constants describing a problem; which are required depends on the regime.
struct ProblemConstants
{
  double c0 = 0.0;
  double p = 2.0;
  std::optional<double> k;
  std::optional<double> c1, q1;
  std::optional<double> c2, q2;
  std::optional<double> epsilon;
  std::optional<double> nu;
  std::optional<double> u0_norm;
};

/// h(lambda) = c0 / lambda^(p-1) + lambda c2.
inline double forcing_objective(double c0, double p, double c2, double lambda)
{
  return c0 / std::pow(lambda, p - 1.0) + lambda * c2;
}

/// Minimizer of forcing_objective over lambda > 0: ((p-1) c0 / c2)^(1/p).
inline double optimal_forcing_scale(double c0, double p, double c2)
{
  detail::require(c0 > 0.0 && c2 > 0.0 && p > 1.0, "optimal scale needs c0 > 0, c2 > 0, p > 1");
  return std::pow((p - 1.0) * c0 / c2, 1.0 / p);
}

/// Minimum value of forcing_objective: c0^(1/p) c2^(1-1/p) (p-1)^(1/p) p/(p-1).
inline double hmin(double c0, double p, double c2)
{
  detail::require(c0 > 0.0 && c2 > 0.0 && p > 1.0, "hmin needs c0 > 0, c2 > 0, p > 1");
  return std::pow(c0, 1.0 / p) * std::pow(c2, 1.0 - 1.0 / p) * std::pow(p - 1.0, 1.0 / p) * p / (p - 1.0);
}

/// Smallest admissible lambda for a rate sacrifice epsilon: (c0/eps)^(1/(p-1)).
inline double minimal_scale(double c0, double p, double epsilon)
{
  return std::pow(c0 / epsilon, 1.0 / (p - 1.0));
}

inline SynthesisResult synth_exponential(double k, double c0, double p, double epsilon)
{
  detail::require(k > 0.0, "k must be positive");
  detail::require(c0 >= 0.0, "c0 must be nonnegative");
  detail::require(p > 1.0, "p must exceed 1");
  detail::require(epsilon > 0.0 && epsilon < k, "epsilon must lie in (0, k)");

  SynthesisResult r;
  r.regime = Regime::exponential;
  r.rate = k - epsilon;
  r.lambda = c0 > 0.0 ? minimal_scale(c0, p, epsilon) : 1.0;
  r.majorant = Majorant::exponential(r.lambda, r.rate);
  r.initial_radius = 1.0 / r.lambda;
  r.decay_description = "exp(-" + detail::show(r.rate) + " t)";
  r.checks.push_back(detail::check_le("Eq. (29)", "c0/lambda^(p-1) + b <= k",
                                      c0 / std::pow(r.lambda, p - 1.0) + r.rate, k));
  r.feasible = r.violations().empty();
  return r;
}

/// lambda = 1/|u0|, rate b = k - c0 |u0|^(p-1); feasible iff c0 |u0|^(p-1) < k.
inline SynthesisResult synth_exponential_from_u0(double k, double c0, double p, double u0_norm)
{
  detail::require(k > 0.0, "k must be positive");
  detail::require(c0 >= 0.0, "c0 must be nonnegative");
  detail::require(p > 1.0, "p must exceed 1");
  detail::require(u0_norm > 0.0 && std::isfinite(u0_norm), "|u0| must be positive");

  SynthesisResult r;
  r.regime = Regime::exponential_from_u0;
  const double correction = c0 * std::pow(u0_norm, p - 1.0);
  r.lambda = 1.0 / u0_norm;
  r.rate = k - correction;
  r.majorant = Majorant::exponential(r.lambda, r.rate);
  r.initial_radius = u0_norm;
  r.decay_description = detail::show(u0_norm) + " exp(-" + detail::show(r.rate) + " t)";
  r.checks.push_back(detail::check_lt("Remark 1", "c0 |u0|^(p-1) < k", correction, k));
  r.feasible = r.violations().empty();
  return r;
}

inline SynthesisResult synth_power(double c1, double q1, double c0, double p, double epsilon)
{
  detail::require(c1 > 0.0, "c1 must be positive");
  detail::require(q1 >= 0.0, "q1 must be nonnegative");
  detail::require(q1 <= 1.0, "q1 must not exceed 1");
  detail::require(c0 >= 0.0, "c0 must be nonnegative");
  detail::require(p > 1.0, "p must exceed 1");
  detail::require(epsilon > 0.0 && epsilon < c1, "epsilon must lie in (0, c1)");

  SynthesisResult r;
  r.regime = Regime::power;
  r.rate = c1 - epsilon;
  r.lambda = c0 > 0.0 ? minimal_scale(c0, p, epsilon) : 1.0;
  r.majorant = Majorant::power(r.lambda, r.rate);
  r.initial_radius = 1.0 / r.lambda;
  r.decay_description = "(1+t)^(-" + detail::show(r.rate) + ")";
  r.checks.push_back(detail::check_le("Eq. (37)", "q1 <= (p-1) nu", q1, (p - 1.0) * r.rate));
  r.checks.push_back(detail::check_le("Eq. (38)", "c0/lambda^(p-1) + nu <= c1",
                                      c0 / std::pow(r.lambda, p - 1.0) + r.rate, c1));
  r.feasible = r.violations().empty();
  return r;
}

inline SynthesisResult synth_forced(double c1, double q1, double c0, double p, double c2, double q2, double nu)
{
  detail::require(c1 > 0.0 && q1 >= 0.0 && c0 > 0.0 && c2 > 0.0 && q2 > 0.0 && nu > 0.0,
                  "forced synthesis needs positive c1, c0, c2, q2, nu and q1 >= 0");
  detail::require(p > 1.0, "p must exceed 1");

  SynthesisResult r;
  r.regime = Regime::forced;
  r.rate = nu;
  r.lambda = optimal_forcing_scale(c0, p, c2);
  r.h_min = hmin(c0, p, c2);
  r.majorant = Majorant::power(r.lambda, nu);
  r.initial_radius = 1.0 / r.lambda;
  r.decay_description = "(1+t)^(-" + detail::show(nu) + ")";
  r.checks.push_back(detail::check_le("Eq. (42)", "q1 <= 1", q1, 1.0));
  r.checks.push_back(detail::check_le("Eq. (42)", "q1 <= q2 - nu", q1, q2 - nu));
  r.checks.push_back(detail::check_le("Eq. (42)", "q1 <= nu (p-1)", q1, nu * (p - 1.0)));
  r.checks.push_back(detail::check_le("Eq. (50)", "h_min + nu <= c1", *r.h_min + nu, c1));
  r.feasible = r.violations().empty();
  return r;
}

/// Largest nu in (0, c1 - h_min] accepted by synth_forced, if any.
///
/// The constraints on nu are nu <= c1 - h_min, nu <= q2 - q1 and
/// nu >= q1/(p-1), so the optimum is the smaller upper bound when it clears
/// the lower one.
inline std::optional<double> largest_forced_rate(double c1, double q1, double c0, double p, double c2, double q2)
{
  const double upper = std::min(c1 - hmin(c0, p, c2), q2 - q1);
  if (!(upper > 0.0))
    return std::nullopt;
  auto result = synth_forced(c1, q1, c0, p, c2, q2, upper);
  if (!result.feasible)
    return std::nullopt;
  return upper;
}

/// Infimum of admissible lambda in the power regime as epsilon -> c1: (c0/c1)^(1/(p-1)).
inline double power_scale_limit(double c0, double p, double c1) { return std::pow(c0 / c1, 1.0 / (p - 1.0)); }

/// alpha, beta and gamma families matching a regime.
struct RegimeFamilies
{
  Nonlinearity alpha;
  CoefficientFunction beta;
  CoefficientFunction gamma;
};

namespace detail
{

inline double need(const std::optional<double>& v, const char* name)
{
  require(v.has_value(), std::string("constants.") + name + " is required for this regime");
  return *v;
}

} // namespace detail

inline RegimeFamilies regime_families(const ProblemConstants& c, Regime regime)
{
  RegimeFamilies f{Nonlinearity::power_law(c.c0, c.p), CoefficientFunction::zero(), CoefficientFunction::zero()};
  switch (regime)
  {
    case Regime::exponential:
    case Regime::exponential_from_u0:
      f.gamma = CoefficientFunction::constant(detail::need(c.k, "k"));
      break;
    case Regime::forced:
      f.beta = CoefficientFunction::power_decay(detail::need(c.c2, "c2"), detail::need(c.q2, "q2"));
      [[fallthrough]];
    case Regime::power:
      f.gamma = CoefficientFunction::power_decay(detail::need(c.c1, "c1"), detail::need(c.q1, "q1"));
      break;
  }
  return f;
}

inline SynthesisResult synthesize(const ProblemConstants& c, Regime regime)
{
  using detail::need;
  switch (regime)
  {
    case Regime::exponential:
      return synth_exponential(need(c.k, "k"), c.c0, c.p, need(c.epsilon, "epsilon"));
    case Regime::exponential_from_u0:
      return synth_exponential_from_u0(need(c.k, "k"), c.c0, c.p, need(c.u0_norm, "u0_norm"));
    case Regime::power:
      return synth_power(need(c.c1, "c1"), need(c.q1, "q1"), c.c0, c.p, need(c.epsilon, "epsilon"));
    case Regime::forced:
      return synth_forced(need(c.c1, "c1"), need(c.q1, "q1"), c.c0, c.p, need(c.c2, "c2"), need(c.q2, "q2"),
                          need(c.nu, "nu"));
  }
  throw std::invalid_argument("unknown regime");
}

} // namespace decaycert
