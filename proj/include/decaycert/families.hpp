#pragma once

/** @file decaycert/families.hpp
    @brief Scalar time functions, the nonlinearity alpha(t, g) and majorants mu(t).

    Every family is an immutable value type. Construction validates parameters
    and throws std::invalid_argument; evaluation never mutates.
*/

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

namespace decaycert
{

namespace detail
{

inline void require(bool condition, const char* message)
{
  if (!condition)
    throw std::invalid_argument(message);
}

inline void require(bool condition, const std::string& message)
{
  if (!condition)
    throw std::invalid_argument(message);
}

/// Number formatting for human-readable diagnostics (10 significant digits).
inline std::string show(double x)
{
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

inline void require_time(double t)
{
  require(std::isfinite(t) && t >= 0.0, "time must be finite and nonnegative");
}

/// Index of the knot interval containing x, for sorted knots with x >= knots.front().
inline std::size_t interval_index(const std::vector<double>& knots, double x)
{
  auto it = std::upper_bound(knots.begin(), knots.end(), x);
  return static_cast<std::size_t>(std::distance(knots.begin(), it)) - 1;
}

/// Piecewise linear interpolation with constant extrapolation past the last knot.
inline double interpolate(const std::vector<double>& knots, const std::vector<double>& values, double x)
{
  if (x >= knots.back())
    return values.back();
  if (x <= knots.front())
    return values.front();
  const std::size_t i = interval_index(knots, x);
  const double w = (x - knots[i]) / (knots[i + 1] - knots[i]);
  return values[i] + w * (values[i + 1] - values[i]);
}

inline void require_knots(const std::vector<double>& knots, const std::string& what)
{
  require(knots.size() >= 2, what + ": at least two knots required");
  require(knots.front() == 0.0, what + ": first knot must be 0");
  for (std::size_t i = 0; i < knots.size(); ++i)
    require(std::isfinite(knots[i]), what + ": knots must be finite");
  for (std::size_t i = 1; i < knots.size(); ++i)
    require(knots[i] > knots[i - 1], what + ": knots must be strictly increasing");
}

} // namespace detail

// ---------------------------------------------------------------------------
// Coefficient functions gamma(t), beta(t)
// ---------------------------------------------------------------------------

struct Constant
{
  double c;
};

/// c / (1 + t)^q
struct PowerDecay
{
  double c;
  double q;
};

/// c * exp(-r t)
struct ExponentialDecay
{
  double c;
  double r;
};

/// Linear interpolation between knots, constant beyond the last knot.
struct Tabulated
{
  std::vector<double> knots;
  std::vector<double> values;
};

class CoefficientFunction
{
public:
  using Variant = std::variant<Constant, PowerDecay, ExponentialDecay, Tabulated>;

  CoefficientFunction() : CoefficientFunction(Constant{0.0}) {}

  template <class Kind>
    requires std::is_constructible_v<Variant, Kind>
  CoefficientFunction(Kind kind) : v_(std::move(kind)) { validate(); }

  static CoefficientFunction zero() { return Constant{0.0}; }
  static CoefficientFunction constant(double c) { return Constant{c}; }
  static CoefficientFunction power_decay(double c, double q) { return PowerDecay{c, q}; }
  static CoefficientFunction exponential_decay(double c, double r) { return ExponentialDecay{c, r}; }
  static CoefficientFunction tabulated(std::vector<double> knots, std::vector<double> values)
  {
    return Tabulated{std::move(knots), std::move(values)};
  }

  const Variant& variant() const noexcept { return v_; }

  template <class Kind>
  const Kind* as() const noexcept { return std::get_if<Kind>(&v_); }

  /// True when the function vanishes identically.
  bool is_zero() const
  {
    return std::visit([](const auto& f) -> bool {
      using T = std::decay_t<decltype(f)>;
      if constexpr (std::is_same_v<T, Tabulated>)
        return std::all_of(f.values.begin(), f.values.end(), [](double v) { return v == 0.0; });
      else
        return f.c == 0.0;
    }, v_);
  }

  double operator()(double t) const
  {
    detail::require_time(t);
    return std::visit([t](const auto& f) -> double {
      using T = std::decay_t<decltype(f)>;
      if constexpr (std::is_same_v<T, Constant>)
        return f.c;
      else if constexpr (std::is_same_v<T, PowerDecay>)
        return f.c / std::pow(1.0 + t, f.q);
      else if constexpr (std::is_same_v<T, ExponentialDecay>)
        return f.c * std::exp(-f.r * t);
      else
        return detail::interpolate(f.knots, f.values, t);
    }, v_);
  }

private:
  void validate() const
  {
    std::visit([](const auto& f) {
      using T = std::decay_t<decltype(f)>;
      if constexpr (std::is_same_v<T, Tabulated>)
      {
        detail::require_knots(f.knots, "tabulated coefficient");
        detail::require(f.values.size() == f.knots.size(), "tabulated coefficient: values and knots differ in length");
        for (double v : f.values)
          detail::require(std::isfinite(v) && v >= 0.0, "tabulated coefficient: values must be finite and nonnegative");
      }
      else
      {
        detail::require(std::isfinite(f.c) && f.c >= 0.0, "coefficient scale c must be finite and nonnegative");
        if constexpr (std::is_same_v<T, PowerDecay>)
          detail::require(std::isfinite(f.q) && f.q >= 0.0, "power decay exponent q must be nonnegative");
        if constexpr (std::is_same_v<T, ExponentialDecay>)
          detail::require(std::isfinite(f.r) && f.r >= 0.0, "exponential decay rate r must be nonnegative");
      }
    }, v_);
  }

  Variant v_;
};

inline double eval_coeff(const CoefficientFunction& f, double t) { return f(t); }

// ---------------------------------------------------------------------------
// Nonlinearity alpha(t, g)
// ---------------------------------------------------------------------------

/// alpha(t, g) = c0 * g^p
struct PowerLaw
{
  double c0;
  double p;
};

/// alpha sampled on a (time x g) grid; bilinear interpolation, constant
/// extrapolation in both directions. Rows are indexed by time.
struct TabulatedAlpha
{
  std::vector<double> times;
  std::vector<double> g_knots;
  std::vector<std::vector<double>> values;
};

class Nonlinearity
{
public:
  using Variant = std::variant<PowerLaw, TabulatedAlpha>;

  Nonlinearity() : Nonlinearity(PowerLaw{0.0, 2.0}) {}

  template <class Kind>
    requires std::is_constructible_v<Variant, Kind>
  Nonlinearity(Kind kind) : v_(std::move(kind)) { validate(); }

  static Nonlinearity zero() { return PowerLaw{0.0, 2.0}; }
  static Nonlinearity power_law(double c0, double p) { return PowerLaw{c0, p}; }

  const Variant& variant() const noexcept { return v_; }

  template <class Kind>
  const Kind* as() const noexcept { return std::get_if<Kind>(&v_); }

  double operator()(double t, double g) const
  {
    detail::require(std::isfinite(t), "alpha: time must be finite");
    detail::require(g >= 0.0, "alpha: g must be nonnegative");
    if (const auto* law = std::get_if<PowerLaw>(&v_))
      return law->c0 == 0.0 ? 0.0 : law->c0 * std::pow(g, law->p);

    const auto& tab = std::get<TabulatedAlpha>(v_);
    auto row_value = [&](std::size_t row) { return detail::interpolate(tab.g_knots, tab.values[row], g); };
    if (t <= tab.times.front())
      return row_value(0);
    if (t >= tab.times.back())
      return row_value(tab.times.size() - 1);
    const std::size_t i = detail::interval_index(tab.times, t);
    const double w = (t - tab.times[i]) / (tab.times[i + 1] - tab.times[i]);
    return (1.0 - w) * row_value(i) + w * row_value(i + 1);
  }

private:
  void validate() const
  {
    if (const auto* law = std::get_if<PowerLaw>(&v_))
    {
      detail::require(std::isfinite(law->c0) && law->c0 >= 0.0, "power law c0 must be finite and nonnegative");
      detail::require(std::isfinite(law->p) && law->p > 1.0, "p must exceed 1");
      return;
    }
    const auto& tab = std::get<TabulatedAlpha>(v_);
    detail::require_knots(tab.times, "tabulated alpha times");
    detail::require_knots(tab.g_knots, "tabulated alpha g knots");
    detail::require(tab.values.size() == tab.times.size(), "tabulated alpha: one row per time knot required");
    for (const auto& row : tab.values)
    {
      detail::require(row.size() == tab.g_knots.size(), "tabulated alpha: row length must match g knots");
      for (std::size_t j = 0; j < row.size(); ++j)
      {
        detail::require(std::isfinite(row[j]) && row[j] >= 0.0, "tabulated alpha: values must be finite and nonnegative");
        if (j > 0)
          detail::require(row[j] >= row[j - 1], "tabulated alpha: values must be nondecreasing in g");
      }
    }
  }

  Variant v_;
};

inline double eval_alpha(const Nonlinearity& a, double t, double g) { return a(t, g); }

// ---------------------------------------------------------------------------
// Majorant mu(t)
// ---------------------------------------------------------------------------

/// mu(t) = lambda * exp(b t)
struct ExponentialMajorant
{
  double lambda;
  double b;
};

/// mu(t) = lambda * (1 + t)^nu
struct PowerMajorant
{
  double lambda;
  double nu;
};

/// User-supplied mu and its derivative.
struct GenericMajorant
{
  std::function<double(double)> eval;
  std::function<double(double)> deriv;
};

class Majorant
{
public:
  using Variant = std::variant<ExponentialMajorant, PowerMajorant, GenericMajorant>;

  template <class Kind>
    requires std::is_constructible_v<Variant, Kind>
  Majorant(Kind kind) : v_(std::move(kind)) { validate(); }

  static Majorant exponential(double lambda, double b) { return ExponentialMajorant{lambda, b}; }
  static Majorant power(double lambda, double nu) { return PowerMajorant{lambda, nu}; }
  static Majorant generic(std::function<double(double)> eval, std::function<double(double)> deriv)
  {
    return GenericMajorant{std::move(eval), std::move(deriv)};
  }

  const Variant& variant() const noexcept { return v_; }

  template <class Kind>
  const Kind* as() const noexcept { return std::get_if<Kind>(&v_); }

  /// Scale lambda = mu(0) for the analytic variants.
  double scale() const
  {
    if (const auto* e = as<ExponentialMajorant>())
      return e->lambda;
    if (const auto* p = as<PowerMajorant>())
      return p->lambda;
    return std::get<GenericMajorant>(v_).eval(0.0);
  }

  double operator()(double t) const
  {
    detail::require_time(t);
    if (const auto* e = as<ExponentialMajorant>())
      return e->lambda * std::exp(e->b * t);
    if (const auto* p = as<PowerMajorant>())
      return p->lambda * std::pow(1.0 + t, p->nu);
    const double v = std::get<GenericMajorant>(v_).eval(t);
    detail::require(v > 0.0, "generic majorant must stay positive");
    return v;
  }

  double derivative(double t) const
  {
    detail::require_time(t);
    if (const auto* e = as<ExponentialMajorant>())
      return e->lambda * e->b * std::exp(e->b * t);
    if (const auto* p = as<PowerMajorant>())
      return p->lambda * p->nu * std::pow(1.0 + t, p->nu - 1.0);
    return std::get<GenericMajorant>(v_).deriv(t);
  }

  /// mu'(t) / mu(t), computed without forming the ratio for the analytic variants.
  double log_derivative(double t) const
  {
    detail::require_time(t);
    if (const auto* e = as<ExponentialMajorant>())
      return e->b;
    if (const auto* p = as<PowerMajorant>())
      return p->nu / (1.0 + t);
    return derivative(t) / (*this)(t);
  }

  /// mu(t) -> infinity is provable from the parameters alone.
  bool provably_unbounded() const
  {
    if (const auto* e = as<ExponentialMajorant>())
      return e->b > 0.0;
    if (const auto* p = as<PowerMajorant>())
      return p->nu > 0.0;
    return false;
  }

private:
  void validate() const
  {
    if (const auto* e = as<ExponentialMajorant>())
    {
      detail::require(std::isfinite(e->lambda) && e->lambda > 0.0, "majorant lambda must be positive");
      detail::require(std::isfinite(e->b), "majorant rate b must be finite");
    }
    else if (const auto* p = as<PowerMajorant>())
    {
      detail::require(std::isfinite(p->lambda) && p->lambda > 0.0, "majorant lambda must be positive");
      detail::require(std::isfinite(p->nu), "majorant exponent nu must be finite");
    }
    else
    {
      const auto& g = std::get<GenericMajorant>(v_);
      detail::require(static_cast<bool>(g.eval) && static_cast<bool>(g.deriv), "generic majorant needs eval and deriv");
      detail::require(g.eval(0.0) > 0.0, "generic majorant must be positive at t = 0");
    }
  }

  Variant v_;
};

inline double eval_majorant(const Majorant& m, double t) { return m(t); }
inline double deriv_majorant(const Majorant& m, double t) { return m.derivative(t); }

} // namespace decaycert
