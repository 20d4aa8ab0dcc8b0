#pragma once

/** @file decaycert/scenario.hpp
    @brief JSON scenario files: parsing, validation and family (de)serialization.

    Errors carry the command-line exit code they map to: 2 for unparsable
    files, 3 for validation failures (with the offending field path) and 4
    for I/O failures.
*/

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "decaycert/discrete.hpp"
#include "decaycert/families.hpp"
#include "decaycert/grid.hpp"
#include "decaycert/inequality.hpp"
#include "decaycert/simulator.hpp"
#include "decaycert/synthesis.hpp"

namespace decaycert
{

using json = nlohmann::json;

enum ExitCode : int
{
  exit_pass = 0,
  exit_fail = 1,
  exit_parse = 2,
  exit_validation = 3,
  exit_io = 4,
};

class ScenarioError : public std::runtime_error
{
public:
  ScenarioError(ExitCode code, const std::string& message) : std::runtime_error(message), code_(code) {}
  ExitCode code() const noexcept { return code_; }

private:
  ExitCode code_;
};

struct ValidationError : ScenarioError
{
  ValidationError(const std::string& field, const std::string& message)
      : ScenarioError(exit_validation, field + ": " + message), field(field)
  {
  }
  std::string field;
};

enum class Mode
{
  certify,
  simulate,
  synthesize,
  discrete,
  end2end,
};

inline const char* to_string(Mode m)
{
  switch (m)
  {
    case Mode::certify: return "certify";
    case Mode::simulate: return "simulate";
    case Mode::synthesize: return "synthesize";
    case Mode::discrete: return "discrete";
    case Mode::end2end: return "end2end";
  }
  return "?";
}

inline std::optional<Mode> parse_mode(const std::string& s)
{
  for (Mode m : {Mode::certify, Mode::simulate, Mode::synthesize, Mode::discrete, Mode::end2end})
    if (s == to_string(m))
      return m;
  return std::nullopt;
}

inline std::optional<Regime> parse_regime(const std::string& s)
{
  for (Regime r : {Regime::exponential, Regime::exponential_from_u0, Regime::power, Regime::forced})
    if (s == to_string(r))
      return r;
  return std::nullopt;
}

struct GridSpec
{
  double t_end = 50.0;
  long long points = 2048;
  bool geometric = true;

  TimeGrid build() const { return geometric ? TimeGrid::geometric(t_end, static_cast<std::size_t>(points))
                                            : TimeGrid::uniform(t_end, static_cast<std::size_t>(points)); }
};

struct DiscreteSpec
{
  DiscreteScheme scheme;
  double g0;
};

struct Scenario
{
  std::string name = "scenario";
  Mode mode = Mode::certify;
  std::optional<ProblemConstants> constants;
  std::optional<Regime> regime;
  std::optional<Nonlinearity> alpha;
  std::optional<CoefficientFunction> beta;
  std::optional<CoefficientFunction> gamma;
  std::optional<Majorant> mu;
  std::optional<SynthesisResult> synthesis; ///< set when the majorant was synthesized
  std::optional<double> g0;
  std::optional<EvolutionProblem<double>> problem;
  std::optional<DiscreteSpec> discrete;
  GridSpec grid;
  double tol = kDefaultTolerance;
  std::filesystem::path output = "decaycert-out";
};

// ---------------------------------------------------------------------------
// Field readers
// ---------------------------------------------------------------------------

namespace detail
{

inline std::string join(const std::string& path, const std::string& key)
{
  return path.empty() ? key : path + "." + key;
}

inline const json& field(const json& obj, const std::string& path, const std::string& key)
{
  if (!obj.is_object() || !obj.contains(key))
    throw ValidationError(join(path, key), "required field is missing");
  return obj.at(key);
}

inline double number(const json& v, const std::string& path)
{
  if (!v.is_number())
    throw ValidationError(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x))
    throw ValidationError(path, "must be finite");
  return x;
}

inline double number_at(const json& obj, const std::string& path, const std::string& key)
{
  return number(field(obj, path, key), join(path, key));
}

inline std::optional<double> optional_number(const json& obj, const std::string& path, const std::string& key)
{
  if (!obj.contains(key))
    return std::nullopt;
  return number(obj.at(key), join(path, key));
}

inline std::string string_at(const json& obj, const std::string& path, const std::string& key)
{
  const auto& v = field(obj, path, key);
  if (!v.is_string())
    throw ValidationError(join(path, key), "expected a string");
  return v.get<std::string>();
}

inline std::vector<double> number_list(const json& v, const std::string& path)
{
  if (!v.is_array())
    throw ValidationError(path, "expected a list of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline Mat<double> matrix(const json& v, const std::string& path)
{
  if (!v.is_array() || v.empty())
    throw ValidationError(path, "expected a nonempty row-major list of rows");
  const auto rows = static_cast<Eigen::Index>(v.size());
  Mat<double> m;
  for (Eigen::Index i = 0; i < rows; ++i)
  {
    const auto row = number_list(v[static_cast<std::size_t>(i)], path + "[" + std::to_string(i) + "]");
    if (i == 0)
      m.resize(rows, static_cast<Eigen::Index>(row.size()));
    if (static_cast<Eigen::Index>(row.size()) != m.cols())
      throw ValidationError(path, "rows have different lengths");
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      m(i, j) = row[static_cast<std::size_t>(j)];
  }
  if (m.rows() != m.cols())
    throw ValidationError(path, "matrix must be square");
  return m;
}

/// Runs a constructor and turns std::invalid_argument into a ValidationError at path.
template <class F>
auto validated(const std::string& path, F&& make)
{
  try
  {
    return make();
  }
  catch (const std::invalid_argument& e)
  {
    throw ValidationError(path, e.what());
  }
}

} // namespace detail

// ---------------------------------------------------------------------------
// Family serialization
// ---------------------------------------------------------------------------

inline json to_json(const CoefficientFunction& f)
{
  return std::visit([](const auto& v) -> json {
    using T = std::decay_t<decltype(v)>;
    if constexpr (std::is_same_v<T, Constant>)
      return {{"kind", "constant"}, {"c", v.c}};
    else if constexpr (std::is_same_v<T, PowerDecay>)
      return {{"kind", "power_decay"}, {"c", v.c}, {"q", v.q}};
    else if constexpr (std::is_same_v<T, ExponentialDecay>)
      return {{"kind", "exponential_decay"}, {"c", v.c}, {"r", v.r}};
    else
      return {{"kind", "tabulated"}, {"knots", v.knots}, {"values", v.values}};
  }, f.variant());
}

inline CoefficientFunction coefficient_from_json(const json& j, const std::string& path)
{
  using namespace detail;
  if (j.is_number())
    return validated(path, [&] { return CoefficientFunction::constant(number(j, path)); });
  const std::string kind = string_at(j, path, "kind");
  return validated(path, [&]() -> CoefficientFunction {
    if (kind == "constant")
      return CoefficientFunction::constant(number_at(j, path, "c"));
    if (kind == "zero")
      return CoefficientFunction::zero();
    if (kind == "power_decay")
      return CoefficientFunction::power_decay(number_at(j, path, "c"), number_at(j, path, "q"));
    if (kind == "exponential_decay")
      return CoefficientFunction::exponential_decay(number_at(j, path, "c"), number_at(j, path, "r"));
    if (kind == "tabulated")
      return CoefficientFunction::tabulated(number_list(field(j, path, "knots"), join(path, "knots")),
                                            number_list(field(j, path, "values"), join(path, "values")));
    throw ValidationError(join(path, "kind"), "unknown coefficient kind '" + kind + "'");
  });
}

inline json to_json(const Nonlinearity& a)
{
  if (const auto* law = a.as<PowerLaw>())
    return {{"kind", "power_law"}, {"c0", law->c0}, {"p", law->p}};
  const auto& tab = *a.as<TabulatedAlpha>();
  return {{"kind", "tabulated"}, {"times", tab.times}, {"g_knots", tab.g_knots}, {"values", tab.values}};
}

inline Nonlinearity nonlinearity_from_json(const json& j, const std::string& path)
{
  using namespace detail;
  const std::string kind = string_at(j, path, "kind");
  return validated(path, [&]() -> Nonlinearity {
    if (kind == "zero")
      return Nonlinearity::zero();
    if (kind == "power_law")
      return Nonlinearity::power_law(number_at(j, path, "c0"), number_at(j, path, "p"));
    if (kind == "tabulated")
    {
      TabulatedAlpha tab;
      tab.times = number_list(field(j, path, "times"), join(path, "times"));
      tab.g_knots = number_list(field(j, path, "g_knots"), join(path, "g_knots"));
      const auto& rows = field(j, path, "values");
      if (!rows.is_array())
        throw ValidationError(join(path, "values"), "expected a list of rows");
      for (std::size_t i = 0; i < rows.size(); ++i)
        tab.values.push_back(number_list(rows[i], join(path, "values") + "[" + std::to_string(i) + "]"));
      return Nonlinearity(std::move(tab));
    }
    throw ValidationError(join(path, "kind"), "unknown nonlinearity kind '" + kind + "'");
  });
}

/// Generic majorants carry code and have no serialized form.
inline json to_json(const Majorant& m)
{
  if (const auto* e = m.as<ExponentialMajorant>())
    return {{"kind", "exponential"}, {"lambda", e->lambda}, {"b", e->b}};
  if (const auto* p = m.as<PowerMajorant>())
    return {{"kind", "power"}, {"lambda", p->lambda}, {"nu", p->nu}};
  throw std::invalid_argument("generic majorants cannot be serialized");
}

inline Majorant majorant_from_json(const json& j, const std::string& path)
{
  using namespace detail;
  const std::string kind = string_at(j, path, "kind");
  return validated(path, [&]() -> Majorant {
    if (kind == "exponential")
      return Majorant::exponential(number_at(j, path, "lambda"), number_at(j, path, "b"));
    if (kind == "power")
      return Majorant::power(number_at(j, path, "lambda"), number_at(j, path, "nu"));
    throw ValidationError(join(path, "kind"), "unknown majorant kind '" + kind + "'");
  });
}

// ---------------------------------------------------------------------------
// Sections
// ---------------------------------------------------------------------------

namespace detail
{

inline ProblemConstants constants_from_json(const json& j)
{
  const std::string path = "constants";
  if (!j.is_object())
    throw ValidationError(path, "expected an object");
  ProblemConstants c;
  c.c0 = number_at(j, path, "c0");
  c.p = number_at(j, path, "p");
  if (c.c0 < 0.0)
    throw ValidationError("constants.c0", "c0 must be nonnegative");
  if (!(c.p > 1.0))
    throw ValidationError("constants.p", "p must exceed 1");
  c.k = optional_number(j, path, "k");
  c.c1 = optional_number(j, path, "c1");
  c.q1 = optional_number(j, path, "q1");
  c.c2 = optional_number(j, path, "c2");
  c.q2 = optional_number(j, path, "q2");
  c.epsilon = optional_number(j, path, "epsilon");
  c.nu = optional_number(j, path, "nu");
  c.u0_norm = optional_number(j, path, "u0_norm");
  auto positive = [](const std::optional<double>& v, const char* key) {
    if (v && !(*v > 0.0))
      throw ValidationError(std::string("constants.") + key, "must be positive");
  };
  positive(c.k, "k");
  positive(c.c1, "c1");
  positive(c.c2, "c2");
  positive(c.q2, "q2");
  positive(c.epsilon, "epsilon");
  positive(c.nu, "nu");
  positive(c.u0_norm, "u0_norm");
  if (c.q1 && (*c.q1 < 0.0 || *c.q1 > 1.0))
    throw ValidationError("constants.q1", "q1 must lie in [0, 1]");
  return c;
}

inline EvolutionProblem<double> problem_from_json(const json& j)
{
  const std::string path = "problem";
  const auto& a = field(j, path, "A");
  const std::string a_kind = string_at(a, "problem.A", "kind");
  const Mat<double> m = matrix(field(a, "problem.A", "matrix"), "problem.A.matrix");
  const auto n = m.rows();

  LinearOperator<double> op = validated("problem.A", [&]() -> LinearOperator<double> {
    if (a_kind == "constant")
      return ConstantMatrix<double>{m};
    if (a_kind == "scaled")
      return ScaledMatrix<double>{m, coefficient_from_json(field(a, "problem.A", "s"), "problem.A.s")};
    throw ValidationError("problem.A.kind", "unknown operator kind '" + a_kind + "'");
  });

  NonlinearTerm<double> f = ZeroNonlinearity<double>{};
  if (j.contains("F"))
  {
    const auto& fj = j.at("F");
    const std::string kind = string_at(fj, "problem.F", "kind");
    if (kind == "norm_power")
    {
      NormPower<double> np{number_at(fj, "problem.F", "c0"), number_at(fj, "problem.F", "p"),
                           Mat<double>::Identity(n, n)};
      if (fj.contains("D"))
        np.d = matrix(fj.at("D"), "problem.F.D");
      if (!(np.p > 1.0))
        throw ValidationError("problem.F.p", "p must exceed 1");
      f = np;
    }
    else if (kind != "zero")
      throw ValidationError("problem.F.kind", "unknown nonlinearity kind '" + kind + "'");
  }

  Forcing<double> b = ZeroForcing<double>{};
  if (j.contains("b"))
  {
    const auto& bj = j.at("b");
    const std::string kind = string_at(bj, "problem.b", "kind");
    if (kind == "envelope")
    {
      const auto e = number_list(field(bj, "problem.b", "e"), "problem.b.e");
      b = EnvelopeForcing<double>{coefficient_from_json(field(bj, "problem.b", "beta"), "problem.b.beta"),
                                  Eigen::Map<const Vec<double>>(e.data(), static_cast<Eigen::Index>(e.size()))};
    }
    else if (kind != "zero")
      throw ValidationError("problem.b.kind", "unknown forcing kind '" + kind + "'");
  }

  const auto u0 = number_list(field(j, path, "u0"), "problem.u0");
  Vec<double> u(static_cast<Eigen::Index>(u0.size()));
  for (std::size_t i = 0; i < u0.size(); ++i)
    u[static_cast<Eigen::Index>(i)] = u0[i];

  return validated(path, [&] { return EvolutionProblem<double>(op, f, b, u); });
}

/// A scalar broadcast to n entries, or an explicit list of n entries.
inline std::vector<double> sequence(const json& j, const std::string& path, std::size_t n)
{
  if (j.is_number())
    return std::vector<double>(n, number(j, path));
  auto v = number_list(j, path);
  if (v.size() != n)
    throw ValidationError(path, "expected " + std::to_string(n) + " entries");
  return v;
}

inline DiscreteSpec discrete_from_json(const json& j)
{
  const std::string path = "discrete";
  const double n_raw = number_at(j, path, "n_max");
  if (!(n_raw >= 1.0) || n_raw != std::floor(n_raw))
    throw ValidationError("discrete.n_max", "must be a positive integer");
  const auto n = static_cast<std::size_t>(n_raw);
  auto h = sequence(field(j, path, "h"), "discrete.h", n);
  auto gamma = sequence(field(j, path, "gamma"), "discrete.gamma", n);
  auto beta = j.contains("beta") ? sequence(j.at("beta"), "discrete.beta", n) : std::vector<double>(n, 0.0);
  const Nonlinearity alpha = j.contains("alpha") ? nonlinearity_from_json(j.at("alpha"), "discrete.alpha")
                                                 : Nonlinearity::zero();

  std::vector<double> mu;
  bool time_map = false;
  const auto& mj = field(j, path, "mu");
  if (mj.is_array())
  {
    mu = number_list(mj, "discrete.mu");
    if (mu.size() != n + 1)
      throw ValidationError("discrete.mu", "expected n_max + 1 entries");
  }
  else
  {
    const std::string kind = string_at(mj, "discrete.mu", "kind");
    if (kind == "geometric")
    {
      const double mu0 = number_at(mj, "discrete.mu", "mu0");
      const double ratio = number_at(mj, "discrete.mu", "ratio");
      mu.resize(n + 1);
      for (std::size_t i = 0; i <= n; ++i)
        mu[i] = mu0 * std::pow(ratio, static_cast<double>(i));
    }
    else
    {
      // A continuous majorant sampled at t_n = h_0 + ... + h_{n-1}.
      const Majorant m = majorant_from_json(mj, "discrete.mu");
      mu.resize(n + 1);
      double t = 0.0;
      for (std::size_t i = 0; i <= n; ++i)
      {
        mu[i] = m(t);
        if (i < n)
          t += h[i];
      }
      time_map = true;
    }
  }
  const double g0 = number_at(j, path, "g0");
  if (g0 < 0.0)
    throw ValidationError("discrete.g0", "must be nonnegative");
  return validated(path, [&] {
    return DiscreteSpec{DiscreteScheme(std::move(h), std::move(gamma), std::move(beta), std::move(mu), alpha, time_map), g0};
  });
}

inline GridSpec grid_from_json(const json& j)
{
  GridSpec g;
  if (auto t = optional_number(j, "grid", "t_end"))
    g.t_end = *t;
  if (auto n = optional_number(j, "grid", "points"))
  {
    if (*n != std::floor(*n))
      throw ValidationError("grid.points", "must be an integer");
    g.points = static_cast<long long>(*n);
  }
  if (j.contains("spacing"))
  {
    const std::string s = string_at(j, "grid", "spacing");
    if (s != "geometric" && s != "uniform")
      throw ValidationError("grid.spacing", "expected 'geometric' or 'uniform'");
    g.geometric = s == "geometric";
  }
  return g;
}

} // namespace detail

/// Checks mode requirements and resolves the families (synthesizing mu when a regime is given).
inline void validate_scenario(Scenario& s)
{
  if (s.grid.points < 2)
    throw ValidationError("grid.points", "grid needs at least two points");
  if (!(s.grid.t_end > 0.0))
    throw ValidationError("grid.t_end", "horizon must be positive");
  if (!(s.tol >= 0.0))
    throw ValidationError("tol", "tolerance must be nonnegative");

  auto need = [](bool present, const char* field, const char* why) {
    if (!present)
      throw ValidationError(field, std::string("required for ") + why);
  };

  if (s.regime)
  {
    need(s.constants.has_value(), "constants", "a regime");
    if (*s.regime == Regime::exponential_from_u0 && !s.constants->u0_norm)
    {
      if (s.problem)
        s.constants->u0_norm = s.problem->u0().norm();
      else if (s.g0)
        s.constants->u0_norm = *s.g0;
    }
    const RegimeFamilies fam = detail::validated("constants", [&] { return regime_families(*s.constants, *s.regime); });
    if (!s.alpha)
      s.alpha = fam.alpha;
    if (!s.beta)
      s.beta = fam.beta;
    if (!s.gamma)
      s.gamma = fam.gamma;
    s.synthesis = detail::validated("constants", [&] { return synthesize(*s.constants, *s.regime); });
    if (!s.mu)
      s.mu = s.synthesis->majorant;
  }
  else if (s.constants && !s.alpha)
  {
    s.alpha = Nonlinearity::power_law(s.constants->c0, s.constants->p);
  }

  switch (s.mode)
  {
    case Mode::certify:
      need(s.alpha.has_value(), "families.alpha", "certify (or give constants)");
      need(s.gamma.has_value(), "families.gamma", "certify (or give constants and regime)");
      need(s.mu.has_value(), "families.mu", "certify (or give constants and regime)");
      if (!s.beta)
        s.beta = CoefficientFunction::zero();
      if (!s.g0 && s.problem)
        s.g0 = s.problem->u0().norm();
      need(s.g0.has_value(), "g0", "certify");
      break;
    case Mode::simulate:
      need(s.problem.has_value(), "problem", "simulate");
      break;
    case Mode::synthesize:
      need(s.constants.has_value(), "constants", "synthesize");
      need(s.regime.has_value(), "regime", "synthesize");
      break;
    case Mode::discrete:
      need(s.discrete.has_value(), "discrete", "discrete");
      break;
    case Mode::end2end:
      need(s.constants.has_value(), "constants", "end2end");
      need(s.regime.has_value(), "regime", "end2end");
      need(s.problem.has_value(), "problem", "end2end");
      break;
  }
}

/// Builds a validated Scenario from parsed JSON for the given mode.
inline Scenario scenario_from_json(const json& j, Mode mode)
{
  if (!j.is_object())
    throw ValidationError("<root>", "scenario must be a JSON object");
  Scenario s;
  s.mode = mode;
  if (j.contains("mode"))
  {
    const std::string m = detail::string_at(j, "", "mode");
    const auto parsed = parse_mode(m);
    if (!parsed)
      throw ValidationError("mode", "unknown mode '" + m + "'");
    if (*parsed != mode)
      throw ValidationError("mode", "scenario declares mode '" + m + "' but was run as '" + to_string(mode) + "'");
  }
  if (j.contains("name"))
    s.name = detail::string_at(j, "", "name");
  if (j.contains("constants"))
    s.constants = detail::constants_from_json(j.at("constants"));
  if (j.contains("regime"))
  {
    const std::string r = detail::string_at(j, "", "regime");
    s.regime = parse_regime(r);
    if (!s.regime)
      throw ValidationError("regime", "unknown regime '" + r + "'");
  }
  if (j.contains("families"))
  {
    const auto& f = j.at("families");
    if (f.contains("alpha"))
      s.alpha = nonlinearity_from_json(f.at("alpha"), "families.alpha");
    if (f.contains("beta"))
      s.beta = coefficient_from_json(f.at("beta"), "families.beta");
    if (f.contains("gamma"))
      s.gamma = coefficient_from_json(f.at("gamma"), "families.gamma");
    if (f.contains("mu"))
      s.mu = majorant_from_json(f.at("mu"), "families.mu");
  }
  if (j.contains("g0"))
  {
    s.g0 = detail::number(j.at("g0"), "g0");
    if (*s.g0 < 0.0)
      throw ValidationError("g0", "must be nonnegative");
  }
  if (j.contains("problem"))
    s.problem = detail::problem_from_json(j.at("problem"));
  if (j.contains("discrete"))
    s.discrete = detail::discrete_from_json(j.at("discrete"));
  if (j.contains("grid"))
    s.grid = detail::grid_from_json(j.at("grid"));
  if (j.contains("tol"))
    s.tol = detail::number(j.at("tol"), "tol");
  if (j.contains("output"))
    s.output = detail::string_at(j, "", "output");
  else
    s.output = std::filesystem::path("decaycert-out") / s.name;
  validate_scenario(s);
  return s;
}

/// Command-line settings that take precedence over the scenario file.
struct ScenarioOverrides
{
  std::optional<long long> grid_points;
  std::optional<double> t_end;
  std::optional<double> tol;
  std::optional<std::filesystem::path> output;
};

inline json parse_scenario_file(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw ScenarioError(exit_io, "cannot open scenario file " + path.string());
  try
  {
    return json::parse(in, nullptr, true, true);
  }
  catch (const json::parse_error& e)
  {
    throw ScenarioError(exit_parse, "cannot parse " + path.string() + ": " + e.what());
  }
}

inline Scenario load_scenario(const std::filesystem::path& path, Mode mode, const ScenarioOverrides& over = {})
{
  json j = parse_scenario_file(path);
  if (j.is_object())
  {
    if (over.grid_points)
      j["grid"]["points"] = *over.grid_points;
    if (over.t_end)
      j["grid"]["t_end"] = *over.t_end;
    if (over.tol)
      j["tol"] = *over.tol;
    if (over.output)
      j["output"] = over.output->string();
  }
  return scenario_from_json(j, mode);
}

} // namespace decaycert
