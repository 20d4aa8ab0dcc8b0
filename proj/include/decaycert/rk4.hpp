#pragma once

/** @file decaycert/rk4.hpp
    @brief Classical fourth-order Runge-Kutta on a prescribed grid with step halving.

    Each grid interval is integrated with n and 2n equal substeps; n doubles
    until the two results agree to the relative tolerance. The finer result is
    kept. The State type only needs `State + double * State` and a norm.
*/

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "decaycert/grid.hpp"

namespace decaycert
{

struct IntegratorOptions
{
  double rel_tol = 1e-8;
  double overflow_guard = 1e300;
  int max_halvings = 22;
};

struct IntegratorDiagnostics
{
  std::size_t rhs_evaluations = 0;
  std::size_t substeps = 0;
  std::size_t unconverged_intervals = 0;
  std::size_t max_substeps_per_interval = 0;
  double max_error_estimate = 0.0;
};

template <class State>
struct GridSolution
{
  std::vector<State> states;          ///< one per reached grid point
  std::optional<double> blow_up_time; ///< first substep time at which the guard tripped
  IntegratorDiagnostics diagnostics;
};

namespace detail
{

template <class State>
struct SubstepRun
{
  State y;
  std::optional<double> blow_up_time;
};

template <class State, class Rhs, class Norm>
SubstepRun<State> rk4_substeps(const Rhs& rhs, const State& y0, double t0, double t1, std::size_t n,
                               const Norm& norm, double guard, IntegratorDiagnostics& diag)
{
  const double h = (t1 - t0) / static_cast<double>(n);
  State y = y0;
  for (std::size_t i = 0; i < n; ++i)
  {
    const double t = t0 + h * static_cast<double>(i);
    const State k1 = rhs(t, y);
    const State k2 = rhs(t + 0.5 * h, State(y + (0.5 * h) * k1));
    const State k3 = rhs(t + 0.5 * h, State(y + (0.5 * h) * k2));
    const State k4 = rhs(t + h, State(y + h * k3));
    y = State(y + (h / 6.0) * State(k1 + 2.0 * k2 + 2.0 * k3 + k4));
    diag.rhs_evaluations += 4;
    ++diag.substeps;
    const double size = norm(y);
    if (!std::isfinite(size) || size > guard)
      return {y, i + 1 == n ? t1 : t0 + h * static_cast<double>(i + 1)};
  }
  return {y, std::nullopt};
}

} // namespace detail

/// Integrates y' = rhs(t, y), y(0) = y0 and samples the solution at every grid point.
template <class State, class Rhs, class Norm>
GridSolution<State> integrate_on_grid(const Rhs& rhs, const State& y0, const TimeGrid& grid, const Norm& norm,
                                      const IntegratorOptions& opts = {})
{
  GridSolution<State> out;
  out.states.reserve(grid.size());
  out.states.push_back(y0);
  auto& diag = out.diagnostics;
  const std::size_t max_substeps = std::size_t{1} << opts.max_halvings;

  State y = y0;
  std::size_t start_n = 1;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
  {
    const double t0 = grid[i];
    const double t1 = grid[i + 1];
    std::size_t n = start_n;
    auto coarse = detail::rk4_substeps(rhs, y, t0, t1, n, norm, opts.overflow_guard, diag);
    for (;;)
    {
      auto fine = detail::rk4_substeps(rhs, y, t0, t1, 2 * n, norm, opts.overflow_guard, diag);
      const bool finite = !coarse.blow_up_time && !fine.blow_up_time;
      if (finite)
      {
        const double scale = std::max(norm(fine.y), norm(coarse.y));
        const double err = norm(State(fine.y - coarse.y));
        if (err <= opts.rel_tol * scale)
        {
          diag.max_error_estimate = std::max(diag.max_error_estimate, scale > 0.0 ? err / scale : 0.0);
          y = fine.y;
          diag.max_substeps_per_interval = std::max(diag.max_substeps_per_interval, 2 * n);
          start_n = std::max<std::size_t>(1, n / 2);
          break;
        }
      }
      if (2 * n >= max_substeps)
      {
        if (fine.blow_up_time)
        {
          out.blow_up_time = fine.blow_up_time;
          return out;
        }
        ++diag.unconverged_intervals;
        y = fine.y;
        diag.max_substeps_per_interval = std::max(diag.max_substeps_per_interval, 2 * n);
        start_n = std::max<std::size_t>(1, n / 2);
        break;
      }
      coarse = std::move(fine);
      n *= 2;
    }
    out.states.push_back(y);
  }
  return out;
}

} // namespace decaycert
