#pragma once

/** @file decaycert/grid.hpp
    @brief Finite time grids on which "for all t >= 0" conditions are sampled.
*/

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "decaycert/families.hpp"

namespace decaycert
{

class TimeGrid
{
public:
  /// Takes ownership of explicit points; they must start at 0 and increase strictly.
  explicit TimeGrid(std::vector<double> points) : points_(std::move(points))
  {
    detail::require(points_.size() >= 2, "time grid needs at least two points");
    detail::require(points_.front() == 0.0, "time grid must start at t = 0");
    for (std::size_t i = 0; i < points_.size(); ++i)
      detail::require(std::isfinite(points_[i]), "time grid points must be finite");
    for (std::size_t i = 1; i < points_.size(); ++i)
      detail::require(points_[i] > points_[i - 1], "time grid must be strictly increasing");
  }

  static TimeGrid uniform(double t_end, std::size_t count)
  {
    detail::require(count >= 2, "time grid needs at least two points");
    detail::require(std::isfinite(t_end) && t_end > 0.0, "grid horizon must be positive");
    std::vector<double> pts(count);
    for (std::size_t i = 0; i < count; ++i)
      pts[i] = t_end * static_cast<double>(i) / static_cast<double>(count - 1);
    pts.back() = t_end;
    return TimeGrid(std::move(pts));
  }

  /// Points t_i = (1 + T)^(i / (n - 1)) - 1: uniform in log(1 + t), dense near 0.
  static TimeGrid geometric(double t_end, std::size_t count)
  {
    detail::require(count >= 2, "time grid needs at least two points");
    detail::require(std::isfinite(t_end) && t_end > 0.0, "grid horizon must be positive");
    const double span = std::log1p(t_end);
    std::vector<double> pts(count);
    for (std::size_t i = 0; i < count; ++i)
      pts[i] = std::expm1(span * static_cast<double>(i) / static_cast<double>(count - 1));
    pts.front() = 0.0;
    pts.back() = t_end;
    return TimeGrid(std::move(pts));
  }

  /// 2048 geometric points on [0, 50].
  static TimeGrid default_grid() { return geometric(50.0, 2048); }

  std::span<const double> points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  double operator[](std::size_t i) const { return points_[i]; }
  double back() const { return points_.back(); }

private:
  std::vector<double> points_;
};

} // namespace decaycert
