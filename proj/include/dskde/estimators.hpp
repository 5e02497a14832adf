#pragma once

#include "dskde/bandwidth.hpp"
#include "dskde/lattice.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace dskde {

//! Spatial truncation radius in bandwidths. At 3 the dropped Gaussian tail
//! shifts noisy maps by a few 1e-4 relative; at 4 the shift stays below 1e-5.
inline constexpr double default_truncation = 4.0;

//! Classical per-pixel kernel density estimate
//! (1 / (N h)) sum_i K((X_i(s) - x) / h).
double cd_estimate(const FrameStack& stack, double x, Pixel px, double h);

//! CD estimates at every value in `points` for every pixel: entry (g, i, j)
//! equals cd_estimate(stack, points[g], {i, j}, h).
Volume cd_grid(const FrameStack& stack, std::span<const double> points, double h);

//! Spatial truncation radius in pixels along an axis with `extent` pixels:
//! ceil(radius_bandwidths * h * extent).
std::size_t truncation_radius(double h, std::size_t extent, double radius_bandwidths);

//! Brute-force spatial smoothing of one CD map at one pixel with normalized
//! product-kernel weights over every lattice location. With a truncation
//! radius (in bandwidths) only locations inside the per-axis window of
//! truncation_radius() enter. O(M) per call.
double ds_direct(const Grid2<double>& cd_map,
                 Pixel px,
                 double h,
                 std::optional<double> radius_bandwidths = std::nullopt);

//! Separable, truncated spatial smoothing of every slice. Weights are
//! renormalized over the in-bounds part of the window, so each output is a
//! convex combination of its inputs.
Volume ds_smooth(const Volume& cd_values, double h, double radius_bandwidths = default_truncation);

enum class GridKind
{
  uniform_random,
  evenly_spaced
};

//! G* distinct value-grid points in (0, 1), ascending.
std::vector<double> draw_grid(std::size_t g_star, std::uint64_t seed, GridKind kind = GridKind::uniform_random);

//! Immutable fitted model: per-pixel estimates at G* grid values.
class GpaTable
{
public:
  //! `table` is slice-major (one slice per grid point). Throws
  //! std::invalid_argument if the pieces are inconsistent, the grid is not
  //! strictly ascending inside (0, 1), or any entry is negative or not finite.
  GpaTable(std::vector<double> grid,
           const Volume& table,
           BandwidthPlan plan,
           Variant variant,
           std::uint64_t seed);

  std::size_t g_star() const { return grid_.size(); }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::span<const double> grid() const { return grid_; }
  const BandwidthPlan& plan() const { return plan_; }
  Variant variant() const { return variant_; }
  std::uint64_t seed() const { return seed_; }
  bool contains(Pixel px) const { return px.row < rows_ && px.col < cols_; }

  double value(std::size_t g, std::size_t r, std::size_t c) const
  {
    return columns_[(r * cols_ + c) * grid_.size() + g];
  }
  //! The G* precomputed values of one pixel.
  std::span<const double> column(Pixel px) const
  {
    return std::span<const double>(columns_).subspan((px.row * cols_ + px.col) * grid_.size(),
                                                     grid_.size());
  }
  Volume to_volume() const;

  friend bool operator==(const GpaTable&, const GpaTable&) = default;

private:
  std::vector<double> grid_;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> columns_; // pixel-major, G* values per pixel
  BandwidthPlan plan_;
  Variant variant_ = Variant::gpa_ds;
  std::uint64_t seed_ = 0;
};

struct FitOptions
{
  std::size_t g_star = 500;
  Variant variant = Variant::gpa_ds;
  std::uint64_t seed = 0;
  GridKind grid = GridKind::uniform_random;
  double radius_bandwidths = default_truncation;
};

//! Draws the value grid, computes CD estimates on it and, for GPA-DS,
//! smooths them spatially.
GpaTable gpa_fit(const FrameStack& stack, const BandwidthPlan& plan, const FitOptions& opts);

enum class QueryMode
{
  //! Sums only grid points within (nearest distance + 10 h*) of the query.
  windowed,
  //! Sums all G* grid points.
  exact
};

struct QueryOptions
{
  QueryMode mode = QueryMode::windowed;
  //! Overrides the table's h*.
  std::optional<double> h_star;
};

//! Kernel-weighted average of a pixel's precomputed values, weights
//! K((x_g - x_bar) / h*) normalized over the grid.
double gpa_query(const GpaTable& table, double x_bar, Pixel px, const QueryOptions& opts = {});

//! gpa_query at every pixel with the frame's own observed value.
DensityMap density_map(const GpaTable& table, const Frame& frame, const QueryOptions& opts = {});

} // namespace dskde
