#include "dskde/estimators.hpp"

#include "dskde/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace dskde {

namespace {

void require_bandwidth(double h, const char* what)
{
  if (!(h > 0.0) || !std::isfinite(h))
    throw std::invalid_argument(std::string(what) + ": bandwidth must be positive");
}

void require_pixel(bool inside, Pixel px, const char* what)
{
  if (!inside)
    throw std::out_of_range(std::string(what) + ": pixel (" + std::to_string(px.row) + ", " +
                            std::to_string(px.col) + ") is outside the lattice");
}

// exp(-t^2/2) for |d| = 0..radius, t = d / (h * extent)
std::vector<double> axis_weights(double h, std::size_t extent, std::size_t radius)
{
  std::vector<double> w(radius + 1);
  const double scale = 1.0 / (h * static_cast<double>(extent));
  for (std::size_t d = 0; d <= radius; ++d) {
    const double t = static_cast<double>(d) * scale;
    w[d] = std::exp(-0.5 * t * t);
  }
  return w;
}

// Normalizer of the in-bounds window at every position along one axis.
std::vector<double> axis_norms(std::span<const double> w, std::size_t extent)
{
  const auto r = static_cast<std::ptrdiff_t>(w.size()) - 1;
  const auto n = static_cast<std::ptrdiff_t>(extent);
  std::vector<double> norm(extent);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::ptrdiff_t k = std::max<std::ptrdiff_t>(0, i - r); k <= std::min(n - 1, i + r); ++k)
      s += w[static_cast<std::size_t>(std::abs(k - i))];
    norm[static_cast<std::size_t>(i)] = s;
  }
  return norm;
}

double uniform_open01(std::mt19937_64& rng)
{
  for (;;) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    if (u > 0.0)
      return u;
  }
}

} // namespace

double cd_estimate(const FrameStack& stack, double x, Pixel px, double h)
{
  require_bandwidth(h, "cd_estimate");
  require_pixel(stack.contains(px), px, "cd_estimate");
  if (stack.empty())
    throw std::invalid_argument("cd_estimate: empty stack");
  std::vector<double> samples(stack.n());
  for (std::size_t i = 0; i < stack.n(); ++i)
    samples[i] = stack(i, px.row, px.col);
  // same arithmetic as cd_grid, so the two agree bit for bit
  const double scale = inv_sqrt_2pi / (static_cast<double>(stack.n()) * h);
  return scale * gauss_sum(samples, x, 1.0 / h);
}

Volume cd_grid(const FrameStack& stack, std::span<const double> points, double h)
{
  require_bandwidth(h, "cd_grid");
  if (points.empty())
    throw std::invalid_argument("cd_grid: empty value grid");
  if (stack.empty())
    throw std::invalid_argument("cd_grid: empty stack");

  const std::size_t n = stack.n();
  const std::size_t rows = stack.rows();
  const std::size_t cols = stack.cols();
  const double scale = inv_sqrt_2pi / (static_cast<double>(n) * h);
  const double inv_h = 1.0 / h;

  Volume out(points.size(), rows, cols);
  // one lattice row at a time, transposed so each pixel's samples are contiguous
  std::vector<double> samples(cols * n);
  std::vector<double> sums(points.size());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto frame = stack.frame_values(i);
      for (std::size_t c = 0; c < cols; ++c)
        samples[c * n + i] = frame[r * cols + c];
    }
    for (std::size_t c = 0; c < cols; ++c) {
      gauss_sums(std::span<const double>(samples).subspan(c * n, n), points, inv_h, sums);
      for (std::size_t g = 0; g < points.size(); ++g)
        out(g, r, c) = scale * sums[g];
    }
  }
  return out;
}

std::size_t truncation_radius(double h, std::size_t extent, double radius_bandwidths)
{
  require_bandwidth(h, "truncation_radius");
  if (!(radius_bandwidths > 0.0))
    throw std::invalid_argument("truncation radius must be positive");
  const double r = std::ceil(radius_bandwidths * h * static_cast<double>(extent));
  // anything beyond the lattice extent is equivalent to no truncation
  const double cap = static_cast<double>(extent);
  return static_cast<std::size_t>(std::min(r, cap));
}

double ds_direct(const Grid2<double>& cd_map, Pixel px, double h, std::optional<double> radius_bandwidths)
{
  require_bandwidth(h, "ds_direct");
  require_pixel(px.row < cd_map.rows() && px.col < cd_map.cols(), px, "ds_direct");
  const std::size_t p = cd_map.rows();
  const std::size_t q = cd_map.cols();
  std::size_t r1 = p;
  std::size_t r2 = q;
  if (radius_bandwidths) {
    r1 = truncation_radius(h, p, *radius_bandwidths);
    r2 = truncation_radius(h, q, *radius_bandwidths);
  }
  const double hp = h * static_cast<double>(p);
  const double hq = h * static_cast<double>(q);

  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < p; ++k) {
    const std::size_t dk = k > px.row ? k - px.row : px.row - k;
    if (dk > r1)
      continue;
    for (std::size_t l = 0; l < q; ++l) {
      const std::size_t dl = l > px.col ? l - px.col : px.col - l;
      if (dl > r2)
        continue;
      const double w = product_kernel(static_cast<double>(dk) / hp, static_cast<double>(dl) / hq);
      num += w * cd_map(k, l);
      den += w;
    }
  }
  if (!(den > 0.0))
    throw std::runtime_error("ds_direct: spatial weights sum to zero");
  return num / den;
}

Volume ds_smooth(const Volume& cd_values, double h, double radius_bandwidths)
{
  require_bandwidth(h, "ds_smooth");
  const std::size_t p = cd_values.rows();
  const std::size_t q = cd_values.cols();
  const std::size_t r1 = truncation_radius(h, p, radius_bandwidths);
  const std::size_t r2 = truncation_radius(h, q, radius_bandwidths);
  const auto w_row = axis_weights(h, p, r1);
  const auto w_col = axis_weights(h, q, r2);
  const auto n_row = axis_norms(w_row, p);
  const auto n_col = axis_norms(w_col, q);

  Volume out(cd_values.slices(), p, q);
  std::vector<double> tmp(p * q);
  const auto ir1 = static_cast<std::ptrdiff_t>(r1);
  const auto ir2 = static_cast<std::ptrdiff_t>(r2);
  const auto ip = static_cast<std::ptrdiff_t>(p);
  const auto iq = static_cast<std::ptrdiff_t>(q);

  for (std::size_t g = 0; g < cd_values.slices(); ++g) {
    const auto src = cd_values.slice(g);
    auto dst = out.slice(g);
    // along columns
    for (std::ptrdiff_t r = 0; r < ip; ++r) {
      const double* row = src.data() + r * iq;
      for (std::ptrdiff_t c = 0; c < iq; ++c) {
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, c - ir2);
        const std::ptrdiff_t hi = std::min(iq - 1, c + ir2);
        double s = 0.0;
        for (std::ptrdiff_t l = lo; l <= hi; ++l)
          s += w_col[static_cast<std::size_t>(std::abs(l - c))] * row[l];
        tmp[static_cast<std::size_t>(r * iq + c)] = s / n_col[static_cast<std::size_t>(c)];
      }
    }
    // along rows
    for (std::ptrdiff_t r = 0; r < ip; ++r) {
      const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, r - ir1);
      const std::ptrdiff_t hi = std::min(ip - 1, r + ir1);
      double* orow = dst.data() + r * iq;
      std::fill(orow, orow + iq, 0.0);
      for (std::ptrdiff_t k = lo; k <= hi; ++k) {
        const double w = w_row[static_cast<std::size_t>(std::abs(k - r))];
        const double* trow = tmp.data() + k * iq;
        for (std::ptrdiff_t c = 0; c < iq; ++c)
          orow[c] += w * trow[c];
      }
      const double inv = 1.0 / n_row[static_cast<std::size_t>(r)];
      for (std::ptrdiff_t c = 0; c < iq; ++c)
        orow[c] *= inv;
    }
  }
  return out;
}

std::vector<double> draw_grid(std::size_t g_star, std::uint64_t seed, GridKind kind)
{
  if (g_star < 1)
    throw std::invalid_argument("draw_grid: need at least one grid point");
  std::vector<double> grid(g_star);
  if (kind == GridKind::evenly_spaced) {
    for (std::size_t g = 0; g < g_star; ++g)
      grid[g] = (static_cast<double>(g) + 0.5) / static_cast<double>(g_star);
    return grid;
  }
  std::mt19937_64 rng(seed);
  for (auto& x : grid)
    x = uniform_open01(rng);
  std::sort(grid.begin(), grid.end());
  // redraw ties until the points are pairwise distinct
  while (std::adjacent_find(grid.begin(), grid.end()) != grid.end()) {
    auto last = std::unique(grid.begin(), grid.end());
    for (auto it = last; it != grid.end(); ++it)
      *it = uniform_open01(rng);
    std::sort(grid.begin(), grid.end());
  }
  return grid;
}

GpaTable::GpaTable(std::vector<double> grid,
                   const Volume& table,
                   BandwidthPlan plan,
                   Variant variant,
                   std::uint64_t seed)
  : grid_(std::move(grid))
  , rows_(table.rows())
  , cols_(table.cols())
  , plan_(plan)
  , variant_(variant)
  , seed_(seed)
{
  if (grid_.empty())
    throw std::invalid_argument("GpaTable: empty value grid");
  if (table.slices() != grid_.size())
    throw std::invalid_argument("GpaTable: table has " + std::to_string(table.slices()) +
                                " slices for " + std::to_string(grid_.size()) + " grid points");
  if (rows_ == 0 || cols_ == 0)
    throw std::invalid_argument("GpaTable: empty lattice");
  for (std::size_t g = 0; g < grid_.size(); ++g) {
    if (!(grid_[g] > 0.0 && grid_[g] < 1.0))
      throw std::invalid_argument("GpaTable: grid point outside (0, 1)");
    if (g > 0 && !(grid_[g] > grid_[g - 1]))
      throw std::invalid_argument("GpaTable: grid is not strictly ascending");
  }
  plan_.validate();

  const std::size_t gs = grid_.size();
  columns_.resize(gs * rows_ * cols_);
  for (std::size_t g = 0; g < gs; ++g) {
    const auto s = table.slice(g);
    for (std::size_t k = 0; k < s.size(); ++k) {
      const double v = s[k];
      if (!(v >= 0.0) || !std::isfinite(v))
        throw std::invalid_argument("GpaTable: negative or non-finite estimate");
      columns_[k * gs + g] = v;
    }
  }
}

Volume GpaTable::to_volume() const
{
  Volume v(grid_.size(), rows_, cols_);
  for (std::size_t g = 0; g < grid_.size(); ++g)
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c)
        v(g, r, c) = value(g, r, c);
  return v;
}

GpaTable gpa_fit(const FrameStack& stack, const BandwidthPlan& plan, const FitOptions& opts)
{
  if (stack.empty())
    throw std::invalid_argument("gpa_fit: empty stack");
  if (opts.g_star < 2)
    throw std::invalid_argument("gpa_fit: need g_star >= 2");
  if (!(plan.sigma_hat > 0.0))
    throw std::invalid_argument("gpa_fit: degenerate stack (sigma_hat = 0)");
  plan.validate();

  auto grid = draw_grid(opts.g_star, opts.seed, opts.grid);
  Volume table = cd_grid(stack, grid, plan.h);
  if (opts.variant == Variant::gpa_ds)
    table = ds_smooth(table, plan.h, opts.radius_bandwidths);
  return GpaTable(std::move(grid), table, plan, opts.variant, opts.seed);
}

double gpa_query(const GpaTable& table, double x_bar, Pixel px, const QueryOptions& opts)
{
  require_pixel(table.contains(px), px, "gpa_query");
  const double h_star = opts.h_star.value_or(table.plan().h_star);
  require_bandwidth(h_star, "gpa_query");

  const auto grid = table.grid();
  const auto values = table.column(px);
  const double inv = 1.0 / h_star;

  // nearest grid point; weights are taken relative to it so that a query far
  // from every grid point does not underflow to 0/0
  const auto it = std::lower_bound(grid.begin(), grid.end(), x_bar);
  double d0 = std::numeric_limits<double>::infinity();
  if (it != grid.end())
    d0 = *it - x_bar;
  if (it != grid.begin())
    d0 = std::min(d0, x_bar - *(it - 1));
  const double t0 = d0 * inv;

  std::size_t lo = 0;
  std::size_t hi = grid.size();
  if (opts.mode == QueryMode::windowed) {
    const double reach = d0 + 10.0 * h_star;
    lo = static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), x_bar - reach) - grid.begin());
    hi = static_cast<std::size_t>(std::upper_bound(grid.begin(), grid.end(), x_bar + reach) - grid.begin());
  }

  double num = 0.0;
  double den = 0.0;
  for (std::size_t g = lo; g < hi; ++g) {
    const double t = (grid[g] - x_bar) * inv;
    const double w = std::exp(-0.5 * (t - t0) * (t + t0));
    num += w * values[g];
    den += w;
  }
  return num / den;
}

DensityMap density_map(const GpaTable& table, const Frame& frame, const QueryOptions& opts)
{
  if (!frame.same_shape(table.rows(), table.cols()))
    throw std::invalid_argument("density_map: frame is " + std::to_string(frame.rows()) + "x" +
                                std::to_string(frame.cols()) + ", model is " +
                                std::to_string(table.rows()) + "x" + std::to_string(table.cols()));
  DensityMap out(frame.rows(), frame.cols());
  for (std::size_t r = 0; r < frame.rows(); ++r)
    for (std::size_t c = 0; c < frame.cols(); ++c)
      out(r, c) = gpa_query(table, frame(r, c), { r, c }, opts);
  return out;
}

} // namespace dskde
