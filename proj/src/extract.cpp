#include "dskde/extract.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace dskde {

void DetectionParams::validate() const
{
  if (!(alpha1 > 0.0 && alpha1 < alpha2 && alpha2 < 1.0))
    throw std::invalid_argument("detection thresholds must satisfy 0 < alpha1 < alpha2 < 1");
  if (pool < 1 || pool % 2 == 0)
    throw std::invalid_argument("pool size must be odd, got " + std::to_string(pool));
  if (min_area < 1)
    throw std::invalid_argument("min_area must be at least 1");
  if (connectivity != 4 && connectivity != 8)
    throw std::invalid_argument("connectivity must be 4 or 8");
}

std::size_t DetectionParams::effective_min_area(std::size_t rows, std::size_t cols) const
{
  if (!scale_min_area || rows * cols == reference_lattice_area)
    return min_area;
  const double scaled = static_cast<double>(min_area) * static_cast<double>(rows * cols) /
                        static_cast<double>(reference_lattice_area);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(scaled)));
}

DensityMap rescale01(const DensityMap& map)
{
  DensityMap out(map.rows(), map.cols(), 1.0);
  if (map.empty())
    return out;
  const auto [lo, hi] = std::minmax_element(map.values().begin(), map.values().end());
  const double mn = *lo;
  const double range = *hi - mn;
  if (!(range > 0.0))
    return out;
  for (std::size_t k = 0; k < map.size(); ++k)
    out[k] = (map[k] - mn) / range;
  return out;
}

DensityMap remove_background(const DensityMap& map01, double alpha1)
{
  DensityMap out = map01;
  for (auto& v : out.values())
    if (v > alpha1)
      v = 1.0;
  return out;
}

DensityMap avg_pool_blur(const DensityMap& map, std::size_t pool)
{
  if (pool < 1 || pool % 2 == 0)
    throw std::invalid_argument("avg_pool_blur: pool size must be odd, got " + std::to_string(pool));
  const std::size_t p = map.rows();
  const std::size_t q = map.cols();
  const std::size_t half = pool / 2;

  // summed-area table with a zero border
  std::vector<double> sat((p + 1) * (q + 1), 0.0);
  for (std::size_t r = 0; r < p; ++r) {
    double row_sum = 0.0;
    for (std::size_t c = 0; c < q; ++c) {
      row_sum += map(r, c);
      sat[(r + 1) * (q + 1) + c + 1] = sat[r * (q + 1) + c + 1] + row_sum;
    }
  }

  DensityMap out(p, q);
  for (std::size_t r = 0; r < p; ++r) {
    const std::size_t r0 = r > half ? r - half : 0;
    const std::size_t r1 = std::min(p, r + half + 1);
    for (std::size_t c = 0; c < q; ++c) {
      const std::size_t c0 = c > half ? c - half : 0;
      const std::size_t c1 = std::min(q, c + half + 1);
      const double s = sat[r1 * (q + 1) + c1] - sat[r0 * (q + 1) + c1] -
                       sat[r1 * (q + 1) + c0] + sat[r0 * (q + 1) + c0];
      out(r, c) = s / static_cast<double>((r1 - r0) * (c1 - c0));
    }
  }
  return out;
}

Mask binarize(const DensityMap& map, double alpha2)
{
  Mask out(map.rows(), map.cols(), 0);
  for (std::size_t k = 0; k < map.size(); ++k)
    out[k] = map[k] < alpha2 ? 1 : 0;
  return out;
}

namespace {

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x)
{
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

void unite(std::vector<std::size_t>& parent, std::size_t a, std::size_t b)
{
  a = find_root(parent, a);
  b = find_root(parent, b);
  if (a == b)
    return;
  // keep the smaller provisional label as root
  if (b < a)
    std::swap(a, b);
  parent[b] = a;
}

} // namespace

std::vector<Component> connected_components(const Mask& mask, int connectivity)
{
  if (connectivity != 4 && connectivity != 8)
    throw std::invalid_argument("connectivity must be 4 or 8");
  const std::size_t p = mask.rows();
  const std::size_t q = mask.cols();
  constexpr std::size_t none = static_cast<std::size_t>(-1);

  // first pass: provisional labels, equivalences in a union-find forest
  std::vector<std::size_t> label(p * q, none);
  std::vector<std::size_t> parent;
  for (std::size_t r = 0; r < p; ++r) {
    for (std::size_t c = 0; c < q; ++c) {
      if (!mask(r, c))
        continue;
      std::size_t neighbours[4];
      std::size_t count = 0;
      if (c > 0 && mask(r, c - 1))
        neighbours[count++] = label[r * q + c - 1];
      if (r > 0) {
        if (mask(r - 1, c))
          neighbours[count++] = label[(r - 1) * q + c];
        if (connectivity == 8) {
          if (c > 0 && mask(r - 1, c - 1))
            neighbours[count++] = label[(r - 1) * q + c - 1];
          if (c + 1 < q && mask(r - 1, c + 1))
            neighbours[count++] = label[(r - 1) * q + c + 1];
        }
      }
      if (count == 0) {
        label[r * q + c] = parent.size();
        parent.push_back(parent.size());
        continue;
      }
      std::size_t l = neighbours[0];
      for (std::size_t k = 1; k < count; ++k)
        l = std::min(l, neighbours[k]);
      label[r * q + c] = l;
      for (std::size_t k = 0; k < count; ++k)
        unite(parent, l, neighbours[k]);
    }
  }

  // second pass: components numbered by their first pixel in row-major order
  std::vector<std::size_t> index(parent.size(), none);
  std::vector<Component> out;
  for (std::size_t k = 0; k < p * q; ++k) {
    if (label[k] == none)
      continue;
    const std::size_t root = find_root(parent, label[k]);
    if (index[root] == none) {
      index[root] = out.size();
      Component comp;
      comp.box = BBox{ k / q, k / q + 1, k % q, k % q + 1 };
      out.push_back(std::move(comp));
    }
    auto& comp = out[index[root]];
    const std::size_t r = k / q;
    const std::size_t c = k % q;
    comp.pixels.push_back(k);
    ++comp.area;
    comp.box.r0 = std::min(comp.box.r0, r);
    comp.box.r1 = std::max(comp.box.r1, r + 1);
    comp.box.c0 = std::min(comp.box.c0, c);
    comp.box.c1 = std::max(comp.box.c1, c + 1);
  }
  return out;
}

DetectionStages detect_from_density(const DensityMap& density, const DetectionParams& params)
{
  params.validate();
  DetectionStages st;
  st.density = density;
  st.rescaled = rescale01(density);
  st.foreground = remove_background(st.rescaled, params.alpha1);
  st.blurred = avg_pool_blur(st.foreground, params.pool);
  st.mask = binarize(st.blurred, params.alpha2);

  const std::size_t min_area = params.effective_min_area(density.rows(), density.cols());
  for (auto& comp : connected_components(st.mask, params.connectivity))
    if (comp.area >= min_area)
      st.components.push_back(std::move(comp));

  const Component* best = nullptr;
  for (const auto& comp : st.components)
    if (!best || comp.area > best->area)
      best = &comp;
  if (best)
    st.box = best->box;
  return st;
}

DetectionStages detect_stages(const GpaTable& table, const Frame& frame, const DetectionParams& params)
{
  return detect_from_density(density_map(table, frame), params);
}

std::optional<BBox> detect(const GpaTable& table, const Frame& frame, const DetectionParams& params)
{
  return detect_stages(table, frame, params).box;
}

} // namespace dskde
