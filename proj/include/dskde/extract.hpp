#pragma once

#include "dskde/estimators.hpp"
#include "dskde/lattice.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace dskde {

//! Lattice the default min_area was chosen for.
inline constexpr std::size_t reference_lattice_area = 540 * 960;

struct DetectionParams
{
  double alpha1 = 0.06;        //!< rescaled density above this is background
  double alpha2 = 0.42;        //!< blurred value below this is foreground
  std::size_t pool = 33;       //!< blur window side, odd
  std::size_t min_area = 5500; //!< components smaller than this are dropped
  //! Scale min_area by (p q) / (540 * 960) on other lattice sizes.
  bool scale_min_area = true;
  int connectivity = 8;

  void validate() const;
  std::size_t effective_min_area(std::size_t rows, std::size_t cols) const;
};

//! Half-open pixel rectangle [r0, r1) x [c0, c1).
struct BBox
{
  std::size_t r0 = 0;
  std::size_t r1 = 0;
  std::size_t c0 = 0;
  std::size_t c1 = 0;

  std::size_t area() const { return (r1 - r0) * (c1 - c0); }
  bool valid() const { return r0 < r1 && c0 < c1; }

  friend bool operator==(const BBox&, const BBox&) = default;
};

struct Component
{
  std::size_t area = 0;
  BBox box;
  std::vector<std::size_t> pixels; //!< row-major linear indices, ascending
};

//! (v - min) / (max - min); a constant map becomes all ones.
DensityMap rescale01(const DensityMap& map);

//! Pixels above alpha1 are set to 1.0, the rest are kept.
DensityMap remove_background(const DensityMap& map01, double alpha1);

//! Mean over the in-bounds pool x pool window centred on each pixel.
DensityMap avg_pool_blur(const DensityMap& map, std::size_t pool);

//! 1 where value < alpha2, else 0.
Mask binarize(const DensityMap& map, double alpha2);

//! Maximal connected sets of 1-pixels, ordered by their first pixel in
//! row-major order. connectivity is 4 or 8.
std::vector<Component> connected_components(const Mask& mask, int connectivity);

//! Every intermediate stage of one detection, for debugging and replay.
struct DetectionStages
{
  DensityMap density;
  DensityMap rescaled;
  DensityMap foreground;
  DensityMap blurred;
  Mask mask;
  std::vector<Component> components; //!< after the area filter
  std::optional<BBox> box;
};

//! The pipeline from an already computed density map onwards.
DetectionStages detect_from_density(const DensityMap& density, const DetectionParams& params);

DetectionStages detect_stages(const GpaTable& table, const Frame& frame, const DetectionParams& params);

//! Bounding box of the largest component that survives the area filter.
std::optional<BBox> detect(const GpaTable& table, const Frame& frame, const DetectionParams& params);

} // namespace dskde
