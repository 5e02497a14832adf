#include "dskde/lattice.hpp"

#include <cmath>

namespace dskde {

Grid2<double> Volume::slice_grid(std::size_t g) const
{
  auto s = slice(g);
  return Grid2<double>(rows_, cols_, std::vector<double>(s.begin(), s.end()));
}

FrameStack::FrameStack(std::size_t n,
                       std::size_t rows,
                       std::size_t cols,
                       std::vector<double> values)
  : n_(n)
  , rows_(rows)
  , cols_(cols)
  , values_(std::move(values))
{
  if (values_.size() != n_ * rows_ * cols_)
    throw std::invalid_argument("FrameStack: expected " +
                                std::to_string(n_ * rows_ * cols_) +
                                " values, got " + std::to_string(values_.size()));
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument("FrameStack: pixel value outside [0, 1]");
  }
}

FrameStack FrameStack::from_frames(std::span<const Frame> frames)
{
  if (frames.empty())
    return {};
  const auto rows = frames.front().rows();
  const auto cols = frames.front().cols();
  std::vector<double> values;
  values.reserve(frames.size() * rows * cols);
  for (const auto& f : frames) {
    if (!f.same_shape(rows, cols))
      throw std::invalid_argument("FrameStack: frames have mixed dimensions");
    values.insert(values.end(), f.values().begin(), f.values().end());
  }
  return FrameStack(frames.size(), rows, cols, std::move(values));
}

Frame FrameStack::frame(std::size_t i) const
{
  auto v = frame_values(i);
  return Frame(rows_, cols_, std::vector<double>(v.begin(), v.end()));
}

} // namespace dskde
