#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dskde {

//! A pixel position, 0-based (row, col). Pixel (i, j) sits at
//! s = ((i + 1) / p, (j + 1) / q) on the unit square.
struct Pixel
{
  std::size_t row = 0;
  std::size_t col = 0;

  friend bool operator==(const Pixel&, const Pixel&) = default;
};

//! Row-major 2-d array. Used for frames, density maps and binary masks.
template<typename T>
class Grid2
{
public:
  Grid2() = default;
  Grid2(std::size_t rows, std::size_t cols, T fill = T{})
    : rows_(rows)
    , cols_(cols)
    , data_(rows * cols, fill)
  {}
  Grid2(std::size_t rows, std::size_t cols, std::vector<T> data)
    : rows_(rows)
    , cols_(cols)
    , data_(std::move(data))
  {
    if (data_.size() != rows_ * cols_)
      throw std::invalid_argument("Grid2: data size does not match " +
                                  std::to_string(rows_) + "x" +
                                  std::to_string(cols_));
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const
  {
    return data_[r * cols_ + c];
  }
  T& operator[](std::size_t k) { return data_[k]; }
  const T& operator[](std::size_t k) const { return data_[k]; }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  bool same_shape(std::size_t rows, std::size_t cols) const
  {
    return rows_ == rows && cols_ == cols;
  }
  template<typename U>
  bool same_shape(const Grid2<U>& other) const
  {
    return rows_ == other.rows() && cols_ == other.cols();
  }

  friend bool operator==(const Grid2&, const Grid2&) = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using Frame = Grid2<double>;
using DensityMap = Grid2<double>;
using Mask = Grid2<std::uint8_t>;

//! A stack of 2-d slices sharing one lattice, slice-major then row-major.
//! Holds the G* x p x q tables of CD / DS estimates.
class Volume
{
public:
  Volume() = default;
  Volume(std::size_t slices, std::size_t rows, std::size_t cols, double fill = 0.0)
    : slices_(slices)
    , rows_(rows)
    , cols_(cols)
    , data_(slices * rows * cols, fill)
  {}

  std::size_t slices() const { return slices_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t slice_size() const { return rows_ * cols_; }

  double& operator()(std::size_t g, std::size_t r, std::size_t c)
  {
    return data_[(g * rows_ + r) * cols_ + c];
  }
  double operator()(std::size_t g, std::size_t r, std::size_t c) const
  {
    return data_[(g * rows_ + r) * cols_ + c];
  }

  std::span<double> slice(std::size_t g)
  {
    return std::span<double>(data_).subspan(g * slice_size(), slice_size());
  }
  std::span<const double> slice(std::size_t g) const
  {
    return std::span<const double>(data_).subspan(g * slice_size(), slice_size());
  }
  Grid2<double> slice_grid(std::size_t g) const;

  std::span<const double> values() const { return data_; }

  friend bool operator==(const Volume&, const Volume&) = default;

private:
  std::size_t slices_ = 0;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

//! N grayscale frames on a p x q lattice, values in [0, 1].
class FrameStack
{
public:
  FrameStack() = default;
  //! Values are frame-major then row-major; throws if any value is outside
  //! [0, 1] or the size does not match.
  FrameStack(std::size_t n, std::size_t rows, std::size_t cols, std::vector<double> values);
  static FrameStack from_frames(std::span<const Frame> frames);

  std::size_t n() const { return n_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t lattice_size() const { return rows_ * cols_; }
  bool empty() const { return n_ == 0; }

  double operator()(std::size_t i, std::size_t r, std::size_t c) const
  {
    return values_[(i * rows_ + r) * cols_ + c];
  }
  std::span<const double> frame_values(std::size_t i) const
  {
    return std::span<const double>(values_).subspan(i * lattice_size(), lattice_size());
  }
  Frame frame(std::size_t i) const;
  std::span<const double> values() const { return values_; }

  bool contains(Pixel px) const { return px.row < rows_ && px.col < cols_; }

  friend bool operator==(const FrameStack&, const FrameStack&) = default;

private:
  std::size_t n_ = 0;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

} // namespace dskde
