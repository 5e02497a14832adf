// Built with -ffast-math so the exp calls vectorize. Inputs are finite by
// contract; the sums only contain nonnegative terms, so reassociation keeps
// the relative error at the rounding level.
#include "dskde/kernel.hpp"

#include <cmath>
#include <cstddef>

namespace dskde {

double gauss_sum(std::span<const double> samples, double x, double inv_h) noexcept
{
  const double* s = samples.data();
  const std::size_t n = samples.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = (s[i] - x) * inv_h;
    acc += std::exp(-0.5 * t * t);
  }
  return acc;
}

void gauss_sums(std::span<const double> samples,
                std::span<const double> points,
                double inv_h,
                std::span<double> out) noexcept
{
  for (std::size_t g = 0; g < points.size(); ++g)
    out[g] = gauss_sum(samples, points[g], inv_h);
}

} // namespace dskde
