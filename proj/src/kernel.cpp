#include "dskde/kernel.hpp"

#include <cmath>

namespace dskde {

double gauss_kernel(double t) noexcept
{
  return inv_sqrt_2pi * std::exp(-0.5 * t * t);
}

double product_kernel(double ds1, double ds2) noexcept
{
  return gauss_kernel(ds1) * gauss_kernel(ds2);
}

KernelMoments kernel_moments() noexcept
{
  const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
  KernelMoments m;
  m.mu = { 1.0, 0.0, 1.0, 0.0 };
  m.nu = { 0.5 * inv_sqrt_pi, 0.0, 0.25 * inv_sqrt_pi, 0.0 };
  return m;
}

} // namespace dskde
