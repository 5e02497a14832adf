#pragma once

#include <array>
#include <numbers>
#include <span>

namespace dskde {

inline constexpr double inv_sqrt_2pi = 0.3989422804014326779399461;

//! Standard Gaussian kernel K(t) = (2 pi)^(-1/2) exp(-t^2 / 2).
double gauss_kernel(double t) noexcept;

//! Two-dimensional product kernel K(ds1) K(ds2).
double product_kernel(double ds1, double ds2) noexcept;

//! mu[m] = int t^m K(t) dt and nu[m] = int t^m K(t)^2 dt for m = 0..3.
struct KernelMoments
{
  std::array<double, 4> mu{};
  std::array<double, 4> nu{};
};

//! Analytic moments of the standard Gaussian kernel.
KernelMoments kernel_moments() noexcept;

//! sum_i exp(-((samples[i] - x) * inv_h)^2 / 2), without the (2 pi)^(-1/2)
//! factor. This is the hot loop of every CD evaluation.
double gauss_sum(std::span<const double> samples, double x, double inv_h) noexcept;

//! out[g] = gauss_sum(samples, points[g], inv_h) for every g.
void gauss_sums(std::span<const double> samples,
                std::span<const double> points,
                double inv_h,
                std::span<double> out) noexcept;

} // namespace dskde
