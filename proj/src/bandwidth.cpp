#include "dskde/bandwidth.hpp"

#include "dskde/kernel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace dskde {

namespace {

void require_sigma(double sigma)
{
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw std::invalid_argument("degenerate input: sigma must be positive (got " +
                                std::to_string(sigma) + ")");
}

} // namespace

std::string_view to_string(Variant v)
{
  return v == Variant::gpa_ds ? "gpa-ds" : "gpa-cd";
}

Variant parse_variant(std::string_view s)
{
  if (s == "ds" || s == "gpa-ds" || s == "GPA-DS")
    return Variant::gpa_ds;
  if (s == "cd" || s == "gpa-cd" || s == "GPA-CD")
    return Variant::gpa_cd;
  throw std::invalid_argument("unknown variant '" + std::string(s) + "' (expected ds or cd)");
}

void BandwidthPlan::validate() const
{
  if (!(h > 0.0 && h < 1.0))
    throw std::invalid_argument("bandwidth h must lie in (0, 1), got " + std::to_string(h));
  if (!(h_star > 0.0 && h_star < h))
    throw std::invalid_argument("query bandwidth h* must lie in (0, h), got " +
                                std::to_string(h_star));
  require_sigma(sigma_hat);
}

double empirical_sigma(const FrameStack& stack)
{
  if (stack.empty() || stack.lattice_size() == 0)
    throw std::invalid_argument("empirical_sigma: empty stack");
  const auto v = stack.values();
  // two-pass for accuracy on near-constant stacks
  double mean = 0.0;
  for (double x : v)
    mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v)
    ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

MseConstants mse_constants(double sigma)
{
  require_sigma(sigma);
  const double nu0 = kernel_moments().nu[0];
  MseConstants c;
  c.c1 = nu0 * nu0 * nu0;
  c.c2 = 3.0 / 32.0 / std::sqrt(std::numbers::pi) * std::pow(sigma, -5.0);
  return c;
}

double ds_bandwidth(std::size_t n, std::size_t m, double sigma)
{
  if (n < 2 || m < 1)
    throw std::invalid_argument("ds_bandwidth: need n >= 2 and m >= 1");
  require_sigma(sigma);
  const double nm = static_cast<double>(n) * static_cast<double>(m);
  return std::pow(std::numbers::pi, -1.0 / 7.0) * std::pow(sigma, 5.0 / 7.0) *
         std::pow(nm, -1.0 / 7.0);
}

double gpa_bandwidth(double h)
{
  if (!(h > 0.0 && h < 1.0))
    throw std::invalid_argument("gpa_bandwidth: h must lie in (0, 1)");
  return 5.0 * h * h;
}

double cd_bandwidth(std::size_t n, double sigma, double constant)
{
  if (n < 2)
    throw std::invalid_argument("cd_bandwidth: need n >= 2");
  require_sigma(sigma);
  if (!(constant > 0.0))
    throw std::invalid_argument("cd_bandwidth: constant must be positive");
  return constant * sigma * std::pow(static_cast<double>(n), -0.2);
}

double optimal_bandwidth(double nm, const MseConstants& c)
{
  return std::pow(3.0 * c.c1 / (4.0 * c.c2), 1.0 / 7.0) * std::pow(nm, -1.0 / 7.0);
}

double integrated_mse(double h, double nm, const MseConstants& c)
{
  return c.c1 / (nm * h * h * h) + c.c2 * h * h * h * h;
}

double optimal_integrated_mse(double nm, const MseConstants& c)
{
  return (std::pow(4.0 / 3.0, 3.0 / 7.0) + std::pow(3.0 / 4.0, 4.0 / 7.0)) *
         std::pow(c.c1, 4.0 / 7.0) * std::pow(c.c2, 3.0 / 7.0) * std::pow(nm, -4.0 / 7.0);
}

BandwidthPlan plan_bandwidth(const FrameStack& stack, Variant variant, const BandwidthOptions& opts)
{
  BandwidthPlan plan;
  plan.sigma_hat = empirical_sigma(stack);
  plan.n = stack.n();
  plan.m = stack.lattice_size();
  plan.h = variant == Variant::gpa_ds ? ds_bandwidth(plan.n, plan.m, plan.sigma_hat)
                                      : cd_bandwidth(plan.n, plan.sigma_hat, opts.cd_constant);
  if (!(plan.h < 1.0))
    throw std::invalid_argument("rule-of-thumb bandwidth " + std::to_string(plan.h) +
                                " is not below 1");
  plan.h_star = gpa_bandwidth(plan.h);
  plan.validate();
  return plan;
}

} // namespace dskde
