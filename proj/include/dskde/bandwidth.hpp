#pragma once

#include "dskde/lattice.hpp"

#include <cstddef>
#include <string_view>

namespace dskde {

//! Which precomputed estimate a GPA table holds.
enum class Variant
{
  gpa_ds = 1,
  gpa_cd = 2
};

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view s); // "ds" / "cd" / "gpa-ds" / "gpa-cd"

//! Smoothing scales for one fitted model.
//!
//! h is used both on the value domain and on the unit-square spatial domain;
//! h_star is the query bandwidth over the value grid. n is the frame count
//! used to derive h (0 when unknown, e.g. for a model loaded from disk) and
//! m the lattice size p * q.
struct BandwidthPlan
{
  double h = 0.0;
  double h_star = 0.0;
  double sigma_hat = 0.0;
  std::size_t n = 0;
  std::size_t m = 0;

  //! Throws std::invalid_argument unless 0 < h < 1, 0 < h_star < h and
  //! sigma_hat > 0.
  void validate() const;

  friend bool operator==(const BandwidthPlan&, const BandwidthPlan&) = default;
};

//! C1 and C2 of the integrated-MSE leading term C1 / (N M h^3) + C2 h^4
//! under the truncated-normal working density.
struct MseConstants
{
  double c1 = 0.0;
  double c2 = 0.0;
};

inline constexpr double silverman_constant = 1.06;

//! Pooled population standard deviation over all N * M pixel values.
double empirical_sigma(const FrameStack& stack);

MseConstants mse_constants(double sigma);

//! pi^(-1/7) sigma^(5/7) (n m)^(-1/7).
double ds_bandwidth(std::size_t n, std::size_t m, double sigma);

//! h* = 5 h^2.
double gpa_bandwidth(double h);

//! constant * sigma * n^(-1/5); Silverman's 1.06 by default.
double cd_bandwidth(std::size_t n, double sigma, double constant = silverman_constant);

//! {3 C1 / (4 C2)}^(1/7) (n m)^(-1/7), the minimizer of integrated_mse.
double optimal_bandwidth(double nm, const MseConstants& c);

//! C1 / (nm h^3) + C2 h^4.
double integrated_mse(double h, double nm, const MseConstants& c);

//! {(4/3)^(3/7) + (3/4)^(4/7)} C1^(4/7) C2^(3/7) (nm)^(-4/7).
double optimal_integrated_mse(double nm, const MseConstants& c);

struct BandwidthOptions
{
  double cd_constant = silverman_constant;
};

//! Rule-of-thumb plan for a stack: DS bandwidth for GPA-DS, CD bandwidth for
//! GPA-CD, h* = 5 h^2 in both cases. Throws on a constant stack.
BandwidthPlan plan_bandwidth(const FrameStack& stack,
                             Variant variant,
                             const BandwidthOptions& opts = {});

} // namespace dskde
