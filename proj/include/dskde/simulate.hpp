#pragma once

#include "dskde/estimators.hpp"
#include "dskde/lattice.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dskde {

//! Standard normal CDF.
double normal_cdf(double z);

//! Density of normal(mu, sigma^2) truncated to [0, 1]; 0 outside [0, 1].
double truncnorm_pdf(double x, double mu, double sigma);

//! One draw from normal(mu, sigma^2) truncated to [0, 1], by rejection.
double sample_truncnorm(double mu, double sigma, std::mt19937_64& rng);

//! 0.35 + 0.20 (i / p) + 0.10 sin(2 pi j / q), clamped to [0.1, 0.9], with
//! 1-based (i, j).
Frame synthetic_mean_field(std::size_t p, std::size_t q);

//! Independent truncated-normal draws around `mean` for each of n frames.
FrameStack simulate_stack(const Frame& mean, std::size_t n, double sigma, std::uint64_t seed);

enum class Estimator
{
  cd,
  ds,
  gpa_cd,
  gpa_ds
};

std::string_view to_string(Estimator e);
Estimator parse_estimator(std::string_view s);
inline constexpr Estimator all_estimators[] = { Estimator::cd, Estimator::ds, Estimator::gpa_cd,
                                                Estimator::gpa_ds };

struct SimConfig
{
  std::size_t p = 64;
  std::size_t q = 64;
  std::size_t n = 200;
  std::vector<std::size_t> n_values{ 100, 400 };
  double sigma = 0.16;
  //! Uses synthetic_mean_field(p, q) when empty.
  std::optional<Frame> mean_field;
  std::uint64_t seed = 1;
  std::size_t g_star = 500;
  std::size_t g_plus = 100;
  std::size_t reps = 20;
  double cd_constant = silverman_constant;
  double radius_bandwidths = default_truncation;

  void validate() const;
  Frame mean() const;
};

//! Single-stack form with cfg.n frames and cfg.seed.
FrameStack simulate_stack(const SimConfig& cfg);

using EstimateFn = std::function<double(double x, Pixel px)>;

//! The truncated-normal data model: f(x, s) = truncnorm_pdf(x, mean(s), sigma).
struct TruncNormTruth
{
  const Frame& mean;
  double sigma;
  double operator()(double x, Pixel px) const { return truncnorm_pdf(x, mean(px.row, px.col), sigma); }
};

//! (1 / (G+ M)) sum over test points and pixels of (estimate - truth)^2.
double mse_of_estimator(const EstimateFn& estimate,
                        const EstimateFn& truth,
                        std::span<const double> test_points,
                        std::size_t rows,
                        std::size_t cols);

//! Same, for estimates already evaluated as a (test point x pixel) volume.
double mse_of_estimator(const Volume& estimates, const EstimateFn& truth, std::span<const double> test_points);

struct MseRow
{
  Estimator estimator = Estimator::cd;
  std::size_t n = 0;
  std::vector<double> mse; //!< one per replication
  double mean_mse = 0.0;
  double mean_log_mse = 0.0;
  double median_log_mse = 0.0;
  double mean_h = 0.0;
  double mean_h_star = 0.0; //!< 0 for the non-GPA estimators
  double seconds_per_frame = 0.0;
};

struct MseReport
{
  SimConfig config;
  std::vector<MseRow> rows;

  //! Throws std::out_of_range when the pair was not benchmarked.
  const MseRow& row(Estimator e, std::size_t n) const;
};

//! For every replication and every n: a fresh stack, fresh uniform test
//! points, each estimator evaluated with its own rule-of-thumb bandwidth.
//! Replication r, sample size index k draw from a stream seeded with
//! (cfg.seed, r, k), so results do not depend on evaluation order.
MseReport run_mse_benchmark(const SimConfig& cfg,
                            std::span<const Estimator> estimators,
                            std::span<const std::size_t> n_values);

//! estimator,n,reps,mean_mse,mean_log_mse,median_log_mse,mean_h,mean_h_star,seconds_per_frame
void write_report_csv(const MseReport& report, std::ostream& os);

//! Bar chart of mean log-MSE per (estimator, n) as an 8-bit grayscale image.
Grid2<std::uint8_t> report_plot(const MseReport& report);

} // namespace dskde
