#include "dskde/simulate.hpp"

#include "dskde/bandwidth.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace dskde {

double normal_cdf(double z)
{
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double truncnorm_pdf(double x, double mu, double sigma)
{
  if (!(sigma > 0.0))
    throw std::invalid_argument("truncnorm_pdf: sigma must be positive");
  if (x < 0.0 || x > 1.0)
    return 0.0;
  const double c = normal_cdf((1.0 - mu) / sigma) - normal_cdf(-mu / sigma);
  const double z = (x - mu) / sigma;
  return std::exp(-0.5 * z * z) / (c * std::sqrt(2.0 * std::numbers::pi) * sigma);
}

double sample_truncnorm(double mu, double sigma, std::mt19937_64& rng)
{
  std::normal_distribution<double> normal(mu, sigma);
  for (;;) {
    const double x = normal(rng);
    if (x >= 0.0 && x <= 1.0)
      return x;
  }
}

Frame synthetic_mean_field(std::size_t p, std::size_t q)
{
  Frame mu(p, q);
  for (std::size_t r = 0; r < p; ++r) {
    const double s1 = static_cast<double>(r + 1) / static_cast<double>(p);
    for (std::size_t c = 0; c < q; ++c) {
      const double s2 = static_cast<double>(c + 1) / static_cast<double>(q);
      const double v = 0.35 + 0.20 * s1 + 0.10 * std::sin(2.0 * std::numbers::pi * s2);
      mu(r, c) = std::clamp(v, 0.1, 0.9);
    }
  }
  return mu;
}

FrameStack simulate_stack(const Frame& mean, std::size_t n, double sigma, std::uint64_t seed)
{
  if (!(sigma > 0.0))
    throw std::invalid_argument("simulate_stack: sigma must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> values;
  values.reserve(n * mean.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < mean.size(); ++k) {
      double x;
      do {
        x = mean[k] + sigma * normal(rng);
      } while (x < 0.0 || x > 1.0);
      values.push_back(x);
    }
  }
  return FrameStack(n, mean.rows(), mean.cols(), std::move(values));
}

std::string_view to_string(Estimator e)
{
  switch (e) {
    case Estimator::cd:
      return "CD";
    case Estimator::ds:
      return "DS";
    case Estimator::gpa_cd:
      return "GPA-CD";
    case Estimator::gpa_ds:
      return "GPA-DS";
  }
  return "?";
}

Estimator parse_estimator(std::string_view s)
{
  std::string t(s);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char ch) {
    return ch == '_' ? '-' : static_cast<char>(std::tolower(ch));
  });
  if (t == "cd")
    return Estimator::cd;
  if (t == "ds")
    return Estimator::ds;
  if (t == "gpa-cd")
    return Estimator::gpa_cd;
  if (t == "gpa-ds")
    return Estimator::gpa_ds;
  throw std::invalid_argument("unknown estimator '" + std::string(s) + "'");
}

void SimConfig::validate() const
{
  if (!(sigma > 0.0))
    throw std::invalid_argument("SimConfig: sigma must be positive");
  if (p < 1 || q < 1 || n < 1 || g_star < 1 || g_plus < 1 || reps < 1)
    throw std::invalid_argument("SimConfig: all counts must be at least 1");
  if (mean_field && !mean_field->same_shape(p, q))
    throw std::invalid_argument("SimConfig: mean field does not match the p x q lattice");
  if (mean_field)
    for (double v : mean_field->values())
      if (!(v >= 0.0 && v <= 1.0))
        throw std::invalid_argument("SimConfig: mean field values must lie in [0, 1]");
}

Frame SimConfig::mean() const
{
  return mean_field ? *mean_field : synthetic_mean_field(p, q);
}

FrameStack simulate_stack(const SimConfig& cfg)
{
  cfg.validate();
  return simulate_stack(cfg.mean(), cfg.n, cfg.sigma, cfg.seed);
}

double mse_of_estimator(const EstimateFn& estimate,
                        const EstimateFn& truth,
                        std::span<const double> test_points,
                        std::size_t rows,
                        std::size_t cols)
{
  if (test_points.empty() || rows * cols == 0)
    throw std::invalid_argument("mse_of_estimator: nothing to evaluate");
  double acc = 0.0;
  for (double x : test_points)
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) {
        const double e = estimate(x, { r, c }) - truth(x, { r, c });
        acc += e * e;
      }
  return acc / (static_cast<double>(test_points.size()) * static_cast<double>(rows * cols));
}

double mse_of_estimator(const Volume& estimates, const EstimateFn& truth, std::span<const double> test_points)
{
  if (estimates.slices() != test_points.size() || test_points.empty())
    throw std::invalid_argument("mse_of_estimator: one slice per test point expected");
  double acc = 0.0;
  for (std::size_t g = 0; g < test_points.size(); ++g)
    for (std::size_t r = 0; r < estimates.rows(); ++r)
      for (std::size_t c = 0; c < estimates.cols(); ++c) {
        const double e = estimates(g, r, c) - truth(test_points[g], { r, c });
        acc += e * e;
      }
  return acc / (static_cast<double>(test_points.size()) * static_cast<double>(estimates.slice_size()));
}

const MseRow& MseReport::row(Estimator e, std::size_t n) const
{
  for (const auto& r : rows)
    if (r.estimator == e && r.n == n)
      return r;
  throw std::out_of_range("MseReport: no row for " + std::string(to_string(e)) + " at n = " +
                          std::to_string(n));
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Volume query_volume(const GpaTable& table, std::span<const double> points)
{
  Volume out(points.size(), table.rows(), table.cols());
  for (std::size_t g = 0; g < points.size(); ++g)
    for (std::size_t r = 0; r < table.rows(); ++r)
      for (std::size_t c = 0; c < table.cols(); ++c)
        out(g, r, c) = gpa_query(table, points[g], { r, c });
  return out;
}

double median(std::vector<double> v)
{
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

} // namespace

MseReport run_mse_benchmark(const SimConfig& cfg,
                            std::span<const Estimator> estimators,
                            std::span<const std::size_t> n_values)
{
  cfg.validate();
  if (estimators.empty() || n_values.empty())
    throw std::invalid_argument("run_mse_benchmark: no estimators or sample sizes given");
  for (auto n : n_values)
    if (n < 2)
      throw std::invalid_argument("run_mse_benchmark: sample sizes must be at least 2");

  const Frame mean = cfg.mean();
  const TruncNormTruth truth{ mean, cfg.sigma };
  const std::size_t m = cfg.p * cfg.q;

  MseReport report;
  report.config = cfg;
  report.config.n_values.assign(n_values.begin(), n_values.end());
  for (auto n : n_values)
    for (auto e : estimators) {
      MseRow row;
      row.estimator = e;
      row.n = n;
      report.rows.push_back(row);
    }
  std::vector<double> seconds(report.rows.size(), 0.0);

  for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
    for (std::size_t k = 0; k < n_values.size(); ++k) {
      const std::size_t n = n_values[k];
      std::seed_seq seq{ static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                         static_cast<std::uint32_t>(rep), static_cast<std::uint32_t>(k) };
      std::mt19937_64 rng(seq);
      const std::uint64_t stack_seed = rng();
      const std::uint64_t grid_seed = rng();

      const FrameStack stack = simulate_stack(mean, n, cfg.sigma, stack_seed);
      std::vector<double> test_points(cfg.g_plus);
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      for (auto& x : test_points)
        x = unif(rng);

      const double sigma_hat = empirical_sigma(stack);
      const double h_ds = ds_bandwidth(n, m, sigma_hat);
      const double h_cd = cd_bandwidth(n, sigma_hat, cfg.cd_constant);
      const double frames = static_cast<double>(test_points.size());

      for (std::size_t e = 0; e < estimators.size(); ++e) {
        const std::size_t idx = k * estimators.size() + e;
        MseRow& row = report.rows[idx];
        Volume est;
        double h = 0.0;
        double h_star = 0.0;
        auto t0 = Clock::now();
        switch (estimators[e]) {
          case Estimator::cd:
            h = h_cd;
            est = cd_grid(stack, test_points, h);
            seconds[idx] += seconds_since(t0) / frames;
            break;
          case Estimator::ds:
            h = h_ds;
            est = ds_smooth(cd_grid(stack, test_points, h), h, cfg.radius_bandwidths);
            seconds[idx] += seconds_since(t0) / frames;
            break;
          case Estimator::gpa_cd:
          case Estimator::gpa_ds: {
            const bool ds = estimators[e] == Estimator::gpa_ds;
            BandwidthPlan plan;
            plan.sigma_hat = sigma_hat;
            plan.n = n;
            plan.m = m;
            plan.h = ds ? h_ds : h_cd;
            plan.h_star = gpa_bandwidth(plan.h);
            FitOptions fit;
            fit.g_star = cfg.g_star;
            fit.variant = ds ? Variant::gpa_ds : Variant::gpa_cd;
            fit.seed = grid_seed;
            fit.radius_bandwidths = cfg.radius_bandwidths;
            const GpaTable table = gpa_fit(stack, plan, fit);
            h = plan.h;
            h_star = plan.h_star;
            t0 = Clock::now();
            est = query_volume(table, test_points);
            seconds[idx] += seconds_since(t0) / frames;
            break;
          }
        }
        row.mse.push_back(mse_of_estimator(est, truth, test_points));
        row.mean_h += h / static_cast<double>(cfg.reps);
        row.mean_h_star += h_star / static_cast<double>(cfg.reps);
      }
    }
  }

  for (std::size_t idx = 0; idx < report.rows.size(); ++idx) {
    auto& row = report.rows[idx];
    std::vector<double> logs;
    double sum = 0.0;
    for (double v : row.mse) {
      sum += v;
      logs.push_back(std::log(v));
    }
    row.mean_mse = sum / static_cast<double>(row.mse.size());
    double lsum = 0.0;
    for (double v : logs)
      lsum += v;
    row.mean_log_mse = lsum / static_cast<double>(logs.size());
    row.median_log_mse = median(logs);
    row.seconds_per_frame = seconds[idx] / static_cast<double>(cfg.reps);
  }
  return report;
}

void write_report_csv(const MseReport& report, std::ostream& os)
{
  os << "estimator,n,reps,mean_mse,mean_log_mse,median_log_mse,mean_h,mean_h_star,seconds_per_frame\n";
  os << std::setprecision(10);
  for (const auto& r : report.rows)
    os << to_string(r.estimator) << ',' << r.n << ',' << r.mse.size() << ',' << r.mean_mse << ','
       << r.mean_log_mse << ',' << r.median_log_mse << ',' << r.mean_h << ',' << r.mean_h_star << ','
       << r.seconds_per_frame << '\n';
}

Grid2<std::uint8_t> report_plot(const MseReport& report)
{
  constexpr std::size_t height = 200;
  constexpr std::size_t bar = 16;
  constexpr std::size_t gap = 8;
  const std::size_t width = std::max<std::size_t>(1, report.rows.size() * (bar + gap) + gap);
  Grid2<std::uint8_t> img(height, width, 255);
  if (report.rows.empty())
    return img;

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& r : report.rows) {
    lo = std::min(lo, r.mean_log_mse);
    hi = std::max(hi, r.mean_log_mse);
  }
  // bars measure distance above a floor one unit below the best log-MSE
  const double floor = lo - 1.0;
  const double span = std::max(hi - floor, 1e-12);
  for (std::size_t k = 0; k < report.rows.size(); ++k) {
    const double frac = (report.rows[k].mean_log_mse - floor) / span;
    const auto len = static_cast<std::size_t>(std::lround(frac * static_cast<double>(height - 1)));
    // shade encodes the estimator
    const auto shade = static_cast<std::uint8_t>(40 * static_cast<int>(report.rows[k].estimator));
    const std::size_t x0 = gap + k * (bar + gap);
    for (std::size_t y = height - len; y < height; ++y)
      for (std::size_t x = x0; x < x0 + bar; ++x)
        img(y, x) = shade;
  }
  return img;
}

} // namespace dskde
