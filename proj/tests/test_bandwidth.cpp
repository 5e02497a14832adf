#include "oracles.hpp"

#include "dskde/bandwidth.hpp"
#include "dskde/simulate.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace dskde;

namespace {
const double pi = std::numbers::pi;
}

TEST_CASE("empirical_sigma")
{
  FrameStack two(2, 1, 1, { 0.4, 0.6 });
  CHECK(empirical_sigma(two) == doctest::Approx(0.1).epsilon(1e-12));

  FrameStack flat(3, 2, 2, std::vector<double>(12, 0.25));
  CHECK(empirical_sigma(flat) == 0.0);
  CHECK_THROWS_AS(plan_bandwidth(flat, Variant::gpa_ds), std::invalid_argument);
  CHECK_THROWS_AS(empirical_sigma(FrameStack{}), std::invalid_argument);
}

TEST_CASE("empirical_sigma recovers the generator scale")
{
  // Truncation at 0.5 +- 3.125 sigma removes 0.18% of the mass, so the
  // truncated sd is 0.16 to three decimals.
  Frame mean(32, 32, 0.5);
  const auto st = simulate_stack(mean, 1000, 0.16, 3); // N M = 1.02e6
  CHECK(std::abs(empirical_sigma(st) - 0.16) < 0.01);
}

TEST_CASE("mse_constants closed forms")
{
  for (double s : { 0.05, 0.16, 0.5, 1.0 }) {
    const auto c = mse_constants(s);
    CHECK(c.c1 == doctest::Approx(std::pow(pi, -1.5) / 8.0).epsilon(1e-12));
    CHECK(c.c2 == doctest::Approx(3.0 / 32.0 / std::sqrt(pi) * std::pow(s, -5.0)).epsilon(1e-12));
  }
  CHECK(mse_constants(0.16).c2 / mse_constants(1.0).c2 == doctest::Approx(std::pow(0.16, -5.0)).epsilon(1e-12));
  CHECK_THROWS(mse_constants(0.0));
}

TEST_CASE("ds_bandwidth")
{
  const double h = ds_bandwidth(1000, 518400, 0.16);
  CHECK(h == doctest::Approx(0.0130).epsilon(0.0005 / 0.013));
  CHECK(std::abs(h - 0.0130) < 0.0005);

  const auto c = mse_constants(0.16);
  const double via_constants = std::pow(3.0 * c.c1 / (4.0 * c.c2), 1.0 / 7.0) * std::pow(1000.0 * 518400.0, -1.0 / 7.0);
  CHECK(oracle::rel_err(h, via_constants) < 1e-10);
  CHECK(oracle::rel_err(h, optimal_bandwidth(1000.0 * 518400.0, c)) < 1e-12);

  for (double k : { 0.5, 2.0, 3.0 })
    CHECK(ds_bandwidth(1000, 518400, 0.16 * k) == doctest::Approx(h * std::pow(k, 5.0 / 7.0)).epsilon(1e-12));

  CHECK_THROWS(ds_bandwidth(1, 100, 0.1));
  CHECK_THROWS(ds_bandwidth(10, 0, 0.1));
  CHECK_THROWS(ds_bandwidth(10, 10, 0.0));
}

TEST_CASE("gpa_bandwidth")
{
  CHECK(gpa_bandwidth(0.013) == doctest::Approx(8.45e-4).epsilon(1e-12));
  CHECK(gpa_bandwidth(0.1) == doctest::Approx(0.05).epsilon(1e-12));
  for (double h = 0.001; h < 0.2; h += 0.007)
    CHECK(gpa_bandwidth(h) < h);
}

TEST_CASE("cd_bandwidth")
{
  const double h = cd_bandwidth(1000, 0.16);
  CHECK(h == doctest::Approx(1.06 * 0.16 * std::pow(1000.0, -0.2)).epsilon(1e-12));
  CHECK(std::floor(h * 10000) / 10000 == doctest::Approx(0.0426));
  CHECK(cd_bandwidth(1000, 0.32) == doctest::Approx(2.0 * h).epsilon(1e-12));
  CHECK(cd_bandwidth(32000, 0.16) == doctest::Approx(0.5 * h).epsilon(1e-12));
  CHECK(cd_bandwidth(1000, 0.16, 0.9) == doctest::Approx(0.9 / 1.06 * h).epsilon(1e-12));
}

TEST_CASE("integrated MSE is minimized at optimal_bandwidth")
{
  for (double s : { 0.05, 0.16, 0.5, 1.0 }) {
    const auto c = mse_constants(s);
    const double nm = 1000.0 * 4096.0;
    const double ho = optimal_bandwidth(nm, c);
    CHECK(oracle::rel_err(integrated_mse(ho, nm, c), optimal_integrated_mse(nm, c)) < 1e-8);
    CHECK(integrated_mse(ho * 1.01, nm, c) > integrated_mse(ho, nm, c));
    CHECK(integrated_mse(ho * 0.99, nm, c) > integrated_mse(ho, nm, c));
  }
}

TEST_CASE("plan_bandwidth")
{
  const auto st = simulate_stack(synthetic_mean_field(16, 16), 50, 0.16, 11);
  const double sg = empirical_sigma(st);
  const auto ds = plan_bandwidth(st, Variant::gpa_ds);
  CHECK(ds.h == ds_bandwidth(50, 256, sg));
  CHECK(ds.h_star == doctest::Approx(5.0 * ds.h * ds.h));
  CHECK(ds.n == 50);
  CHECK(ds.m == 256);
  CHECK(ds.sigma_hat == sg);
  const auto cd = plan_bandwidth(st, Variant::gpa_cd, { 0.9 });
  CHECK(cd.h == cd_bandwidth(50, sg, 0.9));
  CHECK_NOTHROW(ds.validate());

  BandwidthPlan bad = ds;
  bad.h_star = bad.h;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("variant names")
{
  CHECK(parse_variant("ds") == Variant::gpa_ds);
  CHECK(parse_variant("gpa-cd") == Variant::gpa_cd);
  CHECK(parse_variant(to_string(Variant::gpa_ds)) == Variant::gpa_ds);
  CHECK_THROWS(parse_variant("kde"));
}
