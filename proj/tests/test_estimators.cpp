#include "oracles.hpp"

#include "dskde/estimators.hpp"
#include "dskde/kernel.hpp"
#include "dskde/simulate.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace dskde;

TEST_CASE("cd_estimate hand-evaluated cases")
{
  FrameStack one(1, 1, 1, { 0.5 });
  CHECK(cd_estimate(one, 0.5, { 0, 0 }, 0.1) == doctest::Approx(3.9894228).epsilon(1e-8));

  FrameStack two(2, 1, 1, { 0.3, 0.7 });
  const double expect = (gauss_kernel(1.0) + gauss_kernel(-1.0)) / (2 * 0.2);
  CHECK(cd_estimate(two, 0.5, { 0, 0 }, 0.2) == doctest::Approx(expect).epsilon(1e-14));
  CHECK(expect == doctest::Approx(1.2098536).epsilon(1e-7));

  CHECK_THROWS_AS(cd_estimate(two, 0.5, { 1, 0 }, 0.2), std::out_of_range);
  CHECK_THROWS_AS(cd_estimate(two, 0.5, { 0, 0 }, 0.0), std::invalid_argument);
}

TEST_CASE("cd_estimate matches the duplicate sum")
{
  const auto st = oracle::random_stack(37, 5, 6, 99);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    const Pixel px{ rng() % 5, rng() % 6 };
    const double x = u(rng);
    const double h = 0.01 + 0.3 * u(rng);
    CHECK(oracle::rel_err(cd_estimate(st, x, px, h), oracle::cd(st, x, px.row, px.col, h)) < 1e-12);
  }
}

TEST_CASE("cd_grid")
{
  SUBCASE("constant frames")
  {
    FrameStack st(4, 3, 5, std::vector<double>(60, 0.42));
    const std::vector<double> grid{ 0.1, 0.4, 0.42, 0.9 };
    const auto v = cd_grid(st, grid, 0.05);
    for (std::size_t g = 0; g < grid.size(); ++g)
      for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 5; ++c)
          CHECK(oracle::rel_err(v(g, r, c), oracle::K((0.42 - grid[g]) / 0.05) / 0.05) < 1e-12);
  }
  SUBCASE("pointwise agreement with cd_estimate")
  {
    const auto st = oracle::random_stack(20, 7, 9, 3);
    const auto grid = draw_grid(30, 8);
    const auto v = cd_grid(st, grid, 0.07);
    std::mt19937_64 rng(1);
    for (int k = 0; k < 10; ++k) {
      const std::size_t g = rng() % 30, r = rng() % 7, c = rng() % 9;
      CHECK(v(g, r, c) == cd_estimate(st, grid[g], { r, c }, 0.07));
    }
  }
  SUBCASE("a single grid point is one CD map")
  {
    const auto st = oracle::random_stack(10, 4, 4, 2);
    const std::vector<double> grid{ 0.37 };
    const auto v = cd_grid(st, grid, 0.1);
    CHECK(v.slices() == 1);
    for (std::size_t r = 0; r < 4; ++r)
      for (std::size_t c = 0; c < 4; ++c)
        CHECK(v(0, r, c) == cd_estimate(st, 0.37, { r, c }, 0.1));
  }
}

TEST_CASE("ds_direct")
{
  SUBCASE("constant map is preserved")
  {
    Grid2<double> m(6, 7, 2.5);
    for (std::size_t r = 0; r < 6; ++r)
      for (std::size_t c = 0; c < 7; ++c)
        CHECK(ds_direct(m, { r, c }, 0.15) == doctest::Approx(2.5).epsilon(1e-14));
  }
  SUBCASE("1x1 lattice is the identity")
  {
    Grid2<double> m(1, 1, 0.77);
    CHECK(ds_direct(m, { 0, 0 }, 0.3) == doctest::Approx(0.77).epsilon(1e-15));
    CHECK(ds_direct(m, { 0, 0 }, 0.3, 3.0) == doctest::Approx(0.77).epsilon(1e-15));
  }
  SUBCASE("8x8 random map agrees with the coordinate double loop")
  {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    Grid2<double> m(8, 8);
    for (auto& v : m.values())
      v = u(rng);
    for (std::size_t r = 0; r < 8; ++r)
      for (std::size_t c = 0; c < 8; ++c)
        CHECK(oracle::rel_err(ds_direct(m, { r, c }, 0.2), oracle::ds(m, r, c, 0.2)) < 1e-12);
  }
}

TEST_CASE("truncation_radius")
{
  CHECK(truncation_radius(0.1, 16, 3.0) == 5); // ceil(4.8)
  CHECK(truncation_radius(0.013, 540, 3.0) == 22);
  CHECK(truncation_radius(0.013, 960, 3.0) == 38);
  CHECK(truncation_radius(0.9, 8, 3.0) == 8);
  CHECK_THROWS(truncation_radius(0.1, 16, 0.0));
}

TEST_CASE("ds_smooth")
{
  SUBCASE("constant slice")
  {
    Volume v(2, 9, 11, 1.25);
    const auto s = ds_smooth(v, 0.1);
    for (double x : s.values())
      CHECK(x == doctest::Approx(1.25).epsilon(1e-14));
  }
  SUBCASE("16x16, h = 0.1: windowed oracle and untruncated bound")
  {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.5, 2.0);
    Volume v(1, 16, 16);
    for (std::size_t r = 0; r < 16; ++r)
      for (std::size_t c = 0; c < 16; ++c)
        v(0, r, c) = u(rng);
    const auto s = ds_smooth(v, 0.1);
    const auto m = v.slice_grid(0);
    const std::size_t w = truncation_radius(0.1, 16, default_truncation);
    double worst_trunc = 0.0;
    for (std::size_t r = 0; r < 16; ++r)
      for (std::size_t c = 0; c < 16; ++c) {
        CHECK(oracle::rel_err(s(0, r, c), oracle::ds(m, r, c, 0.1, std::pair{ w, w })) < 1e-12);
        CHECK(oracle::rel_err(s(0, r, c), ds_direct(m, { r, c }, 0.1, default_truncation)) < 1e-12);
        worst_trunc = std::max(worst_trunc, oracle::rel_err(s(0, r, c), oracle::ds(m, r, c, 0.1)));
      }
    MESSAGE("worst truncated vs untruncated relative gap: " << worst_trunc);
    CHECK(worst_trunc < 1e-4);
  }
  SUBCASE("impulse gives a symmetric bump")
  {
    Volume v(1, 15, 15, 0.0);
    v(0, 7, 7) = 1.0;
    const auto s = ds_smooth(v, 0.1);
    double peak = 0.0;
    for (double x : s.values())
      peak = std::max(peak, x);
    CHECK(s(0, 7, 7) == peak);
    for (std::size_t d = 1; d <= 5; ++d) {
      CHECK(s(0, 7 + d, 7) == doctest::Approx(s(0, 7 - d, 7)).epsilon(1e-14));
      CHECK(s(0, 7, 7 + d) == doctest::Approx(s(0, 7, 7 - d)).epsilon(1e-14));
      CHECK(s(0, 7 + d, 7 + d) == doctest::Approx(s(0, 7 - d, 7 - d)).epsilon(1e-14));
      CHECK(s(0, 7 + d, 7) < s(0, 7 + d - 1, 7));
    }
  }
}

TEST_CASE("draw_grid")
{
  const auto a = draw_grid(500, 42);
  const auto b = draw_grid(500, 42);
  CHECK(a == b);
  CHECK(a != draw_grid(500, 43));
  CHECK(std::is_sorted(a.begin(), a.end()));
  CHECK(std::adjacent_find(a.begin(), a.end()) == a.end());
  CHECK(a.front() > 0.0);
  CHECK(a.back() < 1.0);
  const auto e = draw_grid(4, 0, GridKind::evenly_spaced);
  CHECK(e == std::vector<double>{ 0.125, 0.375, 0.625, 0.875 });
}

namespace {

BandwidthPlan plan_for(const FrameStack& st, Variant v)
{
  return plan_bandwidth(st, v);
}

} // namespace

TEST_CASE("gpa_fit")
{
  const auto st = simulate_stack(synthetic_mean_field(12, 10), 40, 0.16, 5);

  SUBCASE("GPA-CD on constant frames is spatially constant")
  {
    std::vector<double> vals;
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t k = 0; k < 30; ++k)
        vals.push_back(0.2 + 0.1 * static_cast<double>(i));
    FrameStack flat(5, 5, 6, vals);
    const auto t = gpa_fit(flat, plan_for(flat, Variant::gpa_cd), { 20, Variant::gpa_cd, 1 });
    for (std::size_t g = 0; g < t.g_star(); ++g)
      for (std::size_t r = 0; r < 5; ++r)
        for (std::size_t c = 0; c < 6; ++c)
          CHECK(t.value(g, r, c) == t.value(g, 0, 0));
  }
  SUBCASE("same seed gives a bit-identical table")
  {
    const auto plan = plan_for(st, Variant::gpa_ds);
    const auto a = gpa_fit(st, plan, { 50, Variant::gpa_ds, 9 });
    const auto b = gpa_fit(st, plan, { 50, Variant::gpa_ds, 9 });
    CHECK(a == b);
    CHECK_FALSE(a == gpa_fit(st, plan, { 50, Variant::gpa_ds, 10 }));
  }
  SUBCASE("GPA-DS slices are ds_smooth of cd_grid")
  {
    const auto plan = plan_for(st, Variant::gpa_ds);
    const auto t = gpa_fit(st, plan, { 25, Variant::gpa_ds, 3 });
    const std::vector<double> grid(t.grid().begin(), t.grid().end());
    CHECK(grid == draw_grid(25, 3));
    CHECK(t.to_volume() == ds_smooth(cd_grid(st, grid, plan.h), plan.h));
  }
  SUBCASE("errors")
  {
    const auto plan = plan_for(st, Variant::gpa_ds);
    CHECK_THROWS_AS(gpa_fit(st, plan, { 1, Variant::gpa_ds, 0 }), std::invalid_argument);
    BandwidthPlan bad = plan;
    bad.sigma_hat = 0.0;
    CHECK_THROWS_AS(gpa_fit(st, bad, {}), std::invalid_argument);
  }
}

TEST_CASE("GpaTable validation")
{
  BandwidthPlan plan{ 0.1, 0.05, 0.2, 10, 4 };
  Volume v(2, 2, 2, 1.0);
  CHECK_NOTHROW(GpaTable({ 0.2, 0.6 }, v, plan, Variant::gpa_ds, 0));
  CHECK_THROWS(GpaTable({ 0.6, 0.2 }, v, plan, Variant::gpa_ds, 0));
  CHECK_THROWS(GpaTable({ 0.2, 0.2 }, v, plan, Variant::gpa_ds, 0));
  CHECK_THROWS(GpaTable({ 0.0, 0.2 }, v, plan, Variant::gpa_ds, 0));
  CHECK_THROWS(GpaTable({ 0.2 }, v, plan, Variant::gpa_ds, 0));
  v(1, 1, 1) = -1.0;
  CHECK_THROWS(GpaTable({ 0.2, 0.6 }, v, plan, Variant::gpa_ds, 0));
}

TEST_CASE("gpa_query")
{
  const auto st = simulate_stack(synthetic_mean_field(6, 6), 30, 0.16, 8);
  const auto plan = plan_bandwidth(st, Variant::gpa_ds);
  const auto t = gpa_fit(st, plan, { 40, Variant::gpa_ds, 4 });
  const std::vector<double> grid(t.grid().begin(), t.grid().end());

  SUBCASE("agrees with the duplicate sum in both modes")
  {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 40; ++k) {
      const Pixel px{ rng() % 6, rng() % 6 };
      const double x = u(rng);
      const auto col = t.column(px);
      const std::vector<double> vals(col.begin(), col.end());
      // h* large enough that the plain sum does not underflow
      for (double hs : { plan.h_star, 0.01, 0.05 }) {
        const double ref = oracle::gpa(grid, vals, x, hs);
        if (!std::isfinite(ref))
          continue;
        CHECK(oracle::rel_err(gpa_query(t, x, px, { QueryMode::exact, hs }), ref) < 1e-12);
        CHECK(oracle::rel_err(gpa_query(t, x, px, { QueryMode::windowed, hs }), ref) < 1e-12);
      }
    }
  }
  SUBCASE("concentrates on a grid point as h* shrinks")
  {
    for (std::size_t g : { 0u, 17u, 39u }) {
      const double got = gpa_query(t, grid[g], { 2, 3 }, { QueryMode::windowed, plan.h_star * 1e-3 });
      CHECK(std::abs(got - t.value(g, 2, 3)) < 1e-6);
    }
  }
  SUBCASE("constant column gives that constant")
  {
    BandwidthPlan p{ 0.1, 0.02, 0.2, 10, 1 };
    Volume v(5, 1, 1, 3.5);
    GpaTable c({ 0.1, 0.3, 0.5, 0.7, 0.9 }, v, p, Variant::gpa_cd, 0);
    for (double x : { -0.5, 0.0, 0.2, 0.61, 1.0, 3.0 })
      CHECK(gpa_query(c, x, { 0, 0 }) == doctest::Approx(3.5).epsilon(1e-14));
  }
  SUBCASE("far from every grid point the result stays finite")
  {
    const double v = gpa_query(t, 5.0, { 0, 0 });
    CHECK(std::isfinite(v));
    CHECK(v == doctest::Approx(t.value(39, 0, 0)).epsilon(1e-9));
  }
  CHECK_THROWS_AS(gpa_query(t, 0.5, { 6, 0 }), std::out_of_range);
}

TEST_CASE("density_map")
{
  const auto st = simulate_stack(synthetic_mean_field(8, 8), 30, 0.16, 8);
  const auto t = gpa_fit(st, plan_bandwidth(st, Variant::gpa_ds), { 60, Variant::gpa_ds, 4 });
  const Frame f = st.frame(0);
  const auto a = density_map(t, f);
  CHECK(a == density_map(t, f));
  for (std::size_t r = 0; r < 8; ++r)
    for (std::size_t c = 0; c < 8; ++c)
      CHECK(a(r, c) == gpa_query(t, f(r, c), { r, c }));
  CHECK_THROWS_AS(density_map(t, Frame(8, 9, 0.5)), std::invalid_argument);

  BandwidthPlan p{ 0.1, 0.02, 0.2, 10, 6 };
  GpaTable c({ 0.25, 0.75 }, Volume(2, 2, 3, 1.5), p, Variant::gpa_cd, 0);
  const auto m = density_map(c, Frame(2, 3, 0.4));
  for (double x : m.values())
    CHECK(x == doctest::Approx(1.5));
}
