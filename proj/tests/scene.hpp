#pragma once

// Synthetic fixed-camera scene: training frames drawn around a smooth mean
// field, then evaluation frames that are either fresh background or carry a
// square block pushed half the value range away from the local mean.

#include "dskde/eval.hpp"
#include "dskde/lattice.hpp"
#include "dskde/simulate.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace scene {

struct Options
{
  std::size_t rows = 180;
  std::size_t cols = 320;
  std::size_t n_train = 60;
  std::size_t n_vacant = 20;
  std::size_t n_anomalous = 20;
  std::size_t block = 90;
  double sigma = 0.16;
  double block_sd = 0.03;
  std::uint64_t seed = 2024;
};

struct Scene
{
  dskde::Frame mean;
  dskde::FrameStack train;
  std::vector<std::string> ids;
  std::vector<dskde::Frame> frames;
  std::vector<dskde::Annotation> truth;
};

inline void inject(dskde::Frame& f, const dskde::Frame& mean, const dskde::BBox& box, double sd, std::mt19937_64& rng)
{
  std::normal_distribution<double> noise(0.0, sd);
  for (std::size_t r = box.r0; r < box.r1; ++r)
    for (std::size_t c = box.c0; c < box.c1; ++c) {
      const double mu = mean(r, c);
      const double v = (mu < 0.5 ? mu + 0.5 : mu - 0.5) + noise(rng);
      f(r, c) = std::clamp(v, 0.0, 1.0);
    }
}

inline Scene make(const Options& o)
{
  Scene s;
  s.mean = dskde::synthetic_mean_field(o.rows, o.cols);
  s.train = dskde::simulate_stack(s.mean, o.n_train, o.sigma, o.seed);
  const std::size_t total = o.n_vacant + o.n_anomalous;
  const auto fresh = dskde::simulate_stack(s.mean, total, o.sigma, o.seed + 1);

  std::mt19937_64 rng(o.seed + 2);
  std::uniform_int_distribution<std::size_t> pick_r(0, o.rows - o.block);
  std::uniform_int_distribution<std::size_t> pick_c(0, o.cols - o.block);
  for (std::size_t k = 0; k < total; ++k) {
    // interleave so that every other frame is anomalous
    const bool anomalous = k % 2 == 1 ? k / 2 < o.n_anomalous : k / 2 >= o.n_vacant;
    char id[32];
    std::snprintf(id, sizeof id, "frame_%04zu", k);
    dskde::Frame f = fresh.frame(k);
    dskde::Annotation a{ id, dskde::Label::vacant, std::nullopt };
    if (anomalous) {
      const std::size_t r0 = pick_r(rng), c0 = pick_c(rng);
      const dskde::BBox box{ r0, r0 + o.block, c0, c0 + o.block };
      inject(f, s.mean, box, o.block_sd, rng);
      a.label = dskde::Label::unsafe;
      a.box = box;
    }
    s.ids.push_back(id);
    s.frames.push_back(std::move(f));
    s.truth.push_back(std::move(a));
  }
  return s;
}

} // namespace scene
