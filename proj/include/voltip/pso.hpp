#pragma once

// Global-best particle swarm minimiser over a box in R^D.
//
// Each iteration evaluates every particle, refreshes the personal and swarm
// bests, then moves the particles:
//   v <- w v + c1 r1 (p_best - x) + c2 r2 (g_best - x),   x <- x + v
// with one (r1, r2) pair per particle per iteration. Positions are clamped to
// the bounds and the velocity component is zeroed where a clamp happened.
//
// All random draws happen on the calling thread in particle order, and the
// objective is evaluated into per-particle slots, so the result depends only on
// the seed and never on the number of worker threads.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "voltip/grid.hpp"
#include "voltip/parallel.hpp"
#include "voltip/random.hpp"

namespace voltip {

struct Interval {
  double lo = 0, hi = 0;
};

template <std::size_t D>
struct SwarmConfig {
  double w = 0.729;
  double c1 = 1.494;
  double c2 = 1.494;
  std::size_t particles = 40;
  std::size_t iterations = 60;
  std::uint64_t seed = 0;
  std::array<Interval, D> bounds{};
  /// 0 = hardware concurrency (still capped by VOLTIP_THREADS).
  unsigned threads = 0;
  bool zero_initial_velocity = false;
  /// Optional starting points for the first particles; the rest are uniform.
  std::vector<std::array<double, D>> initial_positions;

  void validate() const {
    if (particles < 1) throw ValidationError("swarm: need at least one particle");
    if (iterations < 1) throw ValidationError("swarm: need at least one iteration");
    for (std::size_t d = 0; d < D; ++d) {
      const auto& b = bounds[d];
      if (!std::isfinite(b.lo) || !std::isfinite(b.hi) || b.lo > b.hi)
        throw ValidationError("swarm: bound " + std::to_string(d) + " is not a finite interval");
    }
    if (initial_positions.size() > particles) throw ValidationError("swarm: more initial positions than particles");
  }
};

template <std::size_t D>
struct SwarmResult {
  std::array<double, D> best{};
  double cost = std::numeric_limits<double>::infinity();
  /// Swarm-best cost after each iteration.
  std::vector<double> trace;
};

template <std::size_t D, class Objective>
SwarmResult<D> swarm_minimize(Objective&& objective, const SwarmConfig<D>& cfg) {
  cfg.validate();
  using Point = std::array<double, D>;
  const std::size_t n = cfg.particles;
  Rng rng(cfg.seed);

  std::vector<Point> pos(n), vel(n), pbest(n);
  std::vector<double> pbest_cost(n, std::numeric_limits<double>::infinity()), cost(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < D; ++d) {
      const auto& b = cfg.bounds[d];
      pos[i][d] = rng.uniform(b.lo, b.hi);
      const double span = b.hi - b.lo;
      vel[i][d] = cfg.zero_initial_velocity ? 0.0 : rng.uniform(-span, span);
    }
    if (i < cfg.initial_positions.size())
      for (std::size_t d = 0; d < D; ++d)
        pos[i][d] = std::clamp(cfg.initial_positions[i][d], cfg.bounds[d].lo, cfg.bounds[d].hi);
  }

  SwarmResult<D> res;
  res.trace.reserve(cfg.iterations);
  const unsigned threads = resolve_threads(cfg.threads);
  for (std::size_t t = 0; t < cfg.iterations; ++t) {
    parallel_for(n, threads, [&](std::size_t i) { cost[i] = objective(pos[i]); });
    for (std::size_t i = 0; i < n; ++i) {
      if (cost[i] < pbest_cost[i]) {
        pbest_cost[i] = cost[i];
        pbest[i] = pos[i];
      }
      if (pbest_cost[i] < res.cost) {
        res.cost = pbest_cost[i];
        res.best = pbest[i];
      }
    }
    res.trace.push_back(res.cost);

    for (std::size_t i = 0; i < n; ++i) {
      const double r1 = rng.uniform();
      const double r2 = rng.uniform();
      for (std::size_t d = 0; d < D; ++d) {
        double v = cfg.w * vel[i][d] + cfg.c1 * r1 * (pbest[i][d] - pos[i][d]) +
                   cfg.c2 * r2 * (res.best[d] - pos[i][d]);
        double x = pos[i][d] + v;
        const auto& b = cfg.bounds[d];
        if (x < b.lo || x > b.hi) {
          x = std::clamp(x, b.lo, b.hi);
          v = 0.0;
        }
        pos[i][d] = x;
        vel[i][d] = v;
      }
    }
  }
  return res;
}

}  // namespace voltip
