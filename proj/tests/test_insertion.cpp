#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <set>

#include "oracles.hpp"

using namespace voltip;

namespace {

ThreatIndicator uniform_indicator(Dims d, double w = 1.0) {
  return {Grid<double>(d, w), Grid<std::uint8_t>(d, static_cast<std::uint8_t>(ThreatRegion::Body))};
}

BagCostMap cost_map(Grid<double> cost, double c = 100) {
  Grid<std::uint8_t> region(cost.dims(), 0);
  for (std::size_t n = 0; n < cost.size(); ++n)
    region[n] = static_cast<std::uint8_t>(cost[n] == 0 ? BagRegion::Void
                                                       : (cost[n] == c ? BagRegion::Outer : BagRegion::Content));
  return {std::move(cost), std::move(region), c, 4095};
}

Grid<double> random_costs(Dims d, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Grid<double> g(d, 0.0);
  for (auto& x : g.data()) {
    const double r = u(gen);
    x = r < 0.3 ? 0.0 : (r < 0.4 ? 100.0 : 100.0 * u(gen));
  }
  return g;
}

ThreatIndicator random_indicator(Dims d, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ThreatIndicator ind = uniform_indicator(d, 0.0);
  for (std::size_t n = 0; n < ind.w.size(); ++n) {
    const double r = u(gen);
    ind.w[n] = r < 0.5 ? 1.0 : (r < 0.8 ? 1.0 / std::pow(1 + 3 * u(gen), 2) : 0.0);
  }
  return ind;
}

PsoConfig position_only(const ThreatIndicator& ind, const BagCostMap& cmap, std::uint64_t seed) {
  PsoConfig cfg;
  cfg.seed = seed;
  cfg.bounds = default_bounds(ind, cmap);
  for (int a = 3; a < 6; ++a) cfg.bounds[a] = {0, 0};
  return cfg;
}

}  // namespace

// ---- objective

TEST(Objective, ThreatInVoidCostsNothing) {
  const ThreatIndicator ind = uniform_indicator({3, 3, 3});
  const BagCostMap cmap = cost_map(Grid<double>({8, 8, 8}, 0.0));
  ObjectiveParams p;
  p.lambda2 = 0;
  EXPECT_EQ(objective_cost(ind, cmap, {2, 2, 2, 0, 0, 0}, p), 0.0);
  EXPECT_EQ(objective_cost(ind, cmap, {2, 2, 2, 0.3, -1.0, 2.0}, p), 0.0);
}

TEST(Objective, SingleVoxelOnContentAboveStep) {
  const ThreatIndicator ind = uniform_indicator({1, 1, 1});
  const BagCostMap cmap = cost_map(Grid<double>({1, 1, 1}, 10.01));
  ObjectiveParams p;
  p.lambda2 = 0;
  EXPECT_DOUBLE_EQ(objective_cost(ind, cmap, {}, p), 10.02);
  EXPECT_EQ(p.lambda1, 0.01);
  EXPECT_EQ(p.c_prime, 10.0);
}

TEST(Objective, MatchesTripleLoopAtZeroAngles) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const ThreatIndicator ind = random_indicator({5, 5, 5}, s);
    const BagCostMap cmap = cost_map(random_costs({12, 12, 12}, 1000 + s));
    const ObjectiveParams p;
    const double penalty = 100.0 * static_cast<double>(count_nonzero(ind.w)) * 10.0;
    for (long z = -1; z <= 8; z += 3)
      for (long y = 0; y <= 8; y += 2)
        for (long x = 0; x <= 8; ++x) {
          const double height = 12.0 - 5.0 - static_cast<double>(y);
          const double want = oracle::direct_objective(ind.w, cmap.cost, x, y, z, 0.01, 1.0, 10.0, height, penalty);
          const double got = objective_cost(ind, cmap, {static_cast<double>(x), static_cast<double>(y),
                                                        static_cast<double>(z), 0, 0, 0});
          EXPECT_NEAR(got, want, 1e-9 * std::abs(want)) << x << "," << y << "," << z;
        }
  }
}

TEST(Objective, OriginRoundsHalfUp) {
  EXPECT_EQ((Pose{1.5, 2.49, -0.5, 0, 0, 0}.origin().i), 2);
  EXPECT_EQ((Pose{1.5, 2.49, -0.5, 0, 0, 0}.origin().j), 2);
  EXPECT_EQ((Pose{1.5, 2.49, -0.5, 0, 0, 0}.origin().k), 0);
}

TEST(Objective, InfeasiblePoseGetsPenalty) {
  const ThreatIndicator ind = uniform_indicator({4, 4, 4});
  const BagCostMap cmap = cost_map(Grid<double>({8, 8, 8}, 50.0));
  const double pen = infeasible_penalty(ind, cmap);
  EXPECT_EQ(pen, 100.0 * 64 * 10);
  EXPECT_EQ(objective_cost(ind, cmap, {5, 0, 0, 0, 0, 0}), pen);
  EXPECT_EQ(objective_cost(ind, cmap, {-1, 0, 0, 0, 0, 0}), pen);
  EXPECT_LT(objective_cost(ind, cmap, {4, 4, 4, 0, 0, 0}), pen);
}

TEST(Objective, HigherPoseCostsMore) {
  const ThreatIndicator ind = uniform_indicator({3, 3, 3});
  const BagCostMap cmap = cost_map(Grid<double>({10, 10, 10}, 5.0));
  for (Axis axis : {Axis::X, Axis::Y, Axis::Z}) {
    ObjectiveParams p;
    p.gravity_axis = axis;
    Pose low{4, 4, 4, 0, 0, 0}, high = low;
    double* lo_c[3] = {&low.x, &low.y, &low.z};
    double* hi_c[3] = {&high.x, &high.y, &high.z};
    *lo_c[static_cast<int>(axis)] = 6;  // larger coordinate sits lower
    *hi_c[static_cast<int>(axis)] = 2;
    EXPECT_GT(objective_cost(ind, cmap, high, p), objective_cost(ind, cmap, low, p));
    EXPECT_DOUBLE_EQ(objective_cost(ind, cmap, high, p) - objective_cost(ind, cmap, low, p), 4.0);
    p.gravity_points_positive = false;
    EXPECT_LT(objective_cost(ind, cmap, high, p), objective_cost(ind, cmap, low, p));
  }
}

TEST(Objective, ArgminInvariantUnderCommonScaling) {
  // The step threshold is expressed in cost-map units, so it scales with the map.
  for (std::uint64_t s = 0; s < 5; ++s) {
    const ThreatIndicator ind = random_indicator({3, 3, 3}, 50 + s);
    const BagCostMap cmap = cost_map(random_costs({8, 8, 8}, 60 + s));
    const double k = 3.5;
    Grid<double> scaled = cmap.cost;
    for (auto& x : scaled.data()) x *= k;
    const BagCostMap cmap2{scaled, cmap.region, cmap.c * k, cmap.m};
    ObjectiveParams p, q;
    p.lambda2 = q.lambda2 = 0;
    p.lambda1 = 2.0;
    q.lambda1 = 2.0 * k;
    q.c_prime = p.c_prime * k;
    auto argmin = [&](const BagCostMap& m, const ObjectiveParams& op) {
      double best = std::numeric_limits<double>::infinity();
      std::set<std::array<int, 3>> at;
      for (int z = 0; z <= 5; ++z)
        for (int y = 0; y <= 5; ++y)
          for (int x = 0; x <= 5; ++x) {
            const double c = objective_cost(ind, m, {double(x), double(y), double(z), 0, 0, 0}, op);
            if (c < best - 1e-9 * std::abs(best)) {
              best = c;
              at.clear();
            }
            if (std::abs(c - best) <= 1e-9 * std::abs(best)) at.insert({x, y, z});
          }
      return at;
    };
    EXPECT_EQ(argmin(cmap, p), argmin(cmap2, q));
  }
}

// ---- swarm

TEST(Swarm, QuadraticSurrogate) {
  SwarmConfig<2> cfg;
  cfg.particles = 30;
  cfg.iterations = 100;
  cfg.seed = 3;
  cfg.bounds = {Interval{-10, 10}, Interval{-10, 10}};
  const auto r = swarm_minimize<2>(
      [](const std::array<double, 2>& v) { return (v[0] - 3) * (v[0] - 3) + (v[1] - 1) * (v[1] - 1); }, cfg);
  EXPECT_NEAR(r.best[0], 3.0, 1e-3);
  EXPECT_NEAR(r.best[1], 1.0, 1e-3);
  for (std::size_t t = 1; t < r.trace.size(); ++t) EXPECT_LE(r.trace[t], r.trace[t - 1]);
}

TEST(Swarm, ConfigValidation) {
  SwarmConfig<1> cfg;
  cfg.bounds = {Interval{1, 0}};
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg.bounds = {Interval{0, 1}};
  cfg.particles = 0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg.particles = 1;
  cfg.iterations = 0;
  EXPECT_THROW(cfg.validate(), ValidationError);
}

TEST(Pso, SingleParticleSingleStep) {
  const ThreatIndicator ind = random_indicator({3, 3, 3}, 7);
  const BagCostMap cmap = cost_map(random_costs({9, 9, 9}, 8));
  PsoConfig cfg;
  cfg.particles = 1;
  cfg.iterations = 1;
  cfg.zero_initial_velocity = true;
  cfg.bounds = default_bounds(ind, cmap);
  const Pose start{2, 3, 4, 0.1, -0.2, 0.3};
  cfg.initial_positions = {start.as_array()};
  const ObjectiveParams op;
  const PsoResult r = pso_optimize(ind, cmap, op, cfg);
  EXPECT_EQ(r.pose, start);
  EXPECT_EQ(r.cost, objective_cost(ind, cmap, start, op));
  ASSERT_EQ(r.trace.size(), 1u);
}

TEST(Pso, NearExhaustiveOnSingleVoid) {
  // Void slot shaped like the threat inside content, graded so the swarm has
  // a basin to follow.
  const Dims d{20, 20, 20};
  Grid<double> cost(d, 0.0);
  for (std::size_t n = 0; n < cost.size(); ++n) {
    const auto p = cost.index_of(n);
    const double r = std::max({std::abs(p.i - 12.0), std::abs(p.j - 7.0), std::abs(p.k - 9.0)});
    cost[n] = r <= 1 ? 0.0 : std::min(90.0, 5.0 * r);
  }
  const BagCostMap cmap = cost_map(cost);
  const ThreatIndicator ind = uniform_indicator({3, 3, 3});
  ObjectiveParams op;
  op.lambda2 = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int z = 0; z <= 17; ++z)
    for (int y = 0; y <= 17; ++y)
      for (int x = 0; x <= 17; ++x)
        best = std::min(best, objective_cost(ind, cmap, {double(x), double(y), double(z), 0, 0, 0}, op));
  EXPECT_EQ(best, 0.0);
  int hits = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const PsoResult r = pso_optimize(ind, cmap, op, position_only(ind, cmap, s));
    hits += r.cost <= best * 1.05 + 1e-12;
    EXPECT_EQ(r.pose.alpha, 0.0);
  }
  EXPECT_GE(hits, 9);
}

TEST(Pso, InfeasibleBoundsThrow) {
  const ThreatIndicator ind = uniform_indicator({10, 4, 4});
  const BagCostMap cmap = cost_map(Grid<double>({8, 8, 8}, 0.0));
  PsoConfig cfg = position_only(ind, cmap, 0);
  EXPECT_THROW(pso_optimize(ind, cmap, {}, cfg), InfeasibleBounds);
}

TEST(Pso, DeterministicAcrossThreadCounts) {
  const ThreatIndicator ind = random_indicator({4, 5, 3}, 11);
  const BagCostMap cmap = cost_map(random_costs({14, 12, 13}, 12));
  PsoConfig cfg;
  cfg.bounds = default_bounds(ind, cmap);
  cfg.seed = 99;
  cfg.particles = 12;
  cfg.iterations = 15;
  std::vector<PsoResult> runs;
  for (unsigned t : {1u, 2u, 8u}) {
    cfg.threads = t;
    runs.push_back(pso_optimize(ind, cmap, {}, cfg));
  }
  for (const auto& r : runs) {
    EXPECT_EQ(r.pose, runs[0].pose);
    EXPECT_EQ(r.cost, runs[0].cost);
    EXPECT_EQ(r.trace, runs[0].trace);
    for (std::size_t t = 1; t < r.trace.size(); ++t) EXPECT_LE(r.trace[t], r.trace[t - 1]);
  }
}

// ---- blending

TEST(Blend, ZeroIndicatorLeavesBag) {
  const Volume threat({3, 3, 3}, 2000);
  const Volume bag({8, 8, 8}, 700);
  const ThreatIndicator ind = uniform_indicator({3, 3, 3}, 0.0);
  EXPECT_EQ(blend(threat, ind, bag, {2, 2, 2, 0.4, 0.1, -0.3}), bag);
}

TEST(Blend, AddsIntoZeroBackground) {
  const Volume threat({3, 3, 3}, 1000);
  const Volume bag({8, 8, 8}, 0);
  const Volume out = blend(threat, uniform_indicator({3, 3, 3}), bag, {1, 2, 3, 0, 0, 0});
  for (std::size_t n = 0; n < out.size(); ++n) {
    const auto p = out.index_of(n);
    const bool inside = p.i >= 1 && p.i < 4 && p.j >= 2 && p.j < 5 && p.k >= 3 && p.k < 6;
    EXPECT_EQ(out[n], inside ? 1000 : 0);
  }
}

TEST(Blend, SaturatesAtMax) {
  const Volume out = blend(Volume({1, 1, 1}, 3000), uniform_indicator({1, 1, 1}), Volume({2, 2, 2}, 2000),
                           {1, 1, 1, 0, 0, 0});
  EXPECT_EQ(out(1, 1, 1), 4095);
  EXPECT_EQ(out(0, 0, 0), 2000);
}

TEST(Blend, RotatedPlacementNeverTouchesOutsideBox) {
  std::mt19937_64 gen(5);
  Volume bag({16, 16, 16}, 0);
  for (auto& v : bag.data()) v = static_cast<std::uint16_t>(gen() % 4096);
  const Volume threat({5, 4, 3}, 1500);
  const ThreatIndicator ind = random_indicator({5, 4, 3}, 6);
  const Pose pose{4, 3, 5, 0.7, -0.4, 1.2};
  const Volume out = blend(threat, ind, bag, pose);
  const Dims e = rotated_dims(threat.dims(), pose.angles());
  const Index3 o = pose.origin();
  for (std::size_t n = 0; n < out.size(); ++n) {
    const auto p = out.index_of(n);
    const bool inside = p.i >= o.i && p.i < o.i + std::int64_t(e.nx) && p.j >= o.j && p.j < o.j + std::int64_t(e.ny) &&
                        p.k >= o.k && p.k < o.k + std::int64_t(e.nz);
    if (!inside) EXPECT_EQ(out[n], bag[n]);
  }
  EXPECT_THROW(blend(threat, ind, bag, {14, 0, 0, 0, 0, 0}), ValidationError);
}

// ---- score

TEST(Score, Endpoints) {
  EXPECT_EQ(quality_score(0, 100), 100.0);
  EXPECT_EQ(quality_score(100.0 * 37, 37), 0.0);  // f = 100 - 0.01 * 10000
  EXPECT_EQ(quality_score(-50.0 * 10, 10), 100.0);  // f = 150
  EXPECT_DOUBLE_EQ(quality_score(25.0 * 8, 8), 75.0);
  EXPECT_THROW(quality_score(1, 0), ValidationError);
}

TEST(Score, MonotoneAndBounded) {
  double prev = 101;
  for (int i = 0; i < 1000; ++i) {
    const double s = quality_score(-200 + 0.5 * i * 37, 37);
    EXPECT_LE(s, prev);
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 100.0);
    prev = s;
  }
}

// ---- end to end

TEST(Insert, AdequateVoidScoresHighAndStaysInside) {
  const Phantom bag = generate({PhantomKind::HollowBoxBag, {32, 32, 32}, 1, 0, 20});
  const IsolationResult iso = isolate_threat(generate({PhantomKind::CubeThreat, {16, 16, 16}, 2, 0, 20}).volume);
  const BagCostMap cmap = determine_voids(bag.volume);
  PsoConfig cfg;
  cfg.bounds = default_bounds(iso.indicator, cmap);
  cfg.seed = 4;
  const TipResult r = insert(iso.threat, iso.indicator, bag.volume, cmap, {}, cfg);
  EXPECT_TRUE(r.feasible);
  EXPECT_GE(r.score, 90.0);
  EXPECT_EQ(r.threat_voxels, iso.indicator.active_voxels());
  EXPECT_EQ(r.score, quality_score(r.cost, r.threat_voxels, 100));

  Grid<double> body(iso.indicator.dims(), 0.0);
  for (std::size_t n = 0; n < body.size(); ++n) body[n] = iso.indicator.region[n] == 2 ? 1.0 : 0.0;
  const Grid<double> placed = rotate(body, r.pose.angles(), Interp::Nearest, 1.0);
  const Index3 o = r.pose.origin();
  for (std::size_t n = 0; n < placed.size(); ++n) {
    if (placed[n] < 0.5) continue;
    const auto p = placed.index_of(n);
    EXPECT_NE(bag.truth.region(o.i + p.i, o.j + p.j, o.k + p.k), static_cast<std::uint8_t>(PhantomTag::Outer));
  }
}

TEST(Insert, OversizedThreatIsPenalised) {
  const Phantom bag = generate({PhantomKind::HollowBoxBag, {16, 16, 16}, 1, 0, 20});
  const IsolationResult iso = isolate_threat(generate({PhantomKind::CubeThreat, {48, 48, 48}, 2, 0, 20}).volume);
  const BagCostMap cmap = determine_voids(bag.volume);
  PsoConfig cfg;
  cfg.bounds = default_bounds(iso.indicator, cmap);
  const TipResult r = insert(iso.threat, iso.indicator, bag.volume, cmap, {}, cfg);
  EXPECT_FALSE(r.feasible);
  EXPECT_LE(r.score, 10.0);
  EXPECT_EQ(r.volume, bag.volume);
}

TEST(Insert, SameSeedSameResult) {
  const Phantom bag = generate({PhantomKind::ClutteredBag, {24, 24, 24}, 3, 0.3, 20});
  const IsolationResult iso = isolate_threat(generate({PhantomKind::CubeThreat, {12, 12, 12}, 2, 0, 20}).volume);
  const BagCostMap cmap = determine_voids(bag.volume);
  PsoConfig cfg;
  cfg.bounds = default_bounds(iso.indicator, cmap);
  cfg.seed = 17;
  cfg.particles = 10;
  cfg.iterations = 10;
  const TipResult a = insert(iso.threat, iso.indicator, bag.volume, cmap, {}, cfg);
  const TipResult b = insert(iso.threat, iso.indicator, bag.volume, cmap, {}, cfg);
  EXPECT_TRUE(a == b);
}
