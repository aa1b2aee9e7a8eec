#pragma once

// Insertion pose search, blending and the TIP quality score.
//
// For a pose (x, y, z, alpha, beta, gamma) the indicator is rotated, the cost
// map is cropped at the rounded origin with the rotated extents, and
//   cost = sum(W .* C) + lambda1 * #{W .* C > c'} + lambda2 * height
// where height is the distance of the crop box from the floor of the grid
// along the gravity axis.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "voltip/grid.hpp"
#include "voltip/pso.hpp"
#include "voltip/rotate.hpp"
#include "voltip/threat_isolation.hpp"
#include "voltip/void_determination.hpp"

namespace voltip {

/// Raised when no pose inside the search bounds places the threat in the grid.
class InfeasibleBounds : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

enum class Axis { X = 0, Y = 1, Z = 2 };

struct Pose {
  double x = 0, y = 0, z = 0;
  double alpha = 0, beta = 0, gamma = 0;

  Angles angles() const { return {wrap_angle(alpha), wrap_angle(beta), wrap_angle(gamma)}; }
  /// Crop origin: coordinates rounded half up.
  Index3 origin() const {
    return {static_cast<std::int64_t>(std::floor(x + 0.5)), static_cast<std::int64_t>(std::floor(y + 0.5)),
            static_cast<std::int64_t>(std::floor(z + 0.5))};
  }
  std::array<double, 6> as_array() const { return {x, y, z, alpha, beta, gamma}; }
  static Pose from_array(const std::array<double, 6>& a) { return {a[0], a[1], a[2], a[3], a[4], a[5]}; }
  friend bool operator==(const Pose&, const Pose&) = default;
};

struct ObjectiveParams {
  double lambda1 = 0.01;
  double lambda2 = 1.0;
  double c_prime = 10.0;
  Axis gravity_axis = Axis::Y;
  /// True when larger coordinates along the gravity axis are lower (image rows).
  bool gravity_points_positive = true;
  Interp interp = Interp::Linear;

  void validate() const {
    if (!(c_prime > 0)) throw ValidationError("objective: c_prime must be positive");
    if (!(lambda1 >= 0) || !(lambda2 >= 0)) throw ValidationError("objective: lambda weights must be non-negative");
  }
};

using PsoConfig = SwarmConfig<6>;

/// Large finite cost for poses whose crop box leaves the grid.
inline double infeasible_penalty(const ThreatIndicator& ind, const BagCostMap& cmap) {
  return cmap.c * static_cast<double>(ind.active_voxels()) * 10.0;
}

/// Height of a crop box above the floor of the grid along the gravity axis.
inline double gravity_height(const BoundingBox& box, const Dims& grid, const ObjectiveParams& p) {
  const int a = static_cast<int>(p.gravity_axis);
  const std::int64_t origin[3] = {box.origin.i, box.origin.j, box.origin.k};
  if (p.gravity_points_positive)
    return static_cast<double>(static_cast<std::int64_t>(grid[a]) - static_cast<std::int64_t>(box.extent[a]) -
                               origin[a]);
  return static_cast<double>(origin[a]);
}

/// Objective for an already rotated weight grid.
inline double objective_for_rotated(const Grid<double>& rotated_w, const BagCostMap& cmap, Index3 origin,
                                    const ObjectiveParams& p, double penalty) {
  const BoundingBox box{origin, rotated_w.dims()};
  if (!box.fits_in(cmap.dims())) return penalty;
  double sum = 0;
  std::size_t above = 0;
  const Dims e = rotated_w.dims();
  for (std::size_t k = 0; k < e.nz; ++k)
    for (std::size_t j = 0; j < e.ny; ++j)
      for (std::size_t i = 0; i < e.nx; ++i) {
        const double wt = rotated_w(i, j, k);
        if (wt == 0) continue;
        const double v = wt * cmap.cost(origin.i + i, origin.j + j, origin.k + k);
        sum += v;
        if (v > p.c_prime) ++above;
      }
  return sum + p.lambda1 * static_cast<double>(above) + p.lambda2 * gravity_height(box, cmap.dims(), p);
}

inline double objective_cost(const ThreatIndicator& ind, const BagCostMap& cmap, const Pose& pose,
                             const ObjectiveParams& p = {}) {
  const Grid<double> rw = rotate(ind.w, pose.angles(), p.interp, 1.0);
  return objective_for_rotated(rw, cmap, pose.origin(), p, infeasible_penalty(ind, cmap));
}

/// Positions span every origin at which the unrotated threat fits; angles span
/// a full turn.
inline std::array<Interval, 6> default_bounds(const ThreatIndicator& ind, const BagCostMap& cmap) {
  std::array<Interval, 6> b{};
  for (int a = 0; a < 3; ++a) {
    const auto room = static_cast<double>(cmap.dims()[a]) - static_cast<double>(ind.dims()[a]);
    b[a] = {0.0, std::max(0.0, room)};
  }
  for (int a = 3; a < 6; ++a) b[a] = {-std::numbers::pi, std::numbers::pi};
  return b;
}

/// True if some integer origin inside the position bounds fits the threat
/// rotated by the in-bounds angles closest to zero.
inline bool bounds_feasible(const ThreatIndicator& ind, const BagCostMap& cmap, const std::array<Interval, 6>& b) {
  const Angles a{std::clamp(0.0, b[3].lo, b[3].hi), std::clamp(0.0, b[4].lo, b[4].hi),
                 std::clamp(0.0, b[5].lo, b[5].hi)};
  const Dims ext = rotated_dims(ind.dims(), Pose{0, 0, 0, a.alpha, a.beta, a.gamma}.angles());
  for (int ax = 0; ax < 3; ++ax) {
    const auto lo = static_cast<std::int64_t>(std::floor(b[ax].lo + 0.5));
    const auto hi = static_cast<std::int64_t>(std::floor(b[ax].hi + 0.5));
    const std::int64_t top = static_cast<std::int64_t>(cmap.dims()[ax]) - static_cast<std::int64_t>(ext[ax]);
    if (std::max<std::int64_t>(lo, 0) > std::min(hi, top)) return false;
  }
  return true;
}

struct PsoResult {
  Pose pose;
  double cost = 0;
  std::vector<double> trace;
};

inline PsoResult pso_optimize(const ThreatIndicator& ind, const BagCostMap& cmap, const ObjectiveParams& op,
                              const PsoConfig& cfg) {
  op.validate();
  cfg.validate();
  if (!bounds_feasible(ind, cmap, cfg.bounds))
    throw InfeasibleBounds("pso_optimize: no pose within the bounds fits the threat into the bag grid");
  const double penalty = infeasible_penalty(ind, cmap);
  auto objective = [&](const std::array<double, 6>& v) {
    const Pose pose = Pose::from_array(v);
    const Grid<double> rw = rotate(ind.w, pose.angles(), op.interp, 1.0);
    return objective_for_rotated(rw, cmap, pose.origin(), op, penalty);
  };
  auto res = swarm_minimize<6>(objective, cfg);
  return {Pose::from_array(res.best), res.cost, std::move(res.trace)};
}

/// Adds the indicator-weighted, rotated threat onto the bag at the pose origin.
/// Voxels outside the placed box are untouched; sums saturate at max_intensity.
inline Volume blend(const Volume& threat, const ThreatIndicator& ind, const Volume& bag, const Pose& pose,
                    Interp interp = Interp::Linear) {
  require_same_dims(threat, ind.w, "blend: threat vs indicator");
  Grid<double> weighted = to_double(threat);
  for (std::size_t n = 0; n < weighted.size(); ++n) weighted[n] *= ind.w[n];
  const Grid<double> placed = rotate(weighted, pose.angles(), interp, threat.max_intensity());
  const BoundingBox box{pose.origin(), placed.dims()};
  if (!box.fits_in(bag.dims())) throw ValidationError("blend: pose places the threat outside the bag grid");
  Volume out = bag;
  const Dims e = placed.dims();
  for (std::size_t k = 0; k < e.nz; ++k)
    for (std::size_t j = 0; j < e.ny; ++j)
      for (std::size_t i = 0; i < e.nx; ++i) {
        const double add = placed(i, j, k);
        if (add == 0) continue;
        auto& v = out(box.origin.i + i, box.origin.j + j, box.origin.k + k);
        v = to_intensity(v + add, bag.max_intensity());
      }
  return out;
}

/// 100 - 0.01 * K * cost / threat_voxels, clamped to [0, 100], with K = 1e4 / c
/// so a fully outside insertion scores 0 and a perfect one 100.
inline double quality_score(double cost, std::size_t threat_voxels, double c = 100.0) {
  if (threat_voxels < 1) throw ValidationError("quality_score: threat_voxels must be >= 1");
  if (!(c > 0)) throw ValidationError("quality_score: c must be positive");
  const double gain = 1e4 / c;
  const double f = 100.0 - 0.01 * (cost / static_cast<double>(threat_voxels)) * gain;
  return std::max(0.0, std::min(100.0, f));
}

struct TipResult {
  Volume volume;
  Pose pose;
  double cost = 0;
  double score = 0;
  std::size_t threat_voxels = 0;
  std::vector<double> trace;
  /// False when no pose fit; volume is then the untouched bag.
  bool feasible = true;

  friend bool operator==(const TipResult&, const TipResult&) = default;
};

inline TipResult insert(const Volume& threat, const ThreatIndicator& ind, const Volume& bag, const BagCostMap& cmap,
                        const ObjectiveParams& op, const PsoConfig& cfg) {
  require_same_dims(threat, ind.w, "insert: threat vs indicator");
  require_same_dims(bag, cmap.cost, "insert: bag vs cost map");
  TipResult r;
  r.threat_voxels = ind.active_voxels();
  if (r.threat_voxels == 0) throw ValidationError("insert: indicator has no active voxel");
  try {
    auto best = pso_optimize(ind, cmap, op, cfg);
    r.pose = best.pose;
    r.cost = best.cost;
    r.trace = std::move(best.trace);
  } catch (const InfeasibleBounds&) {
    r.feasible = false;
    r.pose = {cfg.bounds[0].lo, cfg.bounds[1].lo, cfg.bounds[2].lo, 0, 0, 0};
    r.cost = infeasible_penalty(ind, cmap);
    r.volume = bag;
    r.score = quality_score(r.cost, r.threat_voxels, cmap.c);
    return r;
  }
  const double penalty = infeasible_penalty(ind, cmap);
  if (r.cost >= penalty) {
    r.feasible = false;
    r.volume = bag;
  } else {
    r.volume = blend(threat, ind, bag, r.pose, op.interp);
  }
  r.score = quality_score(r.cost, r.threat_voxels, cmap.c);
  return r;
}

}  // namespace voltip
