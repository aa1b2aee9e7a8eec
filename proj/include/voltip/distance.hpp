#pragma once

// Exact Euclidean distance transform (Maurer, Qi & Raghavan 2003).
//
// Each axis pass builds the partial Voronoi diagram of the feature sites on a
// line and reads off squared distances, so the whole transform is linear in
// the voxel count and uses integer arithmetic throughout.

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "voltip/grid.hpp"

namespace voltip {

struct DistanceField {
  /// Squared distance in voxel units; exact.
  Grid<std::int64_t> squared;
  /// sqrt(squared).
  Grid<double> d;
};

namespace detail {

inline constexpr std::int64_t kFar = std::numeric_limits<std::int64_t>::max() / 4;

// True when site v is hidden by its neighbours u and w.
inline bool remove_edt(std::int64_t du, std::int64_t dv, std::int64_t dw, std::int64_t u, std::int64_t v,
                       std::int64_t w) {
  const std::int64_t a = v - u, b = w - v, c = w - u;
  return c * dv - b * du - a * dw - a * b * c > 0;
}

// In-place pass over one line of partial squared distances.
inline void voronoi_edt(std::vector<std::int64_t>& g, std::vector<std::int64_t>& gs,
                        std::vector<std::int64_t>& hs) {
  const auto n = static_cast<std::int64_t>(g.size());
  gs.clear();
  hs.clear();
  for (std::int64_t i = 0; i < n; ++i) {
    if (g[i] >= kFar) continue;
    while (gs.size() >= 2 &&
           remove_edt(gs[gs.size() - 2], gs.back(), g[i], hs[hs.size() - 2], hs.back(), i)) {
      gs.pop_back();
      hs.pop_back();
    }
    gs.push_back(g[i]);
    hs.push_back(i);
  }
  if (gs.empty()) return;
  std::size_t l = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    auto at = [&](std::size_t s) { return gs[s] + (hs[s] - i) * (hs[s] - i); };
    while (l + 1 < gs.size() && at(l) > at(l + 1)) ++l;
    g[i] = at(l);
  }
}

}  // namespace detail

/// Distance from every voxel to the nearest true voxel of `m`, in voxel units.
inline DistanceField distance_transform(const BinaryMask& m) {
  const Dims d = m.dims();
  if (count_nonzero(m) == 0) throw ValidationError("distance_transform: mask has no foreground voxel");

  Grid<std::int64_t> sq(d, detail::kFar, m.spacing());
  for (std::size_t n = 0; n < m.size(); ++n)
    if (m[n]) sq[n] = 0;

  std::vector<std::int64_t> line, gs, hs;
  for (int axis = 0; axis < 3; ++axis) {
    const std::size_t len = d[axis];
    const std::size_t stride = axis == 0 ? 1 : (axis == 1 ? d.nx : d.nx * d.ny);
    const std::size_t lines = d.size() / len;
    line.resize(len);
    for (std::size_t ln = 0; ln < lines; ++ln) {
      std::size_t base;
      if (axis == 0)
        base = ln * d.nx;
      else if (axis == 1)
        base = (ln % d.nx) + (ln / d.nx) * d.nx * d.ny;
      else
        base = ln;
      for (std::size_t t = 0; t < len; ++t) line[t] = sq[base + t * stride];
      detail::voronoi_edt(line, gs, hs);
      for (std::size_t t = 0; t < len; ++t) sq[base + t * stride] = line[t];
    }
  }

  Grid<double> dist(d, 0.0, m.spacing());
  for (std::size_t n = 0; n < sq.size(); ++n) dist[n] = std::sqrt(static_cast<double>(sq[n]));
  return {std::move(sq), std::move(dist)};
}

}  // namespace voltip
