#pragma once

// Straight-line reference implementations used as test oracles. They share no
// code with the library beyond the container types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "voltip/voltip.hpp"

namespace oracle {

using voltip::BinaryMask;
using voltip::Dims;

inline BinaryMask random_mask(Dims d, double density, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  BinaryMask m(d, 0);
  for (auto& b : m.data()) b = u(gen) < density ? 1 : 0;
  return m;
}

/// Flood-fill labels in scan order; neighbours by Chebyshev (26) or
/// Manhattan (6) distance 1.
inline std::vector<std::uint32_t> bfs_labels(const BinaryMask& m, int conn) {
  const Dims d = m.dims();
  std::vector<std::uint32_t> lab(m.size(), 0);
  std::uint32_t next = 0;
  for (std::size_t k = 0; k < d.nz; ++k)
    for (std::size_t j = 0; j < d.ny; ++j)
      for (std::size_t i = 0; i < d.nx; ++i) {
        const std::size_t s = m.offset(i, j, k);
        if (!m[s] || lab[s]) continue;
        lab[s] = ++next;
        std::deque<std::size_t> q{s};
        while (!q.empty()) {
          const auto p = m.index_of(q.front());
          q.pop_front();
          for (int dz = -1; dz <= 1; ++dz)
            for (int dy = -1; dy <= 1; ++dy)
              for (int dx = -1; dx <= 1; ++dx) {
                const int manhattan = std::abs(dx) + std::abs(dy) + std::abs(dz);
                if (manhattan == 0 || (conn == 6 && manhattan != 1)) continue;
                const voltip::Index3 n{p.i + dx, p.j + dy, p.k + dz};
                if (!d.contains(n)) continue;
                const std::size_t o = m.offset(n.i, n.j, n.k);
                if (m[o] && !lab[o]) {
                  lab[o] = next;
                  q.push_back(o);
                }
              }
        }
      }
  return lab;
}

/// Same partition up to a relabelling (bijection between label sets).
inline bool same_partition(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
  if (a.size() != b.size()) return false;
  std::map<std::uint32_t, std::uint32_t> ab, ba;
  for (std::size_t n = 0; n < a.size(); ++n) {
    if ((a[n] == 0) != (b[n] == 0)) return false;
    if (a[n] == 0) continue;
    auto [it, fresh] = ab.emplace(a[n], b[n]);
    if (!fresh && it->second != b[n]) return false;
    auto [jt, fresh2] = ba.emplace(b[n], a[n]);
    if (!fresh2 && jt->second != a[n]) return false;
  }
  return true;
}

/// 6-connected flood fill of non-barrier voxels from the seed.
inline BinaryMask bfs_region(const BinaryMask& barrier, voltip::Index3 seed) {
  const Dims d = barrier.dims();
  BinaryMask out(d, 0);
  std::deque<voltip::Index3> q{seed};
  out(seed.i, seed.j, seed.k) = 1;
  const int steps[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  while (!q.empty()) {
    const auto p = q.front();
    q.pop_front();
    for (const auto& s : steps) {
      const voltip::Index3 n{p.i + s[0], p.j + s[1], p.k + s[2]};
      if (!d.contains(n) || barrier(n.i, n.j, n.k) || out(n.i, n.j, n.k)) continue;
      out(n.i, n.j, n.k) = 1;
      q.push_back(n);
    }
  }
  return out;
}

/// Squared distance to the nearest site by scanning every site.
inline std::vector<std::int64_t> brute_edt_squared(const BinaryMask& m) {
  std::vector<voltip::Index3> sites;
  for (std::size_t n = 0; n < m.size(); ++n)
    if (m[n]) sites.push_back(m.index_of(n));
  std::vector<std::int64_t> out(m.size());
  for (std::size_t n = 0; n < m.size(); ++n) {
    const auto p = m.index_of(n);
    std::int64_t best = INT64_MAX;
    for (const auto& s : sites) {
      const std::int64_t dx = p.i - s.i, dy = p.j - s.j, dz = p.k - s.k;
      best = std::min(best, dx * dx + dy * dy + dz * dz);
    }
    out[n] = best;
  }
  return out;
}

/// Chebyshev dilation by direct neighbourhood search.
inline BinaryMask brute_dilate(const BinaryMask& m, int r) {
  const Dims d = m.dims();
  BinaryMask out(d, 0);
  for (std::size_t n = 0; n < m.size(); ++n) {
    const auto p = m.index_of(n);
    for (int dz = -r; dz <= r && !out[n]; ++dz)
      for (int dy = -r; dy <= r && !out[n]; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
          const voltip::Index3 q{p.i + dx, p.j + dy, p.k + dz};
          if (d.contains(q) && m(q.i, q.j, q.k)) {
            out[n] = 1;
            break;
          }
        }
  }
  return out;
}

/// Weighted cost sum, step count and raw gravity coordinate for a threat
/// placed unrotated at integer origin (x, y, z). Returns the penalty when the
/// box leaves the grid.
inline double direct_objective(const voltip::Grid<double>& w, const voltip::Grid<double>& cost, long x, long y,
                               long z, double lambda1, double lambda2, double c_prime, double height,
                               double penalty) {
  const Dims t = w.dims(), b = cost.dims();
  if (x < 0 || y < 0 || z < 0 || x + static_cast<long>(t.nx) > static_cast<long>(b.nx) ||
      y + static_cast<long>(t.ny) > static_cast<long>(b.ny) || z + static_cast<long>(t.nz) > static_cast<long>(b.nz))
    return penalty;
  double l1 = 0, steps = 0;
  for (std::size_t k = 0; k < t.nz; ++k)
    for (std::size_t j = 0; j < t.ny; ++j)
      for (std::size_t i = 0; i < t.nx; ++i) {
        const double m = w(i, j, k) * cost(x + i, y + j, z + k);
        l1 += std::abs(m);
        steps += (m - c_prime) > 0 ? 1.0 : 0.0;
      }
  return l1 + lambda1 * steps + lambda2 * height;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("voltip_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace oracle
