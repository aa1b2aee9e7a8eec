#pragma once

// Binary-mask primitives shared by the threat and bag segmentation pipelines.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <deque>
#include <numeric>
#include <vector>

#include "voltip/grid.hpp"

namespace voltip {

enum class Connectivity { Six = 6, TwentySix = 26 };

struct LabelMap {
  Grid<std::uint32_t> labels;
  /// component_sizes[l] is the voxel count of label l; entry 0 counts background.
  std::vector<std::size_t> component_sizes;

  std::size_t component_count() const noexcept {
    return component_sizes.empty() ? 0 : component_sizes.size() - 1;
  }
};

template <class T>
BinaryMask threshold(const Grid<T>& v, double t) {
  if (t < 0) throw ValidationError("threshold must be non-negative");
  BinaryMask m(v.dims(), 0, v.spacing());
  for (std::size_t n = 0; n < v.size(); ++n) m[n] = static_cast<double>(v[n]) > t ? 1 : 0;
  return m;
}

inline BinaryMask mask_not(const BinaryMask& a) {
  BinaryMask r = a;
  for (auto& x : r.data()) x = x ? 0 : 1;
  return r;
}

inline BinaryMask mask_and(const BinaryMask& a, const BinaryMask& b) {
  require_same_dims(a, b, "mask_and");
  BinaryMask r = a;
  for (std::size_t n = 0; n < r.size(); ++n) r[n] = (a[n] && b[n]) ? 1 : 0;
  return r;
}

inline BinaryMask mask_or(const BinaryMask& a, const BinaryMask& b) {
  require_same_dims(a, b, "mask_or");
  BinaryMask r = a;
  for (std::size_t n = 0; n < r.size(); ++n) r[n] = (a[n] || b[n]) ? 1 : 0;
  return r;
}

/// a \ b
inline BinaryMask mask_minus(const BinaryMask& a, const BinaryMask& b) {
  require_same_dims(a, b, "mask_minus");
  BinaryMask r = a;
  for (std::size_t n = 0; n < r.size(); ++n) r[n] = (a[n] && !b[n]) ? 1 : 0;
  return r;
}

namespace detail {

class DisjointSets {
 public:
  std::uint32_t make() {
    parent_.push_back(static_cast<std::uint32_t>(parent_.size()));
    return parent_.back();
  }
  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  // Keeps the smaller root so the representative is the earliest provisional label.
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::uint32_t> parent_;
};

}  // namespace detail

/// Two-pass raster labelling with union-find. Final labels are 1..K in the
/// order their first voxel appears in x-fastest scan order.
inline LabelMap connected_components(const BinaryMask& m, Connectivity conn = Connectivity::TwentySix) {
  const Dims d = m.dims();
  Grid<std::uint32_t> provisional(d, 0, m.spacing());
  detail::DisjointSets sets;
  sets.make();  // slot 0 = background

  // Already-visited neighbours in raster order.
  std::vector<Index3> back;
  for (int dk = -1; dk <= 0; ++dk)
    for (int dj = -1; dj <= 1; ++dj)
      for (int di = -1; di <= 1; ++di) {
        if (dk == 0 && (dj > 0 || (dj == 0 && di >= 0))) continue;
        const int manhattan = std::abs(di) + std::abs(dj) + std::abs(dk);
        if (conn == Connectivity::Six && manhattan != 1) continue;
        back.push_back({di, dj, dk});
      }

  for (std::size_t k = 0; k < d.nz; ++k)
    for (std::size_t j = 0; j < d.ny; ++j)
      for (std::size_t i = 0; i < d.nx; ++i) {
        if (!m(i, j, k)) continue;
        std::uint32_t label = 0;
        for (const auto& o : back) {
          const Index3 q{static_cast<std::int64_t>(i) + o.i, static_cast<std::int64_t>(j) + o.j,
                         static_cast<std::int64_t>(k) + o.k};
          if (!d.contains(q)) continue;
          const std::uint32_t nl = provisional(q.i, q.j, q.k);
          if (nl == 0) continue;
          if (label == 0)
            label = nl;
          else
            sets.unite(label, nl);
        }
        provisional(i, j, k) = label ? label : sets.make();
      }

  LabelMap out{Grid<std::uint32_t>(d, 0, m.spacing()), {0}};
  std::vector<std::uint32_t> final_of_root;
  for (std::size_t n = 0; n < provisional.size(); ++n) {
    const std::uint32_t p = provisional[n];
    if (p == 0) {
      ++out.component_sizes[0];
      continue;
    }
    const std::uint32_t root = sets.find(p);
    if (root >= final_of_root.size()) final_of_root.resize(root + 1, 0);
    if (final_of_root[root] == 0) {
      out.component_sizes.push_back(0);
      final_of_root[root] = static_cast<std::uint32_t>(out.component_sizes.size() - 1);
    }
    const std::uint32_t l = final_of_root[root];
    out.labels[n] = l;
    ++out.component_sizes[l];
  }
  return out;
}

/// Ties on size go to the smaller label id.
inline BinaryMask largest_component(const LabelMap& lm) {
  if (lm.component_count() == 0) throw ValidationError("largest_component: empty foreground");
  std::uint32_t best = 1;
  for (std::uint32_t l = 2; l < lm.component_sizes.size(); ++l)
    if (lm.component_sizes[l] > lm.component_sizes[best]) best = l;
  BinaryMask m(lm.labels.dims(), 0, lm.labels.spacing());
  for (std::size_t n = 0; n < m.size(); ++n) m[n] = lm.labels[n] == best ? 1 : 0;
  return m;
}

/// Dilation by a (2r+1)^3 cube, done as three separable 1D passes with
/// running counts.
inline BinaryMask dilate(const BinaryMask& m, int radius) {
  if (radius < 1) throw ValidationError("dilate: radius must be >= 1");
  const Dims d = m.dims();
  BinaryMask cur = m;
  BinaryMask next(d, 0, m.spacing());
  std::vector<std::uint32_t> prefix;
  for (int axis = 0; axis < 3; ++axis) {
    const std::size_t len = d[axis];
    const std::size_t stride = axis == 0 ? 1 : (axis == 1 ? d.nx : d.nx * d.ny);
    const std::size_t lines = d.size() / len;
    prefix.assign(len + 1, 0);
    for (std::size_t line = 0; line < lines; ++line) {
      // Base offset of the line: decompose `line` over the two other axes.
      std::size_t base;
      if (axis == 0)
        base = line * d.nx;
      else if (axis == 1)
        base = (line % d.nx) + (line / d.nx) * d.nx * d.ny;
      else
        base = line;
      for (std::size_t t = 0; t < len; ++t) prefix[t + 1] = prefix[t] + (cur[base + t * stride] ? 1u : 0u);
      for (std::size_t t = 0; t < len; ++t) {
        const std::size_t lo = t >= static_cast<std::size_t>(radius) ? t - radius : 0;
        const std::size_t hi = std::min(len, t + radius + 1);
        next[base + t * stride] = prefix[hi] - prefix[lo] > 0 ? 1 : 0;
      }
    }
    std::swap(cur, next);
  }
  return cur;
}

/// 6-connected flood fill of non-barrier voxels from `seed`.
inline BinaryMask region_grow(const BinaryMask& barrier, Index3 seed) {
  const Dims d = barrier.dims();
  if (!d.contains(seed)) throw ValidationError("region_grow: seed outside volume");
  if (barrier(seed.i, seed.j, seed.k)) throw ValidationError("region_grow: seed lies inside the barrier");
  BinaryMask region(d, 0, barrier.spacing());
  std::deque<std::size_t> queue;
  const std::size_t s = region.offset(seed.i, seed.j, seed.k);
  region[s] = 1;
  queue.push_back(s);
  const std::int64_t off[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  while (!queue.empty()) {
    const Index3 p = region.index_of(queue.front());
    queue.pop_front();
    for (const auto& o : off) {
      const Index3 q{p.i + o[0], p.j + o[1], p.k + o[2]};
      if (!d.contains(q)) continue;
      const std::size_t qn = region.offset(q.i, q.j, q.k);
      if (region[qn] || barrier[qn]) continue;
      region[qn] = 1;
      queue.push_back(qn);
    }
  }
  return region;
}

inline BoundingBox bounding_box(const BinaryMask& m) {
  const Dims d = m.dims();
  std::int64_t lo[3] = {INT64_MAX, INT64_MAX, INT64_MAX}, hi[3] = {-1, -1, -1};
  for (std::size_t k = 0; k < d.nz; ++k)
    for (std::size_t j = 0; j < d.ny; ++j)
      for (std::size_t i = 0; i < d.nx; ++i) {
        if (!m(i, j, k)) continue;
        const std::int64_t p[3] = {static_cast<std::int64_t>(i), static_cast<std::int64_t>(j),
                                   static_cast<std::int64_t>(k)};
        for (int a = 0; a < 3; ++a) {
          lo[a] = std::min(lo[a], p[a]);
          hi[a] = std::max(hi[a], p[a]);
        }
      }
  if (hi[0] < 0) throw ValidationError("bounding_box: empty mask");
  return {{lo[0], lo[1], lo[2]},
          {static_cast<std::size_t>(hi[0] - lo[0] + 1), static_cast<std::size_t>(hi[1] - lo[1] + 1),
           static_cast<std::size_t>(hi[2] - lo[2] + 1)}};
}

namespace detail {
template <class T>
std::vector<T> copy_box(const Grid<T>& v, const BoundingBox& box) {
  if (!box.fits_in(v.dims())) throw ValidationError("crop: box exceeds volume " + to_string(v.dims()));
  std::vector<T> data;
  data.reserve(box.extent.size());
  for (std::size_t k = 0; k < box.extent.nz; ++k)
    for (std::size_t j = 0; j < box.extent.ny; ++j)
      for (std::size_t i = 0; i < box.extent.nx; ++i)
        data.push_back(v(box.origin.i + i, box.origin.j + j, box.origin.k + k));
  return data;
}
}  // namespace detail

template <class T>
Grid<T> crop(const Grid<T>& v, const BoundingBox& box) {
  return Grid<T>(box.extent, detail::copy_box(v, box), v.spacing());
}

inline Volume crop(const Volume& v, const BoundingBox& box) {
  return Volume(box.extent, detail::copy_box<std::uint16_t>(v, box), v.spacing(), v.max_intensity());
}

}  // namespace voltip
