#pragma once

// Procedural bags and threats with known region maps.
//
// Intensity bands before noise: void/outer 0, content 300-2500 (bag shell
// 1200), metal 3500. Gaussian noise of noise_sigma is added afterwards and the
// result clamped to [0, 4095].

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "voltip/grid.hpp"
#include "voltip/random.hpp"
#include "voltip/rotate.hpp"

namespace voltip {

enum class PhantomKind { HollowBoxBag, ClutteredBag, CubeThreat, HollowSphereThreat, GunLikeThreat, MetalInsert };

enum class PhantomTag : std::uint8_t { Outer = 0, Void = 1, Content = 2, Metal = 3 };

inline constexpr std::uint16_t kShellIntensity = 1200;
inline constexpr std::uint16_t kThreatIntensity = 2000;
inline constexpr std::uint16_t kMetalIntensity = 3500;

inline PhantomKind parse_phantom_kind(const std::string& s) {
  if (s == "hollow-box-bag") return PhantomKind::HollowBoxBag;
  if (s == "cluttered-bag") return PhantomKind::ClutteredBag;
  if (s == "cube-threat") return PhantomKind::CubeThreat;
  if (s == "hollow-sphere-threat") return PhantomKind::HollowSphereThreat;
  if (s == "gun-like-threat") return PhantomKind::GunLikeThreat;
  if (s == "metal-insert") return PhantomKind::MetalInsert;
  throw ValidationError("unknown phantom kind '" + s + "'");
}

struct PhantomSpec {
  PhantomKind kind = PhantomKind::HollowBoxBag;
  Dims dims{32, 32, 32};
  std::uint64_t seed = 0;
  double clutter_density = 0.0;
  double noise_sigma = 20.0;
  /// gun-like-threat: metal barrel instead of a plain one.
  bool with_metal = true;

  void validate() const {
    if (dims.nx < 8 || dims.ny < 8 || dims.nz < 8) throw ValidationError("phantom dims must be >= 8 per axis");
    if (!(clutter_density >= 0 && clutter_density <= 1)) throw ValidationError("clutter_density must lie in [0, 1]");
    if (!(noise_sigma >= 0)) throw ValidationError("noise_sigma must be non-negative");
  }
};

struct GroundTruth {
  Grid<std::uint8_t> region;  // PhantomTag per voxel
  std::vector<BoundingBox> void_boxes;
  std::vector<BinaryMask> object_masks;
};

struct Phantom {
  Volume volume;
  GroundTruth truth;
};

namespace detail {

class PhantomCanvas {
 public:
  explicit PhantomCanvas(Dims d)
      : base_(d, 0.0), tags_(d, static_cast<std::uint8_t>(PhantomTag::Outer)) {}

  const Dims& dims() const { return base_.dims(); }

  /// Paints `box` and returns its mask.
  BinaryMask fill_box(const BoundingBox& box, double value, PhantomTag tag) {
    BinaryMask m(dims(), 0);
    for (std::size_t k = 0; k < box.extent.nz; ++k)
      for (std::size_t j = 0; j < box.extent.ny; ++j)
        for (std::size_t i = 0; i < box.extent.nx; ++i) {
          const std::size_t off = m.offset(box.origin.i + i, box.origin.j + j, box.origin.k + k);
          paint(off, value, tag);
          m[off] = 1;
        }
    return m;
  }

  void paint(std::size_t off, double value, PhantomTag tag) {
    base_[off] = value;
    tags_[off] = static_cast<std::uint8_t>(tag);
  }

  Phantom finish(Rng& rng, double sigma, std::vector<BoundingBox> voids, std::vector<BinaryMask> objects) && {
    Volume v(dims());
    for (std::size_t n = 0; n < v.size(); ++n) {
      const double x = sigma > 0 ? base_[n] + rng.normal(0, sigma) : base_[n];
      v[n] = to_intensity(x, kDefaultMaxIntensity);
    }
    return {std::move(v), {std::move(tags_), std::move(voids), std::move(objects)}};
  }

 private:
  Grid<double> base_;
  Grid<std::uint8_t> tags_;
};

inline std::size_t margin_for(const Dims& d) {
  return std::max<std::size_t>(1, std::min({d.nx, d.ny, d.nz}) / 16);
}

// Air gap around the bag; wider than the default closing radius of void
// determination so the corner seed stays outside the closed bag.
inline constexpr std::size_t kBagAirGap = 3;

// Bag shell: up to kBagAirGap voxels of air, then a `margin`-thick wall.
inline std::pair<BoundingBox, BinaryMask> paint_bag_shell(PhantomCanvas& c) {
  const Dims d = c.dims();
  const std::size_t m = margin_for(d);
  // Tiny grids shrink the gap so at least two interior voxels remain per axis.
  const std::size_t gap = std::min(kBagAirGap, (std::min({d.nx, d.ny, d.nz}) - 2 * m - 2) / 2);
  const auto a = static_cast<std::int64_t>(gap);
  const BoundingBox outer{{a, a, a}, {d.nx - 2 * gap, d.ny - 2 * gap, d.nz - 2 * gap}};
  BinaryMask shell = c.fill_box(outer, kShellIntensity, PhantomTag::Content);
  const auto w = static_cast<std::int64_t>(m);
  const BoundingBox inner{{outer.origin.i + w, outer.origin.j + w, outer.origin.k + w},
                          {outer.extent.nx - 2 * m, outer.extent.ny - 2 * m, outer.extent.nz - 2 * m}};
  const BinaryMask hole = c.fill_box(inner, 0.0, PhantomTag::Void);
  for (std::size_t n = 0; n < shell.size(); ++n)
    if (hole[n]) shell[n] = 0;
  return {inner, std::move(shell)};
}

inline BoundingBox centred_box(const Dims& d, double fraction) {
  auto ext = [&](std::size_t n) {
    return std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 0.5)));
  };
  const Dims e{ext(d.nx), ext(d.ny), ext(d.nz)};
  return {{static_cast<std::int64_t>((d.nx - e.nx) / 2), static_cast<std::int64_t>((d.ny - e.ny) / 2),
           static_cast<std::int64_t>((d.nz - e.nz) / 2)},
          e};
}

}  // namespace detail

inline Phantom generate(const PhantomSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  detail::PhantomCanvas canvas(spec.dims);
  std::vector<BoundingBox> voids;
  std::vector<BinaryMask> objects;
  const Dims d = spec.dims;

  switch (spec.kind) {
    case PhantomKind::HollowBoxBag: {
      auto [interior, shell] = detail::paint_bag_shell(canvas);
      voids.push_back(interior);
      objects.push_back(std::move(shell));
      break;
    }
    case PhantomKind::ClutteredBag: {
      auto [interior, shell] = detail::paint_bag_shell(canvas);
      objects.push_back(std::move(shell));
      // 3 x 3 x 3 cells; a fixed share of them gets one clutter block.
      constexpr std::size_t kCells = 27;
      auto cell_box = [&](std::size_t c) {
        const std::size_t idx[3] = {c % 3, (c / 3) % 3, c / 9};
        const std::size_t len[3] = {interior.extent.nx, interior.extent.ny, interior.extent.nz};
        const std::int64_t org[3] = {interior.origin.i, interior.origin.j, interior.origin.k};
        std::int64_t o[3];
        std::size_t e[3];
        for (int a = 0; a < 3; ++a) {
          const std::size_t lo = len[a] * idx[a] / 3, hi = len[a] * (idx[a] + 1) / 3;
          o[a] = org[a] + static_cast<std::int64_t>(lo);
          e[a] = hi - lo;
        }
        return BoundingBox{{o[0], o[1], o[2]}, {e[0], e[1], e[2]}};
      };
      std::size_t filled = static_cast<std::size_t>(std::floor(spec.clutter_density * kCells + 0.5));
      if (spec.clutter_density < 1) filled = std::min(filled, kCells - 1);
      std::vector<std::size_t> order(kCells);
      for (std::size_t c = 0; c < kCells; ++c) order[c] = c;
      for (std::size_t c = kCells - 1; c > 0; --c)
        std::swap(order[c], order[static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(c)))]);
      std::vector<bool> is_filled(kCells, false);
      for (std::size_t f = 0; f < filled; ++f) is_filled[order[f]] = true;
      for (std::size_t c = 0; c < kCells; ++c) {
        const BoundingBox cell = cell_box(c);
        if (cell.extent.empty()) continue;
        if (!is_filled[c]) {
          voids.push_back(cell);
          continue;
        }
        BoundingBox block = cell;
        std::size_t* ext[3] = {&block.extent.nx, &block.extent.ny, &block.extent.nz};
        std::int64_t* org[3] = {&block.origin.i, &block.origin.j, &block.origin.k};
        for (int a = 0; a < 3; ++a) {
          const std::size_t full = *ext[a];
          const auto lo = static_cast<std::int64_t>(std::max<std::size_t>(1, (full * 8 + 9) / 10));
          const auto e = static_cast<std::size_t>(rng.integer(lo, static_cast<std::int64_t>(full)));
          *org[a] += rng.integer(0, static_cast<std::int64_t>(full - e));
          *ext[a] = e;
        }
        const double value = static_cast<double>(rng.integer(300, 2500));
        objects.push_back(canvas.fill_box(block, value, PhantomTag::Content));
      }
      break;
    }
    case PhantomKind::CubeThreat: {
      objects.push_back(canvas.fill_box(detail::centred_box(d, 0.4), kThreatIntensity, PhantomTag::Content));
      break;
    }
    case PhantomKind::HollowSphereThreat: {
      const double radius = 0.35 * static_cast<double>(std::min({d.nx, d.ny, d.nz}));
      const double inner = radius - 2.0;
      const double c[3] = {(d.nx - 1) / 2.0, (d.ny - 1) / 2.0, (d.nz - 1) / 2.0};
      BinaryMask ball(d, 0);
      for (std::size_t k = 0; k < d.nz; ++k)
        for (std::size_t j = 0; j < d.ny; ++j)
          for (std::size_t i = 0; i < d.nx; ++i) {
            const double r = std::sqrt((i - c[0]) * (i - c[0]) + (j - c[1]) * (j - c[1]) + (k - c[2]) * (k - c[2]));
            if (r > radius) continue;
            const std::size_t off = ball.offset(i, j, k);
            ball[off] = 1;
            if (r > inner)
              canvas.paint(off, kThreatIntensity, PhantomTag::Content);
            else
              canvas.paint(off, 0.0, PhantomTag::Void);
          }
      objects.push_back(std::move(ball));
      break;
    }
    case PhantomKind::GunLikeThreat: {
      auto len = [](std::size_t n, double f) {
        return std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(f * static_cast<double>(n) + 0.5)));
      };
      const std::size_t gx = len(d.nx, 0.2), gy = len(d.ny, 0.45), bx = len(d.nx, 0.6), by = len(d.ny, 0.18);
      const std::size_t ez = len(d.nz, 0.2);
      const std::size_t x0 = (d.nx - bx) / 2, y0 = (d.ny - (gy + by)) / 2, z0 = (d.nz - ez) / 2;
      const BoundingBox barrel{{static_cast<std::int64_t>(x0), static_cast<std::int64_t>(y0), static_cast<std::int64_t>(z0)},
                               {bx, by, ez}};
      const BoundingBox grip{{static_cast<std::int64_t>(x0), static_cast<std::int64_t>(y0 + by),
                              static_cast<std::int64_t>(z0)},
                             {gx, gy, ez}};
      BinaryMask body = canvas.fill_box(grip, kThreatIntensity, PhantomTag::Content);
      const BinaryMask b = spec.with_metal ? canvas.fill_box(barrel, kMetalIntensity, PhantomTag::Metal)
                                           : canvas.fill_box(barrel, kThreatIntensity, PhantomTag::Content);
      for (std::size_t n = 0; n < body.size(); ++n) body[n] = body[n] || b[n];
      objects.push_back(std::move(body));
      break;
    }
    case PhantomKind::MetalInsert: {
      auto [interior, shell] = detail::paint_bag_shell(canvas);
      objects.push_back(std::move(shell));
      const std::size_t side = std::max<std::size_t>(2, std::min({d.nx, d.ny, d.nz}) / 8);
      auto place = [&](std::int64_t org, std::size_t len) {
        const auto slack = static_cast<std::int64_t>(len - side);
        return org + slack / 2 + rng.integer(-slack / 4, slack / 4);
      };
      const BoundingBox bolt{{place(interior.origin.i, interior.extent.nx), place(interior.origin.j, interior.extent.ny),
                              place(interior.origin.k, interior.extent.nz)},
                             {side, side, side}};
      objects.push_back(canvas.fill_box(bolt, kMetalIntensity, PhantomTag::Metal));
      break;
    }
  }
  return std::move(canvas).finish(rng, spec.noise_sigma, std::move(voids), std::move(objects));
}

}  // namespace voltip
