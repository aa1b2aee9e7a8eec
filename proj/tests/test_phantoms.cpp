#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace voltip;

namespace {

constexpr PhantomKind kAllKinds[] = {PhantomKind::HollowBoxBag,       PhantomKind::ClutteredBag,
                                     PhantomKind::CubeThreat,         PhantomKind::HollowSphereThreat,
                                     PhantomKind::GunLikeThreat,      PhantomKind::MetalInsert};

}  // namespace

TEST(Phantoms, EmptyBagHasOneInteriorVoid) {
  const Phantom p = generate({PhantomKind::HollowBoxBag, {32, 32, 32}, 0, 0, 20});
  ASSERT_EQ(p.truth.void_boxes.size(), 1u);
  const BoundingBox& b = p.truth.void_boxes[0];
  // Three voxels of air, then a two-voxel wall.
  EXPECT_EQ(b.origin.i, 5);
  EXPECT_EQ(b.origin.j, 5);
  EXPECT_EQ(b.origin.k, 5);
  EXPECT_EQ(b.extent, (Dims{22, 22, 22}));
  std::size_t voids = 0;
  for (auto t : p.truth.region.data()) voids += t == static_cast<std::uint8_t>(PhantomTag::Void);
  EXPECT_EQ(voids, 22u * 22u * 22u);
}

TEST(Phantoms, DeterministicBySeed) {
  for (PhantomKind k : kAllKinds) {
    const PhantomSpec spec{k, {20, 18, 16}, 42, 0.5, 20};
    const Phantom a = generate(spec), b = generate(spec);
    EXPECT_EQ(a.volume, b.volume);
    EXPECT_EQ(a.truth.region, b.truth.region);
    PhantomSpec other = spec;
    other.seed = 43;
    EXPECT_NE(generate(other).volume, a.volume);
  }
}

TEST(Phantoms, ClutterHalfLeavesModerateVoid) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Phantom p = generate({PhantomKind::ClutteredBag, {40, 36, 32}, s, 0.5, 20});
    std::size_t voids = 0;
    for (auto t : p.truth.region.data()) voids += t == static_cast<std::uint8_t>(PhantomTag::Void);
    // Inside the wall: three voxels of air plus a two-voxel wall on each side.
    const std::size_t interior = Dims{40 - 10, 36 - 10, 32 - 10}.size();
    const double fraction = static_cast<double>(voids) / static_cast<double>(interior);
    EXPECT_GE(fraction, 0.2);
    EXPECT_LE(fraction, 0.8);
  }
}

TEST(Phantoms, TagsAndIntensityBandsAgree) {
  for (PhantomKind k : kAllKinds) {
    const Phantom p = generate({k, {24, 24, 24}, 5, 0.6, 0});
    for (std::size_t n = 0; n < p.volume.size(); ++n) {
      const auto tag = static_cast<PhantomTag>(p.truth.region[n]);
      const auto v = p.volume[n];
      switch (tag) {
        case PhantomTag::Outer:
        case PhantomTag::Void:
          EXPECT_LE(v, 50);
          break;
        case PhantomTag::Content:
          EXPECT_GE(v, 300);
          EXPECT_LE(v, 2500);
          break;
        case PhantomTag::Metal:
          EXPECT_GE(v, 3200);
          break;
        default:
          ADD_FAILURE() << "tag out of range";
      }
    }
    for (const BoundingBox& b : p.truth.void_boxes)
      for (std::size_t kk = 0; kk < b.extent.nz; ++kk)
        for (std::size_t j = 0; j < b.extent.ny; ++j)
          for (std::size_t i = 0; i < b.extent.nx; ++i)
            EXPECT_EQ(p.truth.region(b.origin.i + i, b.origin.j + j, b.origin.k + kk),
                      static_cast<std::uint8_t>(PhantomTag::Void));
  }
}

TEST(Phantoms, ShellBandAndNoiseClamp) {
  const Phantom p = generate({PhantomKind::HollowBoxBag, {16, 16, 16}, 1, 0, 0});
  EXPECT_EQ(p.volume(3, 3, 3), kShellIntensity);
  EXPECT_GE(kShellIntensity, 800);
  EXPECT_LE(kShellIntensity, 1500);
  const Phantom noisy = generate({PhantomKind::MetalInsert, {16, 16, 16}, 1, 0, 4000});
  for (auto v : noisy.volume.data()) EXPECT_LE(v, 4095);
}

TEST(Phantoms, GunBarrelIsMetalOnlyWhenAsked) {
  const Phantom with = generate({PhantomKind::GunLikeThreat, {32, 32, 32}, 1, 0, 0});
  const Phantom without = generate({PhantomKind::GunLikeThreat, {32, 32, 32}, 1, 0, 0, false});
  std::size_t metal_with = 0, metal_without = 0;
  for (auto t : with.truth.region.data()) metal_with += t == static_cast<std::uint8_t>(PhantomTag::Metal);
  for (auto t : without.truth.region.data()) metal_without += t == static_cast<std::uint8_t>(PhantomTag::Metal);
  EXPECT_GT(metal_with, 0u);
  EXPECT_EQ(metal_without, 0u);
  // L shape: one connected object.
  EXPECT_EQ(connected_components(threshold(with.volume, 150)).component_count(), 1u);
}

TEST(Phantoms, InvalidParametersRejected) {
  EXPECT_THROW(generate({PhantomKind::CubeThreat, {7, 16, 16}}), ValidationError);
  EXPECT_THROW(generate({PhantomKind::ClutteredBag, {16, 16, 16}, 0, 1.5}), ValidationError);
  EXPECT_THROW(generate({PhantomKind::ClutteredBag, {16, 16, 16}, 0, 0.5, -1}), ValidationError);
  EXPECT_THROW(parse_phantom_kind("banana"), ValidationError);
  EXPECT_EQ(parse_phantom_kind("metal-insert"), PhantomKind::MetalInsert);
}
