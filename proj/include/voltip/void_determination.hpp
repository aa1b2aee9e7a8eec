#pragma once

// Bag segmentation into outer / inner-void / content and the projection cost
// map derived from it.

#include <algorithm>
#include <cstdint>

#include "voltip/grid.hpp"
#include "voltip/morphology.hpp"

namespace voltip {

enum class BagRegion : std::uint8_t { Outer = 0, Void = 1, Content = 2 };

struct BagCostMap {
  Grid<double> cost;
  Grid<std::uint8_t> region;  // BagRegion per voxel
  double c = 100;
  /// Largest intensity in the source volume; content cost is v * c / m.
  double m = 0;

  const Dims& dims() const noexcept { return cost.dims(); }
};

struct VoidParams {
  double binarize_threshold = 200;
  int bag_dilate_radius = 2;
  double content_threshold = 150;
  double c = 100;
  Connectivity connectivity = Connectivity::TwentySix;

  void validate(std::uint16_t max_intensity = kDefaultMaxIntensity) const {
    if (bag_dilate_radius < 1) throw ValidationError("void determination: bag_dilate_radius must be >= 1");
    if (!(c > 0)) throw ValidationError("void determination: c must be positive");
    for (double t : {binarize_threshold, content_threshold})
      if (!(t >= 0) || t >= max_intensity)
        throw ValidationError("void determination: thresholds must lie in [0, max_intensity)");
  }
};

/// Corner-grown exterior, widened back onto the bag surface so the closing
/// band added by the dilation does not survive as a thin void skin.
inline BinaryMask outer_region(const Volume& bag, const VoidParams& p) {
  const BinaryMask fg = threshold(bag, p.binarize_threshold);
  if (count_nonzero(fg) == 0) throw ValidationError("determine_voids: no voxel above the binarize threshold");
  const BinaryMask shell = largest_component(connected_components(fg, p.connectivity));
  const BinaryMask closed = dilate(shell, p.bag_dilate_radius);
  if (closed[0]) throw ValidationError("determine_voids: corner seed (0,0,0) lies inside the bag");
  return dilate(region_grow(closed, {0, 0, 0}), p.bag_dilate_radius);
}

inline BagCostMap determine_voids(const Volume& bag, const VoidParams& p = {}) {
  bag.validate();
  p.validate(bag.max_intensity());
  const BinaryMask outer = outer_region(bag, p);
  const auto m = static_cast<double>(*std::max_element(bag.data().begin(), bag.data().end()));

  BagCostMap map{Grid<double>(bag.dims(), 0.0, bag.spacing()), Grid<std::uint8_t>(bag.dims(), 0, bag.spacing()),
                 p.c, m};
  for (std::size_t n = 0; n < bag.size(); ++n) {
    BagRegion r;
    if (outer[n]) {
      r = BagRegion::Outer;
      map.cost[n] = p.c;
    } else if (bag[n] < p.content_threshold || bag[n] == 0) {
      r = BagRegion::Void;
    } else {
      r = BagRegion::Content;
      map.cost[n] = bag[n] * p.c / m;
    }
    map.region[n] = static_cast<std::uint8_t>(r);
  }
  return map;
}

}  // namespace voltip
