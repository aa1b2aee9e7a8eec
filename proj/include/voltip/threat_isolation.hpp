#pragma once

// Threat isolation: split a controlled-condition threat scan into threat body,
// uncertain shell and background, and produce the weight matrix used for
// insertion (1 on the body, 1/d^2 on the shell, 0 on background).

#include <algorithm>
#include <cstdint>

#include "voltip/distance.hpp"
#include "voltip/grid.hpp"
#include "voltip/morphology.hpp"

namespace voltip {

enum class ThreatRegion : std::uint8_t { Background = 0, Uncertain = 1, Body = 2 };

struct ThreatIndicator {
  Grid<double> w;
  Grid<std::uint8_t> region;  // ThreatRegion per voxel

  const Dims& dims() const noexcept { return w.dims(); }
  /// Voxels carrying a non-zero weight (body + uncertain).
  std::size_t active_voxels() const { return count_nonzero(w); }
};

struct IsolationParams {
  double binarize_threshold = 150;
  int body_dilate_radius = 2;
  int background_dilate_radius = 2;
  Connectivity connectivity = Connectivity::TwentySix;

  void validate(std::uint16_t max_intensity = kDefaultMaxIntensity) const {
    if (body_dilate_radius < 1 || background_dilate_radius < 1)
      throw ValidationError("isolation: dilation radii must be >= 1");
    if (!(binarize_threshold >= 0) || binarize_threshold >= max_intensity)
      throw ValidationError("isolation: binarize_threshold must lie in [0, max_intensity)");
  }
};

struct IsolationResult {
  Volume threat;
  ThreatIndicator indicator;
  /// Where the crop came from in the scan grid.
  BoundingBox box;
};

/// Per-voxel weights. `dist` is the distance to the body; distances below one
/// voxel are clamped to 1 so weights never exceed 1.
inline ThreatIndicator build_indicator(const BinaryMask& body, const BinaryMask& background,
                                       const DistanceField& dist) {
  require_same_dims(body, background, "build_indicator");
  require_same_dims(body, dist.d, "build_indicator");
  ThreatIndicator ind{Grid<double>(body.dims(), 0.0, body.spacing()),
                      Grid<std::uint8_t>(body.dims(), 0, body.spacing())};
  for (std::size_t n = 0; n < body.size(); ++n) {
    if (body[n] && background[n]) throw ValidationError("build_indicator: body and background overlap");
    if (body[n]) {
      ind.w[n] = 1.0;
      ind.region[n] = static_cast<std::uint8_t>(ThreatRegion::Body);
    } else if (!background[n]) {
      const double d = std::max(1.0, dist.d[n]);
      ind.w[n] = 1.0 / (d * d);
      ind.region[n] = static_cast<std::uint8_t>(ThreatRegion::Uncertain);
    }
  }
  return ind;
}

struct ThreatMasks {
  BinaryMask body;
  BinaryMask background;
};

/// Segmentation part of the isolation pipeline on the full scan grid.
///
/// The corner-grown exterior is the background. The uncertain band is every
/// non-background voxel within Chebyshev reach of it: the part eaten by the
/// background dilation plus the closing shell added by the body dilation. What
/// remains is the body, cavities included.
inline ThreatMasks segment_threat(const Volume& scan, const IsolationParams& p) {
  p.validate(scan.max_intensity());
  const BinaryMask fg = threshold(scan, p.binarize_threshold);
  if (count_nonzero(fg) == 0) throw ValidationError("isolate_threat: no voxel above the binarize threshold");
  const BinaryMask component = largest_component(connected_components(fg, p.connectivity));
  const BinaryMask closed = dilate(component, p.body_dilate_radius);
  if (closed[0]) throw ValidationError("isolate_threat: corner seed (0,0,0) lies inside the threat");
  BinaryMask background = region_grow(closed, {0, 0, 0});
  const int reach = std::max(p.body_dilate_radius, p.background_dilate_radius);
  BinaryMask body = mask_not(dilate(background, reach));
  return {std::move(body), std::move(background)};
}

inline IsolationResult isolate_threat(const Volume& scan, const IsolationParams& p = {}) {
  scan.validate();
  auto masks = segment_threat(scan, p);
  if (count_nonzero(masks.body) == 0)
    throw ValidationError("isolate_threat: threat body vanished after background dilation");
  const DistanceField dist = distance_transform(masks.body);
  ThreatIndicator full = build_indicator(masks.body, masks.background, dist);
  const BoundingBox box = bounding_box(mask_not(masks.background));
  return {crop(scan, box), {crop(full.w, box), crop(full.region, box)}, box};
}

}  // namespace voltip
