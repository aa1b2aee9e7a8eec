#pragma once

// Metal artefact generation.
//
// Slice by slice: project the bag, project the combined metal of the bag and
// of the placed threat, mark every bin the metal touches, pull marked bins of
// the bag sinogram towards their maximum, reconstruct, and finally blend the
// artefact-free threat back in.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "voltip/grid.hpp"
#include "voltip/insertion.hpp"
#include "voltip/morphology.hpp"
#include "voltip/parallel.hpp"
#include "voltip/radon.hpp"

namespace voltip {

struct MagParams {
  double metal_threshold = 3000;
  double q = 0.2;
  std::size_t n_angles = 180;
  ReconFilter recon_filter = ReconFilter::RamLak;
  Axis slice_axis = Axis::Z;
  /// Metal-free slices are copied through instead of reconstructed.
  bool bypass_metal_free = true;
  /// Line integrals above this mark a sinogram bin as metal trace.
  double trace_epsilon = 1e-6;
  unsigned threads = 0;

  void validate() const {
    if (!(q >= 0 && q <= 1)) throw ValidationError("mag: q must lie in [0, 1]");
    if (n_angles < 1) throw ValidationError("mag: n_angles must be positive");
    if (!(metal_threshold >= 0)) throw ValidationError("mag: metal_threshold must be non-negative");
  }
};

/// Voxels strictly above the metal threshold.
inline BinaryMask segment_metal(const Volume& v, double metal_threshold) { return threshold(v, metal_threshold); }

/// Marked bins become (1-q) s + q s_max with s_max the largest marked value;
/// unmarked bins are copied bit for bit.
inline Sinogram corrupt_sinogram(const Sinogram& sg, const std::vector<std::uint8_t>& marked, double q) {
  if (marked.size() != sg.values.size()) throw ValidationError("corrupt_sinogram: mask size differs from sinogram");
  if (!(q >= 0 && q <= 1)) throw ValidationError("corrupt_sinogram: q must lie in [0, 1]");
  Sinogram out = sg;
  bool any = false;
  double s_max = 0;
  for (std::size_t n = 0; n < marked.size(); ++n)
    if (marked[n]) {
      s_max = any ? std::max(s_max, sg.values[n]) : sg.values[n];
      any = true;
    }
  if (!any || q == 0) return out;
  for (std::size_t n = 0; n < marked.size(); ++n)
    if (marked[n]) out.values[n] = std::lerp(sg.values[n], s_max, q);
  return out;
}

/// Optional per-slice sinograms (n_bins x n_angles x slices); slices that
/// took the bypass stay zero.
struct MagDebug {
  Grid<double> clean;
  Grid<double> corrupted;
};

namespace detail {

struct SliceView {
  int axis;
  Dims d;
  std::size_t side;

  // In-plane axes in increasing order.
  std::size_t u_len() const { return axis == 0 ? d.ny : d.nx; }
  std::size_t v_len() const { return axis == 2 ? d.ny : d.nz; }
  std::size_t slices() const { return d[axis]; }
  std::size_t offset(std::size_t s, std::size_t u, std::size_t v) const {
    std::size_t i, j, k;
    if (axis == 0) {
      i = s, j = u, k = v;
    } else if (axis == 1) {
      i = u, j = s, k = v;
    } else {
      i = u, j = v, k = s;
    }
    return i + d.nx * (j + d.ny * k);
  }
};

}  // namespace detail

/// Places the indicator-weighted rotated threat into a bag-sized field.
inline Grid<double> place_threat(const Volume& threat, const ThreatIndicator& ind, const Dims& bag_dims,
                                 const Pose& pose, Interp interp = Interp::Linear) {
  require_same_dims(threat, ind.w, "place_threat");
  Grid<double> weighted = to_double(threat);
  for (std::size_t n = 0; n < weighted.size(); ++n) weighted[n] *= ind.w[n];
  const Grid<double> rot = rotate(weighted, pose.angles(), interp, threat.max_intensity());
  const BoundingBox box{pose.origin(), rot.dims()};
  if (!box.fits_in(bag_dims)) throw ValidationError("place_threat: pose places the threat outside the bag grid");
  Grid<double> full(bag_dims, 0.0);
  const Dims e = rot.dims();
  for (std::size_t k = 0; k < e.nz; ++k)
    for (std::size_t j = 0; j < e.ny; ++j)
      for (std::size_t i = 0; i < e.nx; ++i) full(box.origin.i + i, box.origin.j + j, box.origin.k + k) = rot(i, j, k);
  return full;
}

/// Bag with streaks from bag metal and threat metal, without the threat itself.
inline Volume corrupt_bag(const Volume& bag, const Grid<double>& placed_threat, const MagParams& p,
                          MagDebug* debug = nullptr) {
  p.validate();
  require_same_dims(bag, placed_threat, "corrupt_bag");
  const detail::SliceView view{static_cast<int>(p.slice_axis), bag.dims(), 0};
  const std::size_t nu = view.u_len(), nv = view.v_len(), side = std::max(nu, nv);
  const std::size_t nb = radon_bins(side);
  if (debug) {
    debug->clean = Grid<double>({nb, p.n_angles, view.slices()}, 0.0);
    debug->corrupted = debug->clean;
  }
  Volume out = bag;
  parallel_for(view.slices(), resolve_threads(p.threads), [&](std::size_t s) {
    Image2D slice(side), metal(side);
    bool has_metal = false;
    for (std::size_t v = 0; v < nv; ++v)
      for (std::size_t u = 0; u < nu; ++u) {
        const std::size_t off = view.offset(s, u, v);
        const double b = bag[off];
        slice(u, v) = b;
        double m = b > p.metal_threshold ? b : 0.0;
        if (placed_threat[off] > p.metal_threshold) m += placed_threat[off];
        metal(u, v) = m;
        has_metal = has_metal || m > 0;
      }
    if (!has_metal && p.bypass_metal_free) return;

    const Sinogram sg = radon(slice, p.n_angles);
    const Sinogram metal_sg = radon(metal, p.n_angles);
    std::vector<std::uint8_t> marked(sg.values.size(), 0);
    for (std::size_t n = 0; n < marked.size(); ++n) marked[n] = metal_sg.values[n] > p.trace_epsilon ? 1 : 0;
    const Sinogram bad = corrupt_sinogram(sg, marked, p.q);
    const Image2D rec = iradon(bad, side, p.recon_filter);
    for (std::size_t v = 0; v < nv; ++v)
      for (std::size_t u = 0; u < nu; ++u) out[view.offset(s, u, v)] = to_intensity(rec(u, v), bag.max_intensity());
    if (debug) {
      for (std::size_t a = 0; a < p.n_angles; ++a)
        for (std::size_t b = 0; b < nb; ++b) {
          debug->clean(b, a, s) = sg.at(a, b);
          debug->corrupted(b, a, s) = bad.at(a, b);
        }
    }
  });
  return out;
}

inline Volume generate_artefacts(const Volume& bag, const Volume& threat, const ThreatIndicator& ind,
                                 const Pose& pose, const MagParams& p = {}, Interp interp = Interp::Linear,
                                 MagDebug* debug = nullptr) {
  const Grid<double> placed = place_threat(threat, ind, bag.dims(), pose, interp);
  const Volume streaked = corrupt_bag(bag, placed, p, debug);
  return blend(threat, ind, streaked, pose, interp);
}

}  // namespace voltip
