#pragma once

// Parallel-beam Radon transform and filtered back-projection on square slices.
//
// Geometry: pixel (x, y) sits at integer coordinates, the rotation centre is
// ((side-1)/2, (side-1)/2). Angle a covers theta = a*pi/n_angles; detector bin b
// measures the line {p : (p - c) . (cos theta, sin theta) = b - (n_bins-1)/2}.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "voltip/grid.hpp"
#include "voltip/rotate.hpp"

namespace voltip {

/// Square 2D image, row-major (x fastest).
struct Image2D {
  std::size_t side = 0;
  std::vector<double> px;

  Image2D() = default;
  explicit Image2D(std::size_t s, double fill = 0.0) : side(s), px(s * s, fill) {}
  double& operator()(std::size_t x, std::size_t y) { return px[x + side * y]; }
  double operator()(std::size_t x, std::size_t y) const { return px[x + side * y]; }
};

struct Sinogram {
  std::size_t n_angles = 0;
  std::size_t n_bins = 0;
  std::vector<double> values;  // row = angle

  Sinogram() = default;
  Sinogram(std::size_t angles, std::size_t bins) : n_angles(angles), n_bins(bins), values(angles * bins, 0.0) {}
  double& at(std::size_t a, std::size_t b) { return values[a * n_bins + b]; }
  double at(std::size_t a, std::size_t b) const { return values[a * n_bins + b]; }
  friend bool operator==(const Sinogram&, const Sinogram&) = default;
};

enum class ReconFilter { RamLak, SheppLogan };

inline std::size_t radon_bins(std::size_t side) {
  return static_cast<std::size_t>(std::ceil(std::numbers::sqrt2 * static_cast<double>(side)));
}

namespace detail {

// Bilinear sample with zero outside the pixel grid.
inline double bilinear_zero(const Image2D& img, double x, double y) {
  const double fx = std::floor(x), fy = std::floor(y);
  const auto x0 = static_cast<std::int64_t>(fx), y0 = static_cast<std::int64_t>(fy);
  const double tx = x - fx, ty = y - fy;
  const auto n = static_cast<std::int64_t>(img.side);
  auto px = [&](std::int64_t i, std::int64_t j) {
    return (i < 0 || j < 0 || i >= n || j >= n) ? 0.0 : img(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  };
  return (1 - tx) * (1 - ty) * px(x0, y0) + tx * (1 - ty) * px(x0 + 1, y0) + (1 - tx) * ty * px(x0, y0 + 1) +
         tx * ty * px(x0 + 1, y0 + 1);
}

inline std::vector<double> ramp_kernel(std::size_t n_bins, ReconFilter f) {
  // Index n at offset n_bins - 1 + n for n in [-(n_bins-1), n_bins-1].
  std::vector<double> h(2 * n_bins - 1, 0.0);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  for (std::int64_t n = -static_cast<std::int64_t>(n_bins) + 1; n < static_cast<std::int64_t>(n_bins); ++n) {
    double v;
    if (f == ReconFilter::RamLak)
      v = n == 0 ? 0.25 : (n % 2 == 0 ? 0.0 : -1.0 / (pi2 * static_cast<double>(n * n)));
    else
      v = -2.0 / (pi2 * (4.0 * static_cast<double>(n * n) - 1.0));
    h[static_cast<std::size_t>(n + static_cast<std::int64_t>(n_bins) - 1)] = v;
  }
  return h;
}

}  // namespace detail

/// Line integrals by bilinear sampling at half-pixel steps along each ray.
inline Sinogram radon(const Image2D& img, std::size_t n_angles) {
  if (img.side == 0 || n_angles == 0) throw ValidationError("radon: empty image or zero angles");
  const std::size_t nb = radon_bins(img.side);
  Sinogram sg(n_angles, nb);
  const double c = (static_cast<double>(img.side) - 1) / 2;
  const double half = (static_cast<double>(nb) - 1) / 2;
  constexpr double step = 0.5;
  const auto steps = static_cast<std::int64_t>(std::ceil(half / step));
  for (std::size_t a = 0; a < n_angles; ++a) {
    const double th = static_cast<double>(a) * std::numbers::pi / static_cast<double>(n_angles);
    const double ct = std::cos(th), st = std::sin(th);
    for (std::size_t b = 0; b < nb; ++b) {
      const double s = static_cast<double>(b) - half;
      double acc = 0;
      for (std::int64_t m = -steps; m <= steps; ++m) {
        const double t = static_cast<double>(m) * step;
        acc += detail::bilinear_zero(img, c + s * ct - t * st, c + s * st + t * ct);
      }
      sg.at(a, b) = acc * step;
    }
  }
  return sg;
}

/// Filtered back-projection onto a side x side grid; negative values are clamped to 0.
/// Filtered projections are sampled with cubic B-spline interpolation.
inline Image2D iradon(const Sinogram& sg, std::size_t side, ReconFilter filter = ReconFilter::RamLak) {
  if (side == 0 || sg.n_angles == 0 || sg.n_bins == 0) throw ValidationError("iradon: empty sinogram or image");
  const std::size_t nb = sg.n_bins;
  const auto h = detail::ramp_kernel(nb, filter);
  std::vector<double> filtered(sg.values.size(), 0.0);
  for (std::size_t a = 0; a < sg.n_angles; ++a) {
    for (std::size_t b = 0; b < nb; ++b) {
      double acc = 0;
      for (std::size_t k = 0; k < nb; ++k) acc += sg.at(a, k) * h[b + nb - 1 - k];
      filtered[a * nb + b] = acc;
    }
    detail::bspline_prefilter_line(&filtered[a * nb], nb, 1);
  }

  Image2D out(side);
  const double c = (static_cast<double>(side) - 1) / 2;
  const double half = (static_cast<double>(nb) - 1) / 2;
  const double scale = std::numbers::pi / static_cast<double>(sg.n_angles);
  const auto n = static_cast<std::int64_t>(nb);
  std::vector<double> cs(sg.n_angles), sn(sg.n_angles);
  for (std::size_t a = 0; a < sg.n_angles; ++a) {
    const double th = static_cast<double>(a) * std::numbers::pi / static_cast<double>(sg.n_angles);
    cs[a] = std::cos(th);
    sn[a] = std::sin(th);
  }
  for (std::size_t y = 0; y < side; ++y)
    for (std::size_t x = 0; x < side; ++x) {
      const double dx = static_cast<double>(x) - c, dy = static_cast<double>(y) - c;
      double acc = 0;
      for (std::size_t a = 0; a < sg.n_angles; ++a) {
        const double s = dx * cs[a] + dy * sn[a] + half;
        const double fl = std::floor(s);
        const auto b0 = static_cast<std::int64_t>(fl);
        double w[4];
        detail::bspline_weights(s - fl, w);
        const double* row = &filtered[a * nb];
        for (int q = 0; q < 4; ++q) acc += w[q] * row[detail::mirror_index(b0 - 1 + q, n)];
      }
      out(x, y) = std::max(0.0, acc * scale);
    }
  return out;
}

}  // namespace voltip
