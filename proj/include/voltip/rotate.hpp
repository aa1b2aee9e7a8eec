#pragma once

// Rigid rotation of a volume about its centre.
//
// The three angles rotate in the yz (alpha), xz (beta) and xy (gamma) planes
// and are applied in that order: p' = Rz(gamma) Ry(beta) Rx(alpha) p. The output
// grid is the axis-aligned box enclosing the rotated voxel centres; samples that
// map outside the input support are 0.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "voltip/grid.hpp"

namespace voltip {

enum class Interp { Nearest, Linear, CubicSpline };

struct Angles {
  double alpha = 0, beta = 0, gamma = 0;
  bool is_zero() const noexcept { return alpha == 0 && beta == 0 && gamma == 0; }
};

using Mat3 = std::array<std::array<double, 3>, 3>;

inline Mat3 rotation_matrix(const Angles& a) {
  const double ca = std::cos(a.alpha), sa = std::sin(a.alpha);
  const double cb = std::cos(a.beta), sb = std::sin(a.beta);
  const double cg = std::cos(a.gamma), sg = std::sin(a.gamma);
  const Mat3 rx{{{1, 0, 0}, {0, ca, -sa}, {0, sa, ca}}};
  const Mat3 ry{{{cb, 0, sb}, {0, 1, 0}, {-sb, 0, cb}}};
  const Mat3 rz{{{cg, -sg, 0}, {sg, cg, 0}, {0, 0, 1}}};
  auto mul = [](const Mat3& x, const Mat3& y) {
    Mat3 r{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) r[i][j] += x[i][k] * y[k][j];
    return r;
  };
  return mul(rz, mul(ry, rx));
}

/// Wraps an angle to [-pi, pi).
inline double wrap_angle(double a) {
  constexpr double two_pi = 2 * std::numbers::pi;
  double w = std::fmod(a + std::numbers::pi, two_pi);
  if (w < 0) w += two_pi;
  return w - std::numbers::pi;
}

inline Dims rotated_dims(const Dims& in, const Angles& a) {
  if (a.is_zero()) return in;
  const Mat3 r = rotation_matrix(a);
  const double h[3] = {(in.nx - 1) / 2.0, (in.ny - 1) / 2.0, (in.nz - 1) / 2.0};
  std::size_t out[3];
  for (int i = 0; i < 3; ++i) {
    const double half = std::abs(r[i][0]) * h[0] + std::abs(r[i][1]) * h[1] + std::abs(r[i][2]) * h[2];
    out[i] = static_cast<std::size_t>(std::ceil(2 * half - 1e-9)) + 1;
  }
  return {out[0], out[1], out[2]};
}

namespace detail {

inline std::int64_t mirror_index(std::int64_t i, std::int64_t n) {
  if (n == 1) return 0;
  const std::int64_t period = 2 * n - 2;
  i = std::abs(i) % period;
  return i >= n ? period - i : i;
}

// In-place conversion of samples to cubic B-spline coefficients along one
// line (mirror boundary, pole sqrt(3) - 2).
inline void bspline_prefilter_line(double* c, std::size_t n, std::size_t stride) {
  if (n < 2) return;
  const double z = std::sqrt(3.0) - 2.0;
  const double gain = (1 - z) * (1 - 1 / z);
  for (std::size_t k = 0; k < n; ++k) c[k * stride] *= gain;

  const auto horizon = static_cast<std::size_t>(std::ceil(std::log(1e-12) / std::log(std::abs(z))));
  double c0;
  if (horizon < n) {
    double zn = z;
    c0 = c[0];
    for (std::size_t k = 1; k < horizon; ++k) {
      c0 += zn * c[k * stride];
      zn *= z;
    }
  } else {
    double zn = z;
    const double iz = 1 / z;
    double z2n = std::pow(z, static_cast<double>(n - 1));
    c0 = c[0] + z2n * c[(n - 1) * stride];
    z2n *= z2n * iz;
    for (std::size_t k = 1; k + 1 < n; ++k) {
      c0 += (zn + z2n) * c[k * stride];
      zn *= z;
      z2n *= iz;
    }
    c0 /= (1 - zn * zn);
  }
  c[0] = c0;
  for (std::size_t k = 1; k < n; ++k) c[k * stride] += z * c[(k - 1) * stride];
  c[(n - 1) * stride] = (z / (z * z - 1)) * (c[(n - 1) * stride] + z * c[(n - 2) * stride]);
  for (std::size_t k = n - 1; k-- > 0;) c[k * stride] = z * (c[(k + 1) * stride] - c[k * stride]);
}

inline Grid<double> bspline_coefficients(const Grid<double>& g) {
  Grid<double> c = g;
  const Dims d = g.dims();
  for (std::size_t k = 0; k < d.nz; ++k)
    for (std::size_t j = 0; j < d.ny; ++j) bspline_prefilter_line(&c(0, j, k), d.nx, 1);
  for (std::size_t k = 0; k < d.nz; ++k)
    for (std::size_t i = 0; i < d.nx; ++i) bspline_prefilter_line(&c(i, 0, k), d.ny, d.nx);
  for (std::size_t j = 0; j < d.ny; ++j)
    for (std::size_t i = 0; i < d.nx; ++i) bspline_prefilter_line(&c(i, j, 0), d.nz, d.nx * d.ny);
  return c;
}

inline void bspline_weights(double t, double w[4]) {
  const double t2 = t * t, t3 = t2 * t, u = 1 - t;
  w[0] = u * u * u / 6;
  w[1] = (3 * t3 - 6 * t2 + 4) / 6;
  w[2] = (-3 * t3 + 3 * t2 + 3 * t + 1) / 6;
  w[3] = t3 / 6;
}

class Sampler {
 public:
  Sampler(const Grid<double>& src, Interp order)
      : src_(src), order_(order), coeff_(order == Interp::CubicSpline ? bspline_coefficients(src) : Grid<double>{}) {}

  double operator()(double x, double y, double z) const {
    const Dims d = src_.dims();
    const double q[3] = {x, y, z};
    const std::int64_t n[3] = {static_cast<std::int64_t>(d.nx), static_cast<std::int64_t>(d.ny),
                               static_cast<std::int64_t>(d.nz)};
    if (order_ == Interp::Nearest) {
      std::int64_t idx[3];
      for (int a = 0; a < 3; ++a) {
        idx[a] = static_cast<std::int64_t>(std::floor(q[a] + 0.5));
        if (idx[a] < 0 || idx[a] >= n[a]) return 0.0;
      }
      return src_(idx[0], idx[1], idx[2]);
    }
    for (int a = 0; a < 3; ++a)
      if (q[a] < -0.5 || q[a] > n[a] - 0.5) return 0.0;
    if (order_ == Interp::Linear) {
      std::int64_t i0[3], i1[3];
      double f[3];
      for (int a = 0; a < 3; ++a) {
        const double c = std::clamp(q[a], 0.0, static_cast<double>(n[a] - 1));
        i0[a] = static_cast<std::int64_t>(std::floor(c));
        i1[a] = std::min(i0[a] + 1, n[a] - 1);
        f[a] = c - i0[a];
      }
      double acc = 0;
      for (int dz = 0; dz < 2; ++dz) {
        const double wz = dz ? f[2] : 1 - f[2];
        if (wz == 0) continue;
        for (int dy = 0; dy < 2; ++dy) {
          const double wy = dy ? f[1] : 1 - f[1];
          if (wy == 0) continue;
          for (int dx = 0; dx < 2; ++dx) {
            const double wx = dx ? f[0] : 1 - f[0];
            if (wx == 0) continue;
            acc += wx * wy * wz * src_(dx ? i1[0] : i0[0], dy ? i1[1] : i0[1], dz ? i1[2] : i0[2]);
          }
        }
      }
      return acc;
    }
    std::int64_t base[3];
    double w[3][4];
    for (int a = 0; a < 3; ++a) {
      const double fl = std::floor(q[a]);
      base[a] = static_cast<std::int64_t>(fl) - 1;
      bspline_weights(q[a] - fl, w[a]);
    }
    double acc = 0;
    for (int c = 0; c < 4; ++c) {
      const auto kk = mirror_index(base[2] + c, n[2]);
      for (int b = 0; b < 4; ++b) {
        const auto jj = mirror_index(base[1] + b, n[1]);
        double row = 0;
        for (int a = 0; a < 4; ++a) row += w[0][a] * coeff_(mirror_index(base[0] + a, n[0]), jj, kk);
        acc += w[2][c] * w[1][b] * row;
      }
    }
    return acc;
  }

 private:
  const Grid<double>& src_;
  Interp order_;
  Grid<double> coeff_;
};

}  // namespace detail

/// Rotates a scalar field; results are clamped to [0, upper].
inline Grid<double> rotate(const Grid<double>& v, const Angles& a, Interp order, double upper) {
  if (a.is_zero()) return v;
  const Dims in = v.dims();
  const Dims out = rotated_dims(in, a);
  const Mat3 r = rotation_matrix(a);
  const double ci[3] = {(in.nx - 1) / 2.0, (in.ny - 1) / 2.0, (in.nz - 1) / 2.0};
  const double co[3] = {(out.nx - 1) / 2.0, (out.ny - 1) / 2.0, (out.nz - 1) / 2.0};
  const detail::Sampler sample(v, order);
  Grid<double> res(out, 0.0, v.spacing());
  for (std::size_t k = 0; k < out.nz; ++k)
    for (std::size_t j = 0; j < out.ny; ++j)
      for (std::size_t i = 0; i < out.nx; ++i) {
        const double p[3] = {i - co[0], j - co[1], k - co[2]};
        // Inverse map: q = R^T p + c_in.
        const double x = r[0][0] * p[0] + r[1][0] * p[1] + r[2][0] * p[2] + ci[0];
        const double y = r[0][1] * p[0] + r[1][1] * p[1] + r[2][1] * p[2] + ci[1];
        const double z = r[0][2] * p[0] + r[1][2] * p[1] + r[2][2] * p[2] + ci[2];
        res(i, j, k) = std::clamp(sample(x, y, z), 0.0, upper);
      }
  return res;
}

template <class T>
Grid<double> to_double(const Grid<T>& g) {
  Grid<double> out(g.dims(), 0.0, g.spacing());
  for (std::size_t n = 0; n < g.size(); ++n) out[n] = static_cast<double>(g[n]);
  return out;
}

/// Rounds half up and clamps into [0, max_intensity].
inline std::uint16_t to_intensity(double x, std::uint16_t max_intensity) {
  const double r = std::floor(x + 0.5);
  if (!(r > 0)) return 0;
  if (r >= max_intensity) return max_intensity;
  return static_cast<std::uint16_t>(r);
}

inline Volume rotate(const Volume& v, const Angles& a, Interp order = Interp::Linear) {
  if (a.is_zero()) return v;
  const Grid<double> r = rotate(to_double(v), a, order, v.max_intensity());
  Volume out(r.dims(), 0, v.spacing(), v.max_intensity());
  for (std::size_t n = 0; n < r.size(); ++n) out[n] = to_intensity(r[n], v.max_intensity());
  return out;
}

}  // namespace voltip
