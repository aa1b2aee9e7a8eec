#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace voltip {

/// Raised when inputs violate a documented precondition or invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for file-system and file-format failures.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Index3 {
  std::int64_t i = 0, j = 0, k = 0;
  friend bool operator==(const Index3&, const Index3&) = default;
};

struct Dims {
  std::size_t nx = 0, ny = 0, nz = 0;

  constexpr std::size_t size() const noexcept { return nx * ny * nz; }
  constexpr bool empty() const noexcept { return nx == 0 || ny == 0 || nz == 0; }
  constexpr std::size_t operator[](int axis) const noexcept {
    return axis == 0 ? nx : (axis == 1 ? ny : nz);
  }
  constexpr bool contains(Index3 p) const noexcept {
    return p.i >= 0 && p.j >= 0 && p.k >= 0 && static_cast<std::size_t>(p.i) < nx &&
           static_cast<std::size_t>(p.j) < ny && static_cast<std::size_t>(p.k) < nz;
  }
  friend bool operator==(const Dims&, const Dims&) = default;
};

using Spacing = std::array<float, 3>;

inline std::string to_string(const Dims& d) {
  return std::to_string(d.nx) + "x" + std::to_string(d.ny) + "x" + std::to_string(d.nz);
}

/// Dense 3D array stored x-fastest: offset = i + nx * (j + ny * k).
template <class T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  explicit Grid(Dims dims, T fill = T{}, Spacing spacing = {1.f, 1.f, 1.f})
      : dims_(dims), spacing_(spacing), data_(dims.size(), fill) {}
  Grid(Dims dims, std::vector<T> data, Spacing spacing = {1.f, 1.f, 1.f})
      : dims_(dims), spacing_(spacing), data_(std::move(data)) {
    if (data_.size() != dims_.size())
      throw ValidationError("grid payload has " + std::to_string(data_.size()) +
                            " voxels, dims " + to_string(dims_) + " require " +
                            std::to_string(dims_.size()));
  }

  const Dims& dims() const noexcept { return dims_; }
  const Spacing& spacing() const noexcept { return spacing_; }
  void set_spacing(Spacing s) noexcept { spacing_ = s; }
  std::size_t size() const noexcept { return data_.size(); }

  std::size_t offset(std::size_t i, std::size_t j, std::size_t k) const noexcept {
    return i + dims_.nx * (j + dims_.ny * k);
  }
  Index3 index_of(std::size_t off) const noexcept {
    const auto i = off % dims_.nx;
    const auto rest = off / dims_.nx;
    return {static_cast<std::int64_t>(i), static_cast<std::int64_t>(rest % dims_.ny),
            static_cast<std::int64_t>(rest / dims_.ny)};
  }

  T& operator()(std::size_t i, std::size_t j, std::size_t k) noexcept { return data_[offset(i, j, k)]; }
  const T& operator()(std::size_t i, std::size_t j, std::size_t k) const noexcept {
    return data_[offset(i, j, k)];
  }
  T& operator[](std::size_t off) noexcept { return data_[off]; }
  const T& operator[](std::size_t off) const noexcept { return data_[off]; }

  std::vector<T>& data() noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  Dims dims_{};
  Spacing spacing_{1.f, 1.f, 1.f};
  std::vector<T> data_;
};

/// One byte per voxel, 0 or 1.
using BinaryMask = Grid<std::uint8_t>;

inline constexpr std::uint16_t kDefaultMaxIntensity = 4095;

/// CT intensities on a 12-bit scale by default.
class Volume : public Grid<std::uint16_t> {
 public:
  Volume() = default;
  explicit Volume(Dims dims, std::uint16_t fill = 0, Spacing spacing = {1.f, 1.f, 1.f},
                  std::uint16_t max_intensity = kDefaultMaxIntensity)
      : Grid(dims, fill, spacing), max_intensity_(max_intensity) {}
  Volume(Dims dims, std::vector<std::uint16_t> data, Spacing spacing = {1.f, 1.f, 1.f},
         std::uint16_t max_intensity = kDefaultMaxIntensity)
      : Grid(dims, std::move(data), spacing), max_intensity_(max_intensity) {}

  std::uint16_t max_intensity() const noexcept { return max_intensity_; }

  /// Throws ValidationError unless dims are positive, spacing is positive and
  /// every voxel lies in [0, max_intensity].
  void validate() const {
    if (dims().empty()) throw ValidationError("volume has a zero dimension: " + to_string(dims()));
    for (float s : spacing())
      if (!(s > 0.f)) throw ValidationError("volume spacing must be strictly positive");
    if (size() != dims().size()) throw ValidationError("volume payload does not match dims");
    for (std::size_t n = 0; n < size(); ++n)
      if ((*this)[n] > max_intensity_)
        throw ValidationError("voxel " + std::to_string(n) + " = " + std::to_string((*this)[n]) +
                              " exceeds max_intensity " + std::to_string(max_intensity_));
  }

  friend bool operator==(const Volume&, const Volume&) = default;

 private:
  std::uint16_t max_intensity_ = kDefaultMaxIntensity;
};

struct BoundingBox {
  Index3 origin;
  Dims extent;

  bool fits_in(const Dims& parent) const noexcept {
    return origin.i >= 0 && origin.j >= 0 && origin.k >= 0 && !extent.empty() &&
           static_cast<std::size_t>(origin.i) + extent.nx <= parent.nx &&
           static_cast<std::size_t>(origin.j) + extent.ny <= parent.ny &&
           static_cast<std::size_t>(origin.k) + extent.nz <= parent.nz;
  }
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

template <class T>
std::size_t count_nonzero(const Grid<T>& g) {
  return static_cast<std::size_t>(
      std::count_if(g.data().begin(), g.data().end(), [](const T& v) { return v != T{}; }));
}

template <class T, class U>
void require_same_dims(const Grid<T>& a, const Grid<U>& b, const char* what) {
  if (!(a.dims() == b.dims()))
    throw ValidationError(std::string(what) + ": dims " + to_string(a.dims()) + " vs " +
                          to_string(b.dims()));
}

}  // namespace voltip
