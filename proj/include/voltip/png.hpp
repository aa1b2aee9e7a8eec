#pragma once

// Orthogonal slice export as 8-bit grayscale PNG.

#include <png.h>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "voltip/grid.hpp"

namespace voltip {

struct Gray8Image {
  std::size_t width = 0, height = 0;
  std::vector<std::uint8_t> px;  // row-major
};

inline void write_png(const Gray8Image& img, const std::filesystem::path& path) {
  if (img.width == 0 || img.height == 0) throw ValidationError("refusing to write an empty PNG");
  auto tmp = path;
  tmp += ".tmp";
  std::FILE* f = std::fopen(tmp.string().c_str(), "wb");
  if (!f) throw IoError("cannot open for writing: " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  volatile bool ok = png && info;  // survives longjmp from libpng errors
  if (ok && setjmp(png_jmpbuf(png))) ok = false;
  if (ok) {
    png_init_io(png, f);
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 8,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (std::size_t y = 0; y < img.height; ++y)
      png_write_row(png, const_cast<png_bytep>(img.px.data() + y * img.width));
    png_write_end(png, nullptr);
  }
  png_destroy_write_struct(&png, &info);
  const bool closed = std::fclose(f) == 0;
  std::error_code ec;
  if (!ok || !closed) {
    std::filesystem::remove(tmp, ec);
    throw IoError("PNG encoding failed: " + path.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot rename temp file onto " + path.string());
  }
}

/// Axial (xy at k), coronal (xz at j) and sagittal (yz at i) views side by
/// side, one-pixel black gutters, window [0, max_intensity].
inline Gray8Image triptych(const Volume& v, Index3 at) {
  const Dims d = v.dims();
  if (!d.contains(at)) throw ValidationError("slice index outside the volume");
  auto level = [&](std::uint16_t x) {
    return static_cast<std::uint8_t>(std::min<std::uint32_t>(255, (std::uint32_t{x} * 255 + v.max_intensity() / 2) /
                                                                       std::max<std::uint32_t>(1, v.max_intensity())));
  };
  const std::size_t h = std::max({d.ny, d.nz});
  Gray8Image img{d.nx + 1 + d.nx + 1 + d.ny, h, {}};
  img.px.assign(img.width * img.height, 0);
  const auto i0 = static_cast<std::size_t>(at.i), j0 = static_cast<std::size_t>(at.j), k0 = static_cast<std::size_t>(at.k);
  for (std::size_t y = 0; y < d.ny; ++y)
    for (std::size_t x = 0; x < d.nx; ++x) img.px[y * img.width + x] = level(v(x, y, k0));
  for (std::size_t z = 0; z < d.nz; ++z)
    for (std::size_t x = 0; x < d.nx; ++x) img.px[z * img.width + d.nx + 1 + x] = level(v(x, j0, z));
  for (std::size_t z = 0; z < d.nz; ++z)
    for (std::size_t y = 0; y < d.ny; ++y) img.px[z * img.width + 2 * d.nx + 2 + y] = level(v(i0, y, z));
  return img;
}

}  // namespace voltip
