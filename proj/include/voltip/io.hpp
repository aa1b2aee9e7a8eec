#pragma once

// VTIP container: "VTIP01", dtype u8, reserved u8, dims 3 x u32 LE,
// spacing 3 x f32 LE, max_intensity u32 LE, then x-fastest payload.

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>
#include <vector>

#include "voltip/grid.hpp"

namespace voltip {

enum class DType : std::uint8_t { U16 = 0, F32 = 1, U8 = 2 };

inline constexpr char kVtipMagic[6] = {'V', 'T', 'I', 'P', '0', '1'};
inline constexpr std::size_t kVtipHeaderBytes = 6 + 1 + 1 + 12 + 12 + 4;

namespace detail {

inline std::size_t dtype_bytes(DType t) {
  switch (t) {
    case DType::U16: return 2;
    case DType::F32: return 4;
    case DType::U8: return 1;
  }
  throw IoError("unknown dtype code " + std::to_string(static_cast<int>(t)));
}

inline void put_u32(std::vector<char>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFFu));
}
inline void put_u16(std::vector<char>& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFFu));
  out.push_back(static_cast<char>(v >> 8));
}
inline std::uint32_t get_u32(const unsigned char* p) {
  return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) |
         (std::uint32_t{p[3]} << 24);
}
inline std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline std::vector<char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return bytes;
}

struct Header {
  DType dtype = DType::U16;
  Dims dims;
  Spacing spacing{};
  std::uint32_t max_intensity = 0;
};

inline std::vector<char> encode_header(const Header& h) {
  std::vector<char> out(kVtipMagic, kVtipMagic + 6);
  out.push_back(static_cast<char>(h.dtype));
  out.push_back(0);
  for (std::size_t n : {h.dims.nx, h.dims.ny, h.dims.nz}) {
    if (n > std::numeric_limits<std::uint32_t>::max()) throw ValidationError("dimension too large for VTIP");
    put_u32(out, static_cast<std::uint32_t>(n));
  }
  for (float s : h.spacing) put_u32(out, std::bit_cast<std::uint32_t>(s));
  put_u32(out, h.max_intensity);
  return out;
}

inline Header decode_header(const std::vector<char>& bytes, const std::string& name) {
  if (bytes.size() < kVtipHeaderBytes) throw IoError(name + ": truncated VTIP header");
  if (std::memcmp(bytes.data(), kVtipMagic, 6) != 0) throw IoError(name + ": bad magic, not a VTIP file");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  Header h;
  if (p[6] > 2) throw IoError(name + ": unknown dtype code " + std::to_string(p[6]));
  h.dtype = static_cast<DType>(p[6]);
  if (p[7] != 0) throw IoError(name + ": reserved header byte is not zero");
  h.dims = {get_u32(p + 8), get_u32(p + 12), get_u32(p + 16)};
  for (int a = 0; a < 3; ++a) h.spacing[a] = std::bit_cast<float>(get_u32(p + 20 + 4 * a));
  h.max_intensity = get_u32(p + 32);
  if (h.dims.empty()) throw IoError(name + ": zero dimension in header");
  for (float s : h.spacing)
    if (!(s > 0.f)) throw IoError(name + ": non-positive spacing in header");
  const std::size_t expect = kVtipHeaderBytes + h.dims.size() * dtype_bytes(h.dtype);
  if (bytes.size() != expect)
    throw IoError(name + ": payload size mismatch, file has " + std::to_string(bytes.size()) +
                  " bytes, header implies " + std::to_string(expect));
  return h;
}

}  // namespace detail

/// Writes `bytes` to a sibling temp file and renames it over `path`, so a
/// failed write never leaves a partial file behind.
inline void write_file_atomic(const std::filesystem::path& path, const std::vector<char>& bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError("write failed: " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot rename temp file onto " + path.string());
  }
}

inline void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, std::vector<char>(text.begin(), text.end()));
}

inline void save_volume(const Volume& v, const std::filesystem::path& path) {
  v.validate();
  auto out = detail::encode_header({DType::U16, v.dims(), v.spacing(), v.max_intensity()});
  out.reserve(out.size() + 2 * v.size());
  for (std::uint16_t x : v.data()) detail::put_u16(out, x);
  write_file_atomic(path, out);
}

inline Volume load_volume(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  const auto h = detail::decode_header(bytes, path.string());
  if (h.dtype != DType::U16) throw IoError(path.string() + ": expected u16 volume, found dtype " +
                                           std::to_string(static_cast<int>(h.dtype)));
  if (h.max_intensity > std::numeric_limits<std::uint16_t>::max())
    throw IoError(path.string() + ": max_intensity does not fit u16");
  std::vector<std::uint16_t> data(h.dims.size());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data()) + kVtipHeaderBytes;
  for (std::size_t n = 0; n < data.size(); ++n) {
    data[n] = detail::get_u16(p + 2 * n);
    if (data[n] > h.max_intensity)
      throw IoError(path.string() + ": voxel " + std::to_string(n) + " exceeds max_intensity");
  }
  return Volume(h.dims, std::move(data), h.spacing, static_cast<std::uint16_t>(h.max_intensity));
}

/// Float fields (indicator, cost map). `upper` is stored in the max_intensity slot.
template <class T>
void save_f32(const Grid<T>& g, std::uint32_t upper, const std::filesystem::path& path) {
  if (g.dims().empty()) throw ValidationError("refusing to write a zero-dimension field");
  auto out = detail::encode_header({DType::F32, g.dims(), g.spacing(), upper});
  out.reserve(out.size() + 4 * g.size());
  for (const T& x : g.data()) {
    const auto f = static_cast<float>(x);
    if (!(f >= 0.f) || f > static_cast<float>(upper))
      throw ValidationError("field value outside [0, " + std::to_string(upper) + "]");
    detail::put_u32(out, std::bit_cast<std::uint32_t>(f));
  }
  write_file_atomic(path, out);
}

inline Grid<float> load_f32(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  const auto h = detail::decode_header(bytes, path.string());
  if (h.dtype != DType::F32) throw IoError(path.string() + ": expected f32 field");
  Grid<float> g(h.dims, 0.f, h.spacing);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data()) + kVtipHeaderBytes;
  for (std::size_t n = 0; n < g.size(); ++n) {
    g[n] = std::bit_cast<float>(detail::get_u32(p + 4 * n));
    if (!(g[n] >= 0.f) || g[n] > static_cast<float>(h.max_intensity))
      throw IoError(path.string() + ": field value out of range at voxel " + std::to_string(n));
  }
  return g;
}

inline void save_u8(const Grid<std::uint8_t>& g, std::uint8_t upper, const std::filesystem::path& path) {
  if (g.dims().empty()) throw ValidationError("refusing to write a zero-dimension tag volume");
  auto out = detail::encode_header({DType::U8, g.dims(), g.spacing(), upper});
  for (std::uint8_t x : g.data()) {
    if (x > upper) throw ValidationError("tag value exceeds declared maximum");
    out.push_back(static_cast<char>(x));
  }
  write_file_atomic(path, out);
}

inline Grid<std::uint8_t> load_u8(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  const auto h = detail::decode_header(bytes, path.string());
  if (h.dtype != DType::U8) throw IoError(path.string() + ": expected u8 tag volume");
  Grid<std::uint8_t> g(h.dims, 0, h.spacing);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data()) + kVtipHeaderBytes;
  for (std::size_t n = 0; n < g.size(); ++n) {
    g[n] = p[n];
    if (g[n] > h.max_intensity) throw IoError(path.string() + ": tag value out of range");
  }
  return g;
}

/// Headerless little-endian u16 payload.
inline Volume import_raw(const std::filesystem::path& path, Dims dims, Spacing spacing,
                         std::uint16_t max_intensity = kDefaultMaxIntensity) {
  if (dims.empty()) throw ValidationError("raw import needs positive dims");
  const auto bytes = detail::read_file(path);
  if (bytes.size() != 2 * dims.size())
    throw IoError(path.string() + ": raw payload has " + std::to_string(bytes.size()) + " bytes, expected " +
                  std::to_string(2 * dims.size()));
  std::vector<std::uint16_t> data(dims.size());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  for (std::size_t n = 0; n < data.size(); ++n) {
    data[n] = detail::get_u16(p + 2 * n);
    if (data[n] > max_intensity) throw IoError(path.string() + ": voxel exceeds max_intensity");
  }
  Volume v(dims, std::move(data), spacing, max_intensity);
  v.validate();
  return v;
}

}  // namespace voltip
