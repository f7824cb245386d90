#pragma once

#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "vxf/adam.hpp"

namespace vxf {

// VXCK parameter checkpoint, little-endian:
//   magic "VXCK" (4 bytes); u32 parameter count;
//   per parameter: u32 name length; name bytes; u32 rank (always 2);
//   u32 dims[rank] (rows, cols); f32 data, row-major.
// Parameters are written in name order. Data is stored as f32 regardless
// of the in-memory scalar type.

namespace detail_ck {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

inline std::uint32_t get_u32(const std::vector<std::uint8_t>& bytes, std::size_t& pos) {
  if (pos + 4 > bytes.size()) throw DataError("VXCK truncated at offset " + std::to_string(pos));
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(bytes[pos + b]) << (8 * b);
  pos += 4;
  return v;
}

}  // namespace detail_ck

template <typename S>
std::vector<std::uint8_t> serialize_params(const Params<S>& params) {
  using namespace detail_ck;
  std::vector<std::uint8_t> out = {'V', 'X', 'C', 'K'};
  put_u32(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, mat] : params) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    put_u32(out, 2);
    put_u32(out, static_cast<std::uint32_t>(mat.rows()));
    put_u32(out, static_cast<std::uint32_t>(mat.cols()));
    for (Eigen::Index r = 0; r < mat.rows(); ++r)
      for (Eigen::Index c = 0; c < mat.cols(); ++c) {
        const float f = static_cast<float>(mat(r, c));
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        put_u32(out, bits);
      }
  }
  return out;
}

template <typename S>
Params<S> deserialize_params(const std::vector<std::uint8_t>& bytes) {
  using namespace detail_ck;
  if (bytes.size() < 8 || std::memcmp(bytes.data(), "VXCK", 4) != 0)
    throw DataError("VXCK format error: bad magic, expected \"VXCK\"");
  std::size_t pos = 4;
  const std::uint32_t count = get_u32(bytes, pos);
  Params<S> params;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = get_u32(bytes, pos);
    if (pos + name_len > bytes.size())
      throw DataError("VXCK truncated at offset " + std::to_string(pos));
    std::string name(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                     bytes.begin() + static_cast<std::ptrdiff_t>(pos + name_len));
    pos += name_len;
    const std::uint32_t rank = get_u32(bytes, pos);
    if (rank != 2) throw DataError("VXCK parameter " + name + " has unsupported rank");
    const std::uint32_t rows = get_u32(bytes, pos);
    const std::uint32_t cols = get_u32(bytes, pos);
    Mat<S> mat(rows, cols);
    for (std::uint32_t r = 0; r < rows; ++r)
      for (std::uint32_t c = 0; c < cols; ++c) {
        const std::uint32_t bits = get_u32(bytes, pos);
        float f;
        std::memcpy(&f, &bits, 4);
        if (!std::isfinite(f))
          throw DataError("VXCK parameter " + name + " holds a non-finite value");
        mat(r, c) = static_cast<S>(f);
      }
    params.emplace(std::move(name), std::move(mat));
  }
  if (pos != bytes.size()) throw DataError("VXCK trailing bytes after last parameter");
  return params;
}

template <typename S>
void save_checkpoint(const Params<S>& params, const std::string& path) {
  const auto bytes = serialize_params(params);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed for " + path);
}

template <typename S>
Params<S> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw DataError("cannot open " + path);
  const std::streamsize size = in.tellg();
  in.seekg(0);
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
  if (size > 0) in.read(reinterpret_cast<char*>(bytes.data()), size);
  if (!in) throw DataError("read failed for " + path);
  return deserialize_params<S>(bytes);
}

}  // namespace vxf
