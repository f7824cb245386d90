#include "vxf/grid_io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace vxf {

namespace {

constexpr char kMagic[4] = {'V', 'X', 'F', '1'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

void put_i32(std::vector<std::uint8_t>& out, std::int32_t v) {
  put_u32(out, static_cast<std::uint32_t>(v));
}

void put_f32(std::vector<std::uint8_t>& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

struct Reader {
  const std::vector<std::uint8_t>& bytes;
  std::size_t pos = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw DataError("VXF format error at offset " + std::to_string(pos) + ": " + what);
  }

  void need(std::size_t count, const char* what) {
    if (pos + count > bytes.size()) fail(std::string("truncated file while reading ") + what);
  }

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(bytes[pos + b]) << (8 * b);
    pos += 4;
    return v;
  }

  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(bytes[pos + b]) << (8 * b);
    pos += 8;
    return v;
  }

  std::int32_t i32(const char* what) { return static_cast<std::int32_t>(u32(what)); }

  float f32(const char* what) {
    const std::uint32_t bits = u32(what);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }

  std::uint8_t u8(const char* what) {
    need(1, what);
    return bytes[pos++];
  }
};

}  // namespace

std::vector<std::uint8_t> serialize_grid(const VoxfieldGrid& grid) {
  std::vector<std::uint8_t> out;
  out.reserve(32 + grid.size() * (13 + static_cast<std::size_t>(grid.n()) * 24));
  out.insert(out.end(), kMagic, kMagic + 4);
  put_f32(out, grid.voxel_size());
  put_u32(out, static_cast<std::uint32_t>(grid.n()));
  for (int c = 0; c < 3; ++c) put_f32(out, grid.origin()[c]);
  put_u64(out, grid.size());
  for (const auto& [idx, entry] : grid.entries()) {
    put_i32(out, idx.i);
    put_i32(out, idx.j);
    put_i32(out, idx.k);
    out.push_back(entry.label.class_id);
    for (const SurfaceSample& s : entry.field.samples) {
      for (int c = 0; c < 3; ++c) put_f32(out, s.position[c]);
      for (int c = 0; c < 3; ++c) put_f32(out, s.color[c]);
    }
  }
  return out;
}

VoxfieldGrid deserialize_grid(const std::vector<std::uint8_t>& bytes) {
  Reader r{bytes};
  r.need(4, "magic");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0)
    r.fail("bad magic, expected \"VXF1\"");
  r.pos = 4;
  const float voxel_size = r.f32("voxel_size");
  if (!std::isfinite(voxel_size) || voxel_size <= 0.f) r.fail("voxel_size must be finite and positive");
  const std::uint32_t n = r.u32("n");
  if (n == 0 || n > (1u << 20)) r.fail("samples per voxel out of range");
  Eigen::Vector3f origin;
  for (int c = 0; c < 3; ++c) {
    origin[c] = r.f32("origin");
    if (!std::isfinite(origin[c])) r.fail("origin must be finite");
  }
  const std::uint64_t count = r.u64("voxel_count");

  VoxfieldGrid grid(voxel_size, static_cast<int>(n), origin);
  const float half = 0.5f * voxel_size;
  for (std::uint64_t v = 0; v < count; ++v) {
    VoxelIndex idx;
    idx.i = r.i32("voxel index");
    idx.j = r.i32("voxel index");
    idx.k = r.i32("voxel index");
    if (grid.contains(idx)) r.fail("duplicate voxel index");
    const std::uint8_t class_id = r.u8("class_id");
    if (class_id != SemanticLabel::kNull && class_id >= kClassCount)
      r.fail("class_id outside taxonomy");
    SigmaVoxfield field;
    field.samples.resize(n);
    for (std::uint32_t s = 0; s < n; ++s) {
      SurfaceSample& sample = field.samples[s];
      for (int c = 0; c < 3; ++c) {
        const std::size_t at = r.pos;
        sample.position[c] = r.f32("position");
        if (!std::isfinite(sample.position[c]) || sample.position[c] < -half ||
            sample.position[c] > half) {
          r.pos = at;
          r.fail("sample position outside voxel box");
        }
      }
      for (int c = 0; c < 3; ++c) {
        const std::size_t at = r.pos;
        sample.color[c] = r.f32("color");
        if (!std::isfinite(sample.color[c]) || sample.color[c] < 0.f || sample.color[c] > 1.f) {
          r.pos = at;
          r.fail("sample color outside [0,1]");
        }
      }
    }
    grid.insert(idx, std::move(field), SemanticLabel{class_id});
  }
  if (r.pos != bytes.size()) r.fail("trailing bytes after last voxel record");
  return grid;
}

void write_grid(const VoxfieldGrid& grid, const std::string& path) {
  const std::vector<std::uint8_t> bytes = serialize_grid(grid);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed for " + path);
}

VoxfieldGrid read_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw DataError("cannot open " + path);
  const std::streamsize size = in.tellg();
  in.seekg(0);
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
  if (size > 0) in.read(reinterpret_cast<char*>(bytes.data()), size);
  if (!in) throw DataError("read failed for " + path);
  return deserialize_grid(bytes);
}

}  // namespace vxf
