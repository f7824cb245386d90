#pragma once

#include <string>
#include <vector>

#include "vxf/types.hpp"

namespace vxf {

// VXF binary grid format, little-endian.
//
//   header (32 bytes):
//     magic        "VXF1"   4 bytes
//     voxel_size   f32
//     n            u32
//     origin       3 x f32
//     voxel_count  u64
//   per-voxel record, sorted by (i,j,k):
//     i, j, k      i32 each
//     class_id     u8 (255 = null)
//     samples      n x (3 x f32 position, 3 x f32 color), canonical order
//
// Reads validate every invariant (finite values, positions inside the voxel
// box, colors in [0,1]) and report the byte offset of the first violation.

std::vector<std::uint8_t> serialize_grid(const VoxfieldGrid& grid);
VoxfieldGrid deserialize_grid(const std::vector<std::uint8_t>& bytes);

void write_grid(const VoxfieldGrid& grid, const std::string& path);
VoxfieldGrid read_grid(const std::string& path);

}  // namespace vxf
