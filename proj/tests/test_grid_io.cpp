#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "vxf/grid_io.hpp"
#include "vxf/rng.hpp"
#include "vxf/token.hpp"

using namespace vxf;

namespace {

VoxfieldGrid random_grid(std::uint64_t seed, int voxels, int n) {
  Rng rng(seed);
  VoxfieldGrid grid(0.6f, n, Eigen::Vector3f(-1.f, 0.5f, 2.f));
  for (int v = 0; v < voxels; ++v) {
    SigmaVoxfield field;
    for (int s = 0; s < n; ++s) {
      SurfaceSample sample;
      for (int c = 0; c < 3; ++c) {
        sample.position[c] = static_cast<float>(rng.uniform(-0.3, 0.3));
        sample.color[c] = static_cast<float>(rng.uniform());
      }
      field.samples.push_back(sample);
    }
    field.samples = canonical_order(std::move(field.samples));
    grid.insert(VoxelIndex{static_cast<int>(rng.uniform_int(-40, 40)),
                           static_cast<int>(rng.uniform_int(-40, 40)),
                           static_cast<int>(rng.uniform_int(-3, 6))},
                std::move(field), make_label(static_cast<int>(rng.uniform_int(0, 19))));
  }
  return grid;
}

}  // namespace

TEST_CASE("empty grid serializes to the 32-byte header") {
  VoxfieldGrid grid(0.6f, 20);
  auto bytes = serialize_grid(grid);
  CHECK(bytes.size() == 32);
  VoxfieldGrid back = deserialize_grid(bytes);
  CHECK(back.empty());
  CHECK(back.voxel_size() == 0.6f);
  CHECK(back.n() == 20);
}

TEST_CASE("grid round trip is byte-exact") {
  VoxfieldGrid grid = random_grid(77, 50, 20);
  auto bytes = serialize_grid(grid);
  VoxfieldGrid back = deserialize_grid(bytes);
  auto bytes2 = serialize_grid(back);
  CHECK(bytes == bytes2);
  CHECK(back.size() == grid.size());
}

TEST_CASE("single-voxel grid file round trips through disk") {
  VoxfieldGrid grid = random_grid(3, 1, 4);
  const std::string path = (std::filesystem::temp_directory_path() / "vxf_io_test.vxf").string();
  write_grid(grid, path);
  VoxfieldGrid back = read_grid(path);
  CHECK(serialize_grid(back) == serialize_grid(grid));
  std::remove(path.c_str());
}

TEST_CASE("corrupted magic reports the expected tag") {
  auto bytes = serialize_grid(random_grid(9, 2, 3));
  bytes[0] = 'Q';
  CHECK_THROWS_WITH_AS(deserialize_grid(bytes), doctest::Contains("VXF1"), DataError);
}

TEST_CASE("truncated file and bad payloads are rejected with offsets") {
  auto bytes = serialize_grid(random_grid(11, 2, 3));
  auto truncated = bytes;
  truncated.resize(bytes.size() - 5);
  CHECK_THROWS_WITH_AS(deserialize_grid(truncated), doctest::Contains("offset"), DataError);

  // Position outside the voxel box: patch the first sample's x to 2.0.
  auto corrupt = bytes;
  const std::size_t pos_offset = 32 + 13;
  const float big = 2.0f;
  std::memcpy(corrupt.data() + pos_offset, &big, 4);
  CHECK_THROWS_WITH_AS(deserialize_grid(corrupt), doctest::Contains("voxel box"), DataError);
}
