#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace vxf {

// Error taxonomy, mapped onto CLI exit codes (config=2, data=3, numeric=4).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// 20-class street-scene taxonomy. 255 marks the null label reserved for
// classifier-free-guidance dropout; it is never a scene class.
struct SemanticLabel {
  static constexpr std::uint8_t kNull = 255;
  std::uint8_t class_id = kNull;

  SemanticLabel() = default;
  explicit SemanticLabel(std::uint8_t id) : class_id(id) {}

  bool is_null() const { return class_id == kNull; }
  bool operator==(const SemanticLabel&) const = default;
};

inline constexpr int kClassCount = 20;

// Taxonomy order is fixed; ids index this table.
const char* class_name(int class_id);

// Throws DataError unless id is in {0..19} or 255.
SemanticLabel make_label(int class_id);

// Named ids for the classes the scene synthesizer emits.
namespace cls {
inline constexpr std::uint8_t kRoad = 0;
inline constexpr std::uint8_t kSidewalk = 1;
inline constexpr std::uint8_t kBuilding = 2;
inline constexpr std::uint8_t kPole = 5;
inline constexpr std::uint8_t kVegetation = 8;
inline constexpr std::uint8_t kTerrain = 9;
inline constexpr std::uint8_t kCar = 13;
inline constexpr std::uint8_t kRoadLane = 19;
}  // namespace cls

// One colored point of a voxfield, position relative to the voxel center.
struct SurfaceSample {
  Eigen::Vector3f position;  // meters, each component in [-v_s/2, v_s/2]
  Eigen::Vector3f color;     // [0,1]
};

// Fixed-cardinality set of surface samples; the atomic generation token.
struct SigmaVoxfield {
  std::vector<SurfaceSample> samples;

  int n() const { return static_cast<int>(samples.size()); }
};

struct VoxelIndex {
  std::int32_t i = 0, j = 0, k = 0;

  bool operator==(const VoxelIndex&) const = default;
  auto operator<=>(const VoxelIndex&) const = default;
};

struct GridEntry {
  SigmaVoxfield field;
  SemanticLabel label;
};

// Sparse world-indexed collection of voxfields. Entries are keyed by integer
// voxel index; iteration order is index-lexicographic, which makes
// serialization and traversal deterministic.
class VoxfieldGrid {
 public:
  VoxfieldGrid() = default;
  VoxfieldGrid(float voxel_size, int n, const Eigen::Vector3f& origin = Eigen::Vector3f::Zero())
      : voxel_size_(voxel_size), n_(n), origin_(origin) {
    if (!(voxel_size > 0.f)) throw DataError("voxel_size must be positive");
    if (n < 1) throw DataError("samples per voxel must be >= 1");
  }

  float voxel_size() const { return voxel_size_; }
  int n() const { return n_; }
  const Eigen::Vector3f& origin() const { return origin_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  // Center of voxel (i,j,k) = origin + (i+1/2, j+1/2, k+1/2) * v_s.
  Eigen::Vector3d center(const VoxelIndex& idx) const {
    return origin_.cast<double>() +
           Eigen::Vector3d(idx.i + 0.5, idx.j + 0.5, idx.k + 0.5) * static_cast<double>(voxel_size_);
  }

  // Rejects partial voxfields so the grid never holds an empty entry.
  void insert(const VoxelIndex& idx, SigmaVoxfield field, SemanticLabel label) {
    if (field.n() != n_)
      throw DataError("voxfield has " + std::to_string(field.n()) + " samples, grid expects " +
                      std::to_string(n_));
    entries_.insert_or_assign(idx, GridEntry{std::move(field), label});
  }

  bool contains(const VoxelIndex& idx) const { return entries_.count(idx) != 0; }

  const GridEntry& at(const VoxelIndex& idx) const {
    auto it = entries_.find(idx);
    if (it == entries_.end()) throw DataError("no voxel at requested index");
    return it->second;
  }

  const std::map<VoxelIndex, GridEntry>& entries() const { return entries_; }

 private:
  float voxel_size_ = 0.6f;
  int n_ = 20;
  Eigen::Vector3f origin_ = Eigen::Vector3f::Zero();
  std::map<VoxelIndex, GridEntry> entries_;
};

}  // namespace vxf
