#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vxf/denoiser.hpp"
#include "vxf/diffusion.hpp"
#include "vxf/schedule.hpp"
#include "vxf/types.hpp"

namespace vxf {

// Ordered list of overlapping voxel regions, each at most K voxels.
struct RegionPlan {
  std::vector<std::vector<VoxelIndex>> regions;
  int region_size_k = 150;
  int coverage_threshold = 1;
  // Voxels no acceptable region could reach (disconnected clouds only).
  std::size_t uncovered_remaining = 0;
};

// min over regions, min over member points, of |p - q|.
double dist_to_regions(const Eigen::Vector3d& p,
                       const std::vector<std::vector<Eigen::Vector3d>>& regions);

// Distance-guided region extraction:
// repeat: seed = uncovered point minimizing distance to the existing
// regions; candidate = K nearest neighbors of the seed in P (ties by id);
// accept iff it covers >= T_cov uncovered points, else stop.
// `initial` holds at least one starting region (point ids into `points`).
// Point ids double as tie-break order, so callers pass points in a
// deterministic order (index-lexicographic for voxel grids).
struct RegionExtraction {
  std::vector<std::vector<std::size_t>> regions;  // includes the initial ones
  std::size_t uncovered_remaining = 0;
};

RegionExtraction extract_regions(const std::vector<Eigen::Vector3d>& points, int K, int T_cov,
                                 const std::vector<std::vector<std::size_t>>& initial);

// Default bootstrap: the K nearest neighbors of the point closest to the
// cloud centroid, or of points[seed_index] when seed_index >= 0.
std::vector<std::size_t> bootstrap_region(const std::vector<Eigen::Vector3d>& points, int K,
                                          std::ptrdiff_t seed_index = -1);

// Voxel-level plan over a semantic grid skeleton.
RegionPlan plan_regions(const VoxfieldGrid& skeleton, int K, int T_cov,
                        std::ptrdiff_t bootstrap_index = -1);

// "region_id: i,j,k; i,j,k; ..." per line.
void write_region_plan(const RegionPlan& plan, const std::string& path);

// Produces a sampling context for one local set; lets tests inject analytic
// denoisers in place of a trained model.
using DenoiserBinder =
    std::function<DenoiserFn(const std::vector<SemanticLabel>&, const Mat<double>& centers)>;

DenoiserBinder model_binder(const Denoiser<float>& model);

struct GenerateOptions {
  int region_size_k = 150;
  int coverage_threshold = 30;
  float guidance_scale = 4.0f;
  int resample_count = 1;
  std::uint64_t seed = 0;
  std::ptrdiff_t bootstrap_index = -1;
};

struct GenerateStats {
  std::size_t region_count = 0;
  std::size_t skipped_regions = 0;       // regions with zero target voxels
  std::size_t known_mismatches = 0;      // repaint bit-equality audit failures
  std::size_t uncovered_remaining = 0;
  Eigen::Index peak_resident_tokens = 0;  // scalability contract: <= K
};

// Progressive large-scene generation: region 1 is sampled unconditionally,
// later regions repaint against already-generated overlap. The skeleton
// supplies indices and labels; sample data in it is ignored. Deterministic
// for a fixed seed; already-generated voxels are never modified.
VoxfieldGrid progressive_generate(const VoxfieldGrid& skeleton, const DenoiserBinder& binder,
                                  const NoiseSchedule& schedule, const GenerateOptions& options,
                                  GenerateStats* stats = nullptr);

}  // namespace vxf
