#include "vxf/outpaint.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include "vxf/token.hpp"

namespace vxf {

double dist_to_regions(const Eigen::Vector3d& p,
                       const std::vector<std::vector<Eigen::Vector3d>>& regions) {
  if (regions.empty()) throw DataError("dist_to_regions: no regions");
  double best_sq = std::numeric_limits<double>::infinity();
  for (const auto& region : regions)
    for (const Eigen::Vector3d& q : region) best_sq = std::min(best_sq, (p - q).squaredNorm());
  if (!std::isfinite(best_sq)) throw DataError("dist_to_regions: regions are empty");
  return std::sqrt(best_sq);
}

namespace {

// K nearest point ids to points[seed] over the whole cloud, ties by id.
std::vector<std::size_t> k_nearest_ids(const std::vector<Eigen::Vector3d>& points,
                                       std::size_t seed, int K) {
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    dist.emplace_back((points[i] - points[seed]).squaredNorm(), i);
  const std::size_t count = std::min<std::size_t>(static_cast<std::size_t>(K), points.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(count), dist.end());
  std::vector<std::size_t> ids(count);
  for (std::size_t i = 0; i < count; ++i) ids[i] = dist[i].second;
  return ids;
}

}  // namespace

std::vector<std::size_t> bootstrap_region(const std::vector<Eigen::Vector3d>& points, int K,
                                          std::ptrdiff_t seed_index) {
  if (points.empty()) throw DataError("bootstrap_region: empty point set");
  std::size_t seed;
  if (seed_index >= 0) {
    if (static_cast<std::size_t>(seed_index) >= points.size())
      throw DataError("bootstrap seed index out of range");
    seed = static_cast<std::size_t>(seed_index);
  } else {
    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
    for (const auto& p : points) centroid += p;
    centroid /= static_cast<double>(points.size());
    double best = std::numeric_limits<double>::infinity();
    seed = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double d = (points[i] - centroid).squaredNorm();
      if (d < best) {
        best = d;
        seed = i;
      }
    }
  }
  return k_nearest_ids(points, seed, K);
}

RegionExtraction extract_regions(const std::vector<Eigen::Vector3d>& points, int K, int T_cov,
                                 const std::vector<std::vector<std::size_t>>& initial) {
  if (K < 1 || T_cov < 1 || K < T_cov)
    throw DataError("extract_regions needs K >= T_cov >= 1");
  if (initial.empty() || initial[0].empty())
    throw DataError("extract_regions needs a nonempty initial region");

  const std::size_t n = points.size();
  std::vector<bool> covered(n, false);
  // Incremental min-distance to covered members; refreshed only against
  // newly covered points on each acceptance.
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::size_t uncovered = n;

  RegionExtraction out;
  auto fold_members = [&](const std::vector<std::size_t>& member_ids) {
    std::vector<std::size_t> fresh;
    for (std::size_t id : member_ids) {
      if (id >= n) throw DataError("region member id out of range");
      if (!covered[id]) {
        covered[id] = true;
        --uncovered;
        fresh.push_back(id);
      }
    }
    for (std::size_t p = 0; p < n; ++p) {
      if (covered[p]) {
        dist[p] = 0.0;
        continue;
      }
      for (std::size_t id : fresh)
        dist[p] = std::min(dist[p], (points[p] - points[id]).squaredNorm());
    }
    return fresh;
  };

  for (const auto& region : initial) {
    fold_members(region);
    out.regions.push_back(region);
  }

  while (uncovered > 0) {
    // Seed: uncovered point closest to the existing regions; ties by id.
    std::size_t seed = n;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < n; ++p)
      if (!covered[p] && dist[p] < best) {
        best = dist[p];
        seed = p;
      }
    if (seed == n) break;

    std::vector<std::size_t> candidate = k_nearest_ids(points, seed, K);
    std::size_t newly = 0;
    for (std::size_t id : candidate) newly += covered[id] ? 0 : 1;
    if (newly < static_cast<std::size_t>(T_cov)) break;  // no acceptable region remains

    fold_members(candidate);
    out.regions.push_back(std::move(candidate));
  }

  out.uncovered_remaining = uncovered;
  return out;
}

RegionPlan plan_regions(const VoxfieldGrid& skeleton, int K, int T_cov,
                        std::ptrdiff_t bootstrap_index) {
  if (skeleton.empty()) throw DataError("plan_regions: empty grid");
  std::vector<VoxelIndex> order;
  std::vector<Eigen::Vector3d> points;
  order.reserve(skeleton.size());
  points.reserve(skeleton.size());
  for (const auto& [idx, entry] : skeleton.entries()) {
    order.push_back(idx);
    points.push_back(skeleton.center(idx));
  }
  const RegionExtraction ext =
      extract_regions(points, K, T_cov, {bootstrap_region(points, K, bootstrap_index)});
  RegionPlan plan;
  plan.region_size_k = K;
  plan.coverage_threshold = T_cov;
  plan.uncovered_remaining = ext.uncovered_remaining;
  plan.regions.reserve(ext.regions.size());
  for (const auto& region : ext.regions) {
    std::vector<VoxelIndex> voxels;
    voxels.reserve(region.size());
    for (std::size_t id : region) voxels.push_back(order[id]);
    plan.regions.push_back(std::move(voxels));
  }
  return plan;
}

void write_region_plan(const RegionPlan& plan, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open " + path + " for writing");
  for (std::size_t r = 0; r < plan.regions.size(); ++r) {
    out << r << ':';
    for (std::size_t m = 0; m < plan.regions[r].size(); ++m) {
      const VoxelIndex& v = plan.regions[r][m];
      out << (m == 0 ? " " : "; ") << v.i << ',' << v.j << ',' << v.k;
    }
    out << '\n';
  }
  if (!out) throw DataError("write failed for " + path);
}

DenoiserBinder model_binder(const Denoiser<float>& model) {
  return [&model](const std::vector<SemanticLabel>& semantics, const Mat<double>& centers) {
    return bind_denoiser(model, semantics, centers);
  };
}

VoxfieldGrid progressive_generate(const VoxfieldGrid& skeleton, const DenoiserBinder& binder,
                                  const NoiseSchedule& schedule, const GenerateOptions& options,
                                  GenerateStats* stats) {
  const RegionPlan plan = plan_regions(skeleton, options.region_size_k,
                                       options.coverage_threshold, options.bootstrap_index);
  const int token_dim = 6 * skeleton.n();

  GenerateStats local;
  GenerateStats& st = stats ? *stats : local;
  st = GenerateStats{};
  st.uncovered_remaining = plan.uncovered_remaining;

  std::map<VoxelIndex, Eigen::RowVectorXf> generated;
  VoxfieldGrid out(skeleton.voxel_size(), skeleton.n(), skeleton.origin());

  for (std::size_t r = 0; r < plan.regions.size(); ++r) {
    const std::vector<VoxelIndex>& region = plan.regions[r];
    const Eigen::Index rows = static_cast<Eigen::Index>(region.size());

    std::vector<SemanticLabel> semantics(region.size());
    Mat<double> centers(rows, 3);
    Mat<float> known = Mat<float>::Zero(rows, token_dim);
    std::vector<std::uint8_t> mask(region.size(), 0);
    Eigen::Index targets = 0;
    for (Eigen::Index i = 0; i < rows; ++i) {
      const VoxelIndex& idx = region[static_cast<std::size_t>(i)];
      semantics[static_cast<std::size_t>(i)] = skeleton.at(idx).label;
      centers.row(i) = skeleton.center(idx).transpose();
      auto it = generated.find(idx);
      if (it != generated.end()) {
        mask[static_cast<std::size_t>(i)] = 1;
        known.row(i) = it->second;
      } else {
        ++targets;
      }
    }
    if (targets == 0) {
      ++st.skipped_regions;
      continue;
    }

    st.peak_resident_tokens = std::max(st.peak_resident_tokens, rows);

    SampleOptions sopt;
    sopt.guidance_scale = options.guidance_scale;
    sopt.resample_count = options.resample_count;
    sopt.seed = derive_seed(options.seed, 0x9e6, static_cast<std::int64_t>(r));
    const DenoiserFn denoiser = binder(semantics, centers);
    const Mat<float> tokens = repaint_sample(denoiser, region, known, mask, schedule, sopt);

    for (Eigen::Index i = 0; i < rows; ++i) {
      const VoxelIndex& idx = region[static_cast<std::size_t>(i)];
      if (mask[static_cast<std::size_t>(i)]) {
        // Repaint contract audit: known rows must come back bit-equal.
        if ((tokens.row(i).array() != known.row(i).array()).any()) ++st.known_mismatches;
        continue;
      }
      generated[idx] = tokens.row(i);
      out.insert(idx,
                 unflatten_token_checked<float>(tokens.row(i).transpose(), skeleton.voxel_size(),
                                                skeleton.n()),
                 skeleton.at(idx).label);
    }
    ++st.region_count;
  }
  return out;
}

}  // namespace vxf
