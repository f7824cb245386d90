#include "vxf/chamfer.hpp"

#include <algorithm>
#include <cmath>

#include "vxf/rng.hpp"
#include "vxf/spatial.hpp"

namespace vxf {

namespace {

std::vector<Eigen::Vector3d> grid_sample_points(const VoxfieldGrid& grid) {
  std::vector<Eigen::Vector3d> points;
  points.reserve(grid.size() * static_cast<std::size_t>(grid.n()));
  for (const auto& [idx, entry] : grid.entries()) {
    const Eigen::Vector3d center = grid.center(idx);
    for (const SurfaceSample& s : entry.field.samples)
      points.push_back(center + s.position.cast<double>());
  }
  return points;
}

}  // namespace

ChamferResult chamfer_distance(const VoxfieldGrid& grid, const Mesh& mesh, int probe_count,
                               std::uint64_t probe_seed) {
  if (grid.empty()) throw DataError("chamfer_distance: grid is empty");
  if (mesh.triangles.empty()) throw DataError("chamfer_distance: mesh is empty");
  if (probe_count <= 0) throw DataError("chamfer_distance: probe_count must be positive");

  std::vector<Eigen::Vector3d> samples = grid_sample_points(grid);

  ChamferResult result;

  // Grid -> mesh: exact nearest-surface distance via the BVH.
  TriangleBvh bvh(mesh);
  double sum = 0.0;
  for (const Eigen::Vector3d& p : samples) sum += bvh.distance(p);
  result.grid_to_mesh = sum / static_cast<double>(samples.size());

  // Mesh -> grid: area-uniform surface probes against the sample set.
  std::vector<double> cumulative(mesh.triangles.size());
  double total = 0.0;
  for (std::size_t f = 0; f < mesh.triangles.size(); ++f) {
    total += mesh.face_area(f);
    cumulative[f] = total;
  }
  if (total <= 0.0) throw DataError("chamfer_distance: mesh has zero surface area");

  PointGrid sample_grid(std::move(samples), static_cast<double>(grid.voxel_size()));
  Rng rng(derive_seed(probe_seed, 0xc4a3f));
  sum = 0.0;
  for (int i = 0; i < probe_count; ++i) {
    const double pick = rng.uniform() * total;
    const std::size_t f = static_cast<std::size_t>(
        std::lower_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin());
    const auto& t = mesh.triangles[std::min(f, mesh.triangles.size() - 1)];
    const double r1 = std::sqrt(rng.uniform());
    const double r2 = rng.uniform();
    const Eigen::Vector3d p = mesh.vertices[t[0]].position +
                              r1 * (1.0 - r2) * (mesh.vertices[t[1]].position -
                                                 mesh.vertices[t[0]].position) +
                              r1 * r2 * (mesh.vertices[t[2]].position -
                                         mesh.vertices[t[0]].position);
    sum += sample_grid.nearest_distance(p);
  }
  result.mesh_to_grid = sum / static_cast<double>(probe_count);

  result.symmetric = 0.5 * (result.grid_to_mesh + result.mesh_to_grid);
  return result;
}

}  // namespace vxf
