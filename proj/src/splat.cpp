#include "vxf/splat.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "vxf/spatial.hpp"

namespace vxf {

NormalEstimate estimate_normal(const Eigen::Vector3d& point,
                               const std::vector<Eigen::Vector3d>& neighbors) {
  NormalEstimate est;
  if (neighbors.size() < 3) {
    est.degenerate = true;
    return est;
  }
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& q : neighbors) mean += q;
  mean /= static_cast<double>(neighbors.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& q : neighbors) {
    const Eigen::Vector3d d = q - mean;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(neighbors.size());

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  const Eigen::Vector3d evals = solver.eigenvalues();  // ascending
  // rank < 2: the two largest eigenvalues no longer span a plane.
  const double scale = evals[2];
  if (!(scale > 0.0) || evals[1] <= 1e-9 * scale) {
    est.degenerate = true;
    return est;
  }
  est.normal = solver.eigenvectors().col(0).normalized();
  (void)point;
  return est;
}

namespace {

// Deterministic tangent completion: reference axis least aligned with the
// normal, ties to the smaller axis index.
Eigen::Matrix3d frame_from_normal(const Eigen::Vector3d& n) {
  int ref_axis = 0;
  double best = std::abs(n[0]);
  for (int a = 1; a < 3; ++a)
    if (std::abs(n[a]) < best) {
      best = std::abs(n[a]);
      ref_axis = a;
    }
  const Eigen::Vector3d ref = Eigen::Vector3d::Unit(ref_axis);
  const Eigen::Vector3d t1 = n.cross(ref).normalized();
  const Eigen::Vector3d t2 = n.cross(t1);
  Eigen::Matrix3d rot;
  rot.col(0) = t1;
  rot.col(1) = t2;
  rot.col(2) = n;
  return rot;
}

}  // namespace

std::vector<Splat> build_splats(const VoxfieldGrid& grid, const SplatBuildOptions& options) {
  if (grid.empty()) throw DataError("build_splats: empty grid");

  std::vector<Eigen::Vector3d> points;
  std::vector<Eigen::Vector3f> colors;
  points.reserve(grid.size() * static_cast<std::size_t>(grid.n()));
  for (const auto& [idx, entry] : grid.entries()) {
    const Eigen::Vector3d center = grid.center(idx);
    for (const SurfaceSample& s : entry.field.samples) {
      points.push_back(center + s.position.cast<double>());
      colors.push_back(s.color);
    }
  }

  const PointGrid neighbors(points, grid.voxel_size());
  std::vector<Splat> splats;
  splats.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto ids =
        neighbors.k_nearest_within(points[i], options.k_neighbors, options.neighbor_radius);
    std::vector<Eigen::Vector3d> local;
    local.reserve(ids.size());
    for (std::size_t id : ids) local.push_back(points[id]);
    const NormalEstimate est = estimate_normal(points[i], local);

    Splat s;
    s.center = points[i];
    s.rotation = frame_from_normal(est.normal);
    s.radius = options.radius;
    s.color = colors[i];
    splats.push_back(s);
  }
  return splats;
}

}  // namespace vxf
