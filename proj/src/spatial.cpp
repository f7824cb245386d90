#include "vxf/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace vxf {

Eigen::Vector3d closest_point_on_triangle(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                                          const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
  const Eigen::Vector3d ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Eigen::Vector3d bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;

  const Eigen::Vector3d cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);

  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

namespace {

double box_distance_sq(const Eigen::Vector3d& p, const Eigen::Vector3d& lo,
                       const Eigen::Vector3d& hi) {
  double d = 0.0;
  for (int c = 0; c < 3; ++c) {
    const double below = lo[c] - p[c];
    const double above = p[c] - hi[c];
    const double gap = std::max({below, above, 0.0});
    d += gap * gap;
  }
  return d;
}

constexpr std::int32_t kLeafSize = 8;

}  // namespace

TriangleBvh::TriangleBvh(const Mesh& mesh) : mesh_(mesh) {
  if (mesh.triangles.empty()) throw DataError("cannot build BVH over an empty mesh");
  order_.resize(mesh.triangles.size());
  for (std::uint32_t f = 0; f < order_.size(); ++f) order_[f] = f;
  nodes_.reserve(2 * order_.size() / kLeafSize + 2);
  build(0, static_cast<std::int32_t>(order_.size()));
}

std::int32_t TriangleBvh::build(std::int32_t first, std::int32_t count) {
  Node node;
  node.lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
  node.hi = -node.lo;
  for (std::int32_t i = first; i < first + count; ++i) {
    const auto& t = mesh_.triangles[order_[static_cast<std::size_t>(i)]];
    for (int v = 0; v < 3; ++v) {
      node.lo = node.lo.cwiseMin(mesh_.vertices[t[v]].position);
      node.hi = node.hi.cwiseMax(mesh_.vertices[t[v]].position);
    }
  }
  const std::int32_t id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(node);
  if (count <= kLeafSize) {
    nodes_[static_cast<std::size_t>(id)].first = first;
    nodes_[static_cast<std::size_t>(id)].count = count;
    return id;
  }
  int axis = 0;
  (node.hi - node.lo).maxCoeff(&axis);
  auto centroid = [&](std::uint32_t f) {
    const auto& t = mesh_.triangles[f];
    return (mesh_.vertices[t[0]].position[axis] + mesh_.vertices[t[1]].position[axis] +
            mesh_.vertices[t[2]].position[axis]) /
           3.0;
  };
  const std::int32_t mid = first + count / 2;
  std::nth_element(order_.begin() + first, order_.begin() + mid, order_.begin() + first + count,
                   [&](std::uint32_t fa, std::uint32_t fb) {
                     const double ca = centroid(fa), cb = centroid(fb);
                     return ca != cb ? ca < cb : fa < fb;
                   });
  const std::int32_t left = build(first, mid - first);
  const std::int32_t right = build(mid, first + count - mid);
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

double TriangleBvh::distance(const Eigen::Vector3d& p) const {
  double best_sq = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, std::int32_t>> stack;
  stack.emplace_back(box_distance_sq(p, nodes_[0].lo, nodes_[0].hi), 0);
  while (!stack.empty()) {
    const auto [bound, id] = stack.back();
    stack.pop_back();
    if (bound >= best_sq) continue;
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    if (node.left < 0) {
      for (std::int32_t i = node.first; i < node.first + node.count; ++i) {
        const auto& t = mesh_.triangles[order_[static_cast<std::size_t>(i)]];
        const Eigen::Vector3d q = closest_point_on_triangle(
            p, mesh_.vertices[t[0]].position, mesh_.vertices[t[1]].position,
            mesh_.vertices[t[2]].position);
        best_sq = std::min(best_sq, (p - q).squaredNorm());
      }
      continue;
    }
    const double dl = box_distance_sq(p, nodes_[static_cast<std::size_t>(node.left)].lo,
                                      nodes_[static_cast<std::size_t>(node.left)].hi);
    const double dr = box_distance_sq(p, nodes_[static_cast<std::size_t>(node.right)].lo,
                                      nodes_[static_cast<std::size_t>(node.right)].hi);
    // Push the farther child first so the nearer one is explored next.
    if (dl < dr) {
      if (dr < best_sq) stack.emplace_back(dr, node.right);
      if (dl < best_sq) stack.emplace_back(dl, node.left);
    } else {
      if (dl < best_sq) stack.emplace_back(dl, node.left);
      if (dr < best_sq) stack.emplace_back(dr, node.right);
    }
  }
  return std::sqrt(best_sq);
}

std::size_t PointGrid::CellHash::operator()(const CellKey& c) const {
  std::uint64_t h = static_cast<std::uint64_t>(c.x) * 0x9e3779b97f4a7c15ull;
  h ^= static_cast<std::uint64_t>(c.y) * 0xbf58476d1ce4e5b9ull;
  h ^= static_cast<std::uint64_t>(c.z) * 0x94d049bb133111ebull;
  h ^= h >> 29;
  return static_cast<std::size_t>(h);
}

PointGrid::PointGrid(std::vector<Eigen::Vector3d> points, double cell_size)
    : points_(std::move(points)), cell_(cell_size) {
  if (points_.empty()) throw DataError("cannot build point grid over an empty set");
  if (!(cell_ > 0.0)) throw DataError("cell size must be positive");
  cell_lo_ = cell_hi_ = cell_of(points_[0]);
  for (std::uint32_t i = 0; i < points_.size(); ++i) {
    const CellKey key = cell_of(points_[i]);
    cells_[key].push_back(i);
    cell_lo_ = CellKey{std::min(cell_lo_.x, key.x), std::min(cell_lo_.y, key.y),
                       std::min(cell_lo_.z, key.z)};
    cell_hi_ = CellKey{std::max(cell_hi_.x, key.x), std::max(cell_hi_.y, key.y),
                       std::max(cell_hi_.z, key.z)};
  }
}

PointGrid::CellKey PointGrid::cell_of(const Eigen::Vector3d& p) const {
  return CellKey{static_cast<std::int64_t>(std::floor(p[0] / cell_)),
                 static_cast<std::int64_t>(std::floor(p[1] / cell_)),
                 static_cast<std::int64_t>(std::floor(p[2] / cell_))};
}

std::size_t PointGrid::nearest(const Eigen::Vector3d& p) const {
  const CellKey home = cell_of(p);
  // Beyond this ring there are no populated cells at all.
  const std::int64_t last_ring =
      std::max({std::max(home.x - cell_lo_.x, cell_hi_.x - home.x),
                std::max(home.y - cell_lo_.y, cell_hi_.y - home.y),
                std::max(home.z - cell_lo_.z, cell_hi_.z - home.z), std::int64_t{0}});
  double best_sq = std::numeric_limits<double>::infinity();
  std::size_t best = 0;
  bool have = false;
  for (std::int64_t ring = 0; ring <= last_ring; ++ring) {
    // A point in a ring-m cell is at least (m-1)*cell away from p.
    if (have && ring >= 2) {
      const double safe = static_cast<double>(ring - 1) * cell_;
      if (safe * safe >= best_sq) break;
    }
    for (std::int64_t dx = -ring; dx <= ring; ++dx)
      for (std::int64_t dy = -ring; dy <= ring; ++dy)
        for (std::int64_t dz = -ring; dz <= ring; ++dz) {
          if (std::max({std::llabs(dx), std::llabs(dy), std::llabs(dz)}) != ring) continue;
          auto it = cells_.find(CellKey{home.x + dx, home.y + dy, home.z + dz});
          if (it == cells_.end()) continue;
          for (std::uint32_t id : it->second) {
            const double d = (points_[id] - p).squaredNorm();
            if (d < best_sq || (d == best_sq && id < best)) {
              best_sq = d;
              best = id;
              have = true;
            }
          }
        }
  }
  return best;
}

double PointGrid::nearest_distance(const Eigen::Vector3d& p) const {
  return (points_[nearest(p)] - p).norm();
}

std::vector<std::size_t> PointGrid::k_nearest_within(const Eigen::Vector3d& p, int k,
                                                     double max_radius) const {
  const double r_sq = max_radius * max_radius;
  const CellKey lo = cell_of(p - Eigen::Vector3d::Constant(max_radius));
  const CellKey hi = cell_of(p + Eigen::Vector3d::Constant(max_radius));
  std::vector<std::pair<double, std::size_t>> found;
  for (std::int64_t x = lo.x; x <= hi.x; ++x)
    for (std::int64_t y = lo.y; y <= hi.y; ++y)
      for (std::int64_t z = lo.z; z <= hi.z; ++z) {
        auto it = cells_.find(CellKey{x, y, z});
        if (it == cells_.end()) continue;
        for (std::uint32_t id : it->second) {
          const double d = (points_[id] - p).squaredNorm();
          if (d <= r_sq) found.emplace_back(d, id);
        }
      }
  std::sort(found.begin(), found.end());
  if (static_cast<int>(found.size()) > k) found.resize(static_cast<std::size_t>(k));
  std::vector<std::size_t> ids;
  ids.reserve(found.size());
  for (const auto& [d, id] : found) ids.push_back(id);
  return ids;
}

}  // namespace vxf
