#include "vxf/voxelize.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <map>

#include "vxf/parallel.hpp"
#include "vxf/rng.hpp"
#include "vxf/token.hpp"

namespace vxf {

namespace {

// Clipped areas below this are fp noise from touching contacts, not surface.
constexpr double kAreaEps = 1e-18;

void clip_against_plane(const ClipPolygon& in, ClipPolygon& out, int axis, double bound,
                        bool keep_below) {
  out.clear();
  const std::size_t count = in.size();
  for (std::size_t i = 0; i < count; ++i) {
    const ClipVertex& cur = in[i];
    const ClipVertex& nxt = in[(i + 1) % count];
    const double dc = keep_below ? bound - cur.position[axis] : cur.position[axis] - bound;
    const double dn = keep_below ? bound - nxt.position[axis] : nxt.position[axis] - bound;
    const bool cur_in = dc >= 0.0;
    const bool nxt_in = dn >= 0.0;
    if (cur_in) out.push_back(cur);
    if (cur_in != nxt_in) {
      const double t = dc / (dc - dn);  // dc and dn have opposite signs here
      ClipVertex v;
      v.position = cur.position + t * (nxt.position - cur.position);
      v.position[axis] = bound;  // pin to the plane to avoid drift
      v.color = cur.color + t * (nxt.color - cur.color);
      out.push_back(v);
    }
  }
}

}  // namespace

ClipPolygon clip_triangle_to_box(const ClipVertex& a, const ClipVertex& b, const ClipVertex& c,
                                 const Eigen::Vector3d& lo, const Eigen::Vector3d& hi) {
  ClipPolygon poly = {a, b, c};
  ClipPolygon scratch;
  scratch.reserve(9);
  for (int axis = 0; axis < 3; ++axis) {
    clip_against_plane(poly, scratch, axis, lo[axis], false);
    poly.swap(scratch);
    if (poly.empty()) return poly;
    clip_against_plane(poly, scratch, axis, hi[axis], true);
    poly.swap(scratch);
    if (poly.empty()) return poly;
  }
  return poly;
}

double polygon_area(const ClipPolygon& poly) {
  if (poly.size() < 3) return 0.0;
  Eigen::Vector3d cross_sum = Eigen::Vector3d::Zero();
  for (std::size_t i = 1; i + 1 < poly.size(); ++i)
    cross_sum += (poly[i].position - poly[0].position)
                     .cross(poly[i + 1].position - poly[0].position);
  return 0.5 * cross_sum.norm();
}

namespace {

struct VoxelGeom {
  Eigen::Vector3d lo, hi, center;
};

VoxelGeom voxel_geom(const VoxelIndex& idx, double vs, const Eigen::Vector3d& origin) {
  VoxelGeom g;
  g.lo = origin + Eigen::Vector3d(idx.i, idx.j, idx.k) * vs;
  g.hi = origin + Eigen::Vector3d(idx.i + 1, idx.j + 1, idx.k + 1) * vs;
  g.center = origin + Eigen::Vector3d(idx.i + 0.5, idx.j + 0.5, idx.k + 0.5) * vs;
  return g;
}

ClipVertex mesh_clip_vertex(const Mesh& mesh, std::uint32_t v) {
  return ClipVertex{mesh.vertices[v].position, mesh.vertices[v].color.cast<double>()};
}

// Candidate voxels per triangle from the AABB, grouped by voxel.
std::map<VoxelIndex, std::vector<std::uint32_t>> candidate_map(const Mesh& mesh, double vs,
                                                               const Eigen::Vector3d& origin) {
  std::map<VoxelIndex, std::vector<std::uint32_t>> cand;
  for (std::uint32_t f = 0; f < mesh.triangles.size(); ++f) {
    const auto& t = mesh.triangles[f];
    Eigen::Vector3d lo = mesh.vertices[t[0]].position;
    Eigen::Vector3d hi = lo;
    for (int v = 1; v < 3; ++v) {
      lo = lo.cwiseMin(mesh.vertices[t[v]].position);
      hi = hi.cwiseMax(mesh.vertices[t[v]].position);
    }
    Eigen::Vector3i ilo, ihi;
    for (int axis = 0; axis < 3; ++axis) {
      ilo[axis] = static_cast<int>(std::floor((lo[axis] - origin[axis]) / vs));
      ihi[axis] = static_cast<int>(std::floor((hi[axis] - origin[axis]) / vs));
    }
    for (int i = ilo[0]; i <= ihi[0]; ++i)
      for (int j = ilo[1]; j <= ihi[1]; ++j)
        for (int k = ilo[2]; k <= ihi[2]; ++k) cand[VoxelIndex{i, j, k}].push_back(f);
  }
  return cand;
}

struct ClippedFace {
  ClipPolygon poly;
  double area = 0.0;
  SemanticLabel label;
};

// All positive-area clips of candidate triangles against one voxel box.
std::vector<ClippedFace> clip_voxel(const Mesh& mesh, const std::vector<std::uint32_t>& faces,
                                    const VoxelGeom& geom) {
  std::vector<ClippedFace> out;
  for (std::uint32_t f : faces) {
    const auto& t = mesh.triangles[f];
    ClipPolygon poly = clip_triangle_to_box(mesh_clip_vertex(mesh, t[0]),
                                            mesh_clip_vertex(mesh, t[1]),
                                            mesh_clip_vertex(mesh, t[2]), geom.lo, geom.hi);
    const double area = polygon_area(poly);
    if (area > kAreaEps) out.push_back(ClippedFace{std::move(poly), area, mesh.face_semantics[f]});
  }
  return out;
}

std::pair<SigmaVoxfield, SemanticLabel> sample_from_clips(const std::vector<ClippedFace>& clips,
                                                          const VoxelGeom& geom, float voxel_size,
                                                          int n, Rng rng) {
  // Fan-triangulate every clipped polygon into an area-weighted table.
  struct SubTri {
    Eigen::Vector3d p0, e1, e2;
    Eigen::Vector3d c0, dc1, dc2;
  };
  std::vector<SubTri> tris;
  std::vector<double> cumulative;
  double total = 0.0;
  std::map<std::uint8_t, double> class_area;
  for (const ClippedFace& cf : clips) {
    class_area[cf.label.class_id] += cf.area;
    for (std::size_t i = 1; i + 1 < cf.poly.size(); ++i) {
      SubTri st;
      st.p0 = cf.poly[0].position;
      st.e1 = cf.poly[i].position - st.p0;
      st.e2 = cf.poly[i + 1].position - st.p0;
      const double area = 0.5 * st.e1.cross(st.e2).norm();
      if (area <= 0.0) continue;
      st.c0 = cf.poly[0].color;
      st.dc1 = cf.poly[i].color - st.c0;
      st.dc2 = cf.poly[i + 1].color - st.c0;
      total += area;
      tris.push_back(st);
      cumulative.push_back(total);
    }
  }
  if (total <= kAreaEps || tris.empty())
    throw NumericError("sample_voxfield: voxel has zero clipped surface area");

  // Area-weighted majority; null (255) loses ties to every real class.
  std::uint8_t best_class = SemanticLabel::kNull;
  double best_area = -1.0;
  for (const auto& [cid, area] : class_area) {
    if (area > best_area || (area == best_area && cid < best_class)) {
      best_area = area;
      best_class = cid;
    }
  }

  const float half = 0.5f * voxel_size;
  SigmaVoxfield field;
  field.samples.reserve(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) {
    const double pick = rng.uniform() * total;
    const std::size_t ti = static_cast<std::size_t>(
        std::lower_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin());
    const SubTri& st = tris[std::min(ti, tris.size() - 1)];
    // Square-root warp gives uniform density over the triangle.
    const double r1 = std::sqrt(rng.uniform());
    const double r2 = rng.uniform();
    const double w1 = r1 * (1.0 - r2);
    const double w2 = r1 * r2;
    const Eigen::Vector3d pos = st.p0 + w1 * st.e1 + w2 * st.e2;
    const Eigen::Vector3d col = st.c0 + w1 * st.dc1 + w2 * st.dc2;
    SurfaceSample sample;
    for (int c = 0; c < 3; ++c) {
      sample.position[c] = std::clamp(static_cast<float>(pos[c] - geom.center[c]), -half, half);
      sample.color[c] = std::clamp(static_cast<float>(col[c]), 0.0f, 1.0f);
    }
    field.samples.push_back(sample);
  }
  field.samples = canonical_order(std::move(field.samples));
  return {std::move(field), SemanticLabel{best_class}};
}

}  // namespace

std::set<VoxelIndex> voxelize(const Mesh& mesh, float voxel_size, const Eigen::Vector3f& origin) {
  if (!(voxel_size > 0.f)) throw DataError("voxel_size must be positive");
  mesh.validate();
  const double vs = static_cast<double>(voxel_size);
  const Eigen::Vector3d o = origin.cast<double>();
  std::set<VoxelIndex> occupied;
  for (const auto& [idx, faces] : candidate_map(mesh, vs, o)) {
    const VoxelGeom geom = voxel_geom(idx, vs, o);
    for (std::uint32_t f : faces) {
      const auto& t = mesh.triangles[f];
      ClipPolygon poly = clip_triangle_to_box(mesh_clip_vertex(mesh, t[0]),
                                              mesh_clip_vertex(mesh, t[1]),
                                              mesh_clip_vertex(mesh, t[2]), geom.lo, geom.hi);
      if (polygon_area(poly) > kAreaEps) {
        occupied.insert(idx);
        break;
      }
    }
  }
  return occupied;
}

std::pair<SigmaVoxfield, SemanticLabel> sample_voxfield(const Mesh& mesh, const VoxelIndex& voxel,
                                                        int n, std::uint64_t rng_seed,
                                                        float voxel_size,
                                                        const Eigen::Vector3f& origin) {
  mesh.validate();
  const double vs = static_cast<double>(voxel_size);
  const Eigen::Vector3d o = origin.cast<double>();
  const VoxelGeom geom = voxel_geom(voxel, vs, o);
  // AABB prefilter, then exact clip.
  std::vector<std::uint32_t> faces;
  for (std::uint32_t f = 0; f < mesh.triangles.size(); ++f) {
    const auto& t = mesh.triangles[f];
    Eigen::Vector3d lo = mesh.vertices[t[0]].position;
    Eigen::Vector3d hi = lo;
    for (int v = 1; v < 3; ++v) {
      lo = lo.cwiseMin(mesh.vertices[t[v]].position);
      hi = hi.cwiseMax(mesh.vertices[t[v]].position);
    }
    if ((lo.array() <= geom.hi.array()).all() && (hi.array() >= geom.lo.array()).all())
      faces.push_back(f);
  }
  const std::vector<ClippedFace> clips = clip_voxel(mesh, faces, geom);
  return sample_from_clips(clips, geom, voxel_size, n, Rng(rng_seed));
}

VoxfieldGrid build_grid(const Mesh& mesh, float voxel_size, int n, std::uint64_t rng_seed,
                        const Eigen::Vector3f& origin, int threads) {
  if (!(voxel_size > 0.f)) throw DataError("voxel_size must be positive");
  if (n < 1) throw DataError("samples per voxel must be >= 1");
  mesh.validate();
  const double vs = static_cast<double>(voxel_size);
  const Eigen::Vector3d o = origin.cast<double>();
  const auto cand = candidate_map(mesh, vs, o);

  std::vector<std::pair<VoxelIndex, const std::vector<std::uint32_t>*>> work;
  work.reserve(cand.size());
  for (const auto& [idx, faces] : cand) work.emplace_back(idx, &faces);

  struct Result {
    bool occupied = false;
    SigmaVoxfield field;
    SemanticLabel label;
  };
  std::vector<Result> results(work.size());
  parallel_for(0, work.size(), threads, [&](std::size_t w) {
    const auto& [idx, faces] = work[w];
    const VoxelGeom geom = voxel_geom(idx, vs, o);
    const std::vector<ClippedFace> clips = clip_voxel(mesh, *faces, geom);
    double area = 0.0;
    for (const ClippedFace& cf : clips) area += cf.area;
    if (area <= kAreaEps) return;
    auto [field, label] = sample_from_clips(clips, geom, voxel_size, n,
                                            Rng(derive_seed(rng_seed, idx.i, idx.j, idx.k)));
    results[w] = Result{true, std::move(field), label};
  });

  VoxfieldGrid grid(voxel_size, n, origin);
  for (std::size_t w = 0; w < work.size(); ++w)
    if (results[w].occupied) grid.insert(work[w].first, std::move(results[w].field), results[w].label);
  return grid;
}

}  // namespace vxf
