#include <cmath>

#include "vxf/mesh.hpp"
#include "vxf/rng.hpp"

namespace vxf {

void SceneSpec::validate() const {
  if (!(extent > 0.0) || !(road_width > 0.0) || !(lane_stripe_period > 0.0))
    throw DataError("scene lengths must be positive");
  if (building_count < 0 || pole_count < 0)
    throw DataError("scene object counts must be >= 0");
}

namespace {

Eigen::Vector3f jittered(const Eigen::Vector3f& base, Rng& rng, float amount = 0.06f) {
  Eigen::Vector3f c;
  for (int i = 0; i < 3; ++i)
    c[i] = std::clamp(base[i] + static_cast<float>(rng.uniform(-amount, amount)), 0.0f, 1.0f);
  return c;
}

struct Builder {
  Mesh mesh;

  std::uint32_t vertex(double x, double y, double z, const Eigen::Vector3f& color) {
    mesh.vertices.push_back(MeshVertex{Eigen::Vector3d(x, y, z), color});
    return static_cast<std::uint32_t>(mesh.vertices.size() - 1);
  }

  void tri(std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint8_t cls) {
    mesh.triangles.push_back({a, b, c});
    mesh.face_semantics.push_back(SemanticLabel{cls});
  }

  // Horizontal rectangle [x0,x1]x[y0,y1] at height z.
  void quad_xy(double x0, double x1, double y0, double y1, double z, const Eigen::Vector3f& color,
               std::uint8_t cls) {
    const std::uint32_t a = vertex(x0, y0, z, color);
    const std::uint32_t b = vertex(x1, y0, z, color);
    const std::uint32_t c = vertex(x1, y1, z, color);
    const std::uint32_t d = vertex(x0, y1, z, color);
    tri(a, b, c, cls);
    tri(a, c, d, cls);
  }

  // Axis-aligned box from z0 to z1: four walls plus a roof (no floor).
  void box(double x0, double x1, double y0, double y1, double z0, double z1,
           const Eigen::Vector3f& color, std::uint8_t cls) {
    const std::uint32_t v000 = vertex(x0, y0, z0, color);
    const std::uint32_t v100 = vertex(x1, y0, z0, color);
    const std::uint32_t v110 = vertex(x1, y1, z0, color);
    const std::uint32_t v010 = vertex(x0, y1, z0, color);
    const std::uint32_t v001 = vertex(x0, y0, z1, color);
    const std::uint32_t v101 = vertex(x1, y0, z1, color);
    const std::uint32_t v111 = vertex(x1, y1, z1, color);
    const std::uint32_t v011 = vertex(x0, y1, z1, color);
    tri(v000, v100, v101, cls);
    tri(v000, v101, v001, cls);
    tri(v100, v110, v111, cls);
    tri(v100, v111, v101, cls);
    tri(v110, v010, v011, cls);
    tri(v110, v011, v111, cls);
    tri(v010, v000, v001, cls);
    tri(v010, v001, v011, cls);
    tri(v001, v101, v111, cls);
    tri(v001, v111, v011, cls);
  }
};

}  // namespace

Mesh synth_scene(const SceneSpec& spec) {
  spec.validate();
  Rng rng(derive_seed(spec.rng_seed, 0x5ce7e));
  Builder b;

  const double half = spec.extent / 2.0;
  const double road_half = std::min(spec.road_width / 2.0, half);

  // Per-scene class palette.
  const Eigen::Vector3f road_color = jittered({0.25f, 0.25f, 0.27f}, rng);
  const Eigen::Vector3f terrain_color = jittered({0.35f, 0.45f, 0.25f}, rng);
  const Eigen::Vector3f lane_color = jittered({0.95f, 0.9f, 0.1f}, rng, 0.04f);
  const Eigen::Vector3f pole_color = jittered({0.45f, 0.45f, 0.5f}, rng);

  // Ground: road strip along x, terrain on both sides.
  b.quad_xy(-half, half, -road_half, road_half, 0.0, road_color, cls::kRoad);
  if (road_half < half) {
    b.quad_xy(-half, half, road_half, half, 0.0, terrain_color, cls::kTerrain);
    b.quad_xy(-half, half, -half, -road_half, 0.0, terrain_color, cls::kTerrain);
  }

  // Center-line stripes, slightly above the road surface.
  const double stripe_len = spec.lane_stripe_period / 2.0;
  const double stripe_half_w = 0.09;
  for (double x = -half; x + stripe_len <= half + 1e-9; x += spec.lane_stripe_period)
    b.quad_xy(x, x + stripe_len, -stripe_half_w, stripe_half_w, 0.002, lane_color, cls::kRoadLane);

  // Buildings on both sides of the road, clear of it.
  const double lot_min = road_half + 1.0;
  for (int i = 0; i < spec.building_count; ++i) {
    const double depth = rng.uniform(2.0, 5.0);
    const double width = rng.uniform(2.5, 6.0);
    const double height = rng.uniform(3.0, 8.0);
    const double side = (i % 2 == 0) ? 1.0 : -1.0;
    const double ymin = lot_min + rng.uniform(0.0, std::max(0.1, half - lot_min - depth));
    const double xmin = rng.uniform(-half, half - width);
    const double y0 = side > 0 ? ymin : -(ymin + depth);
    const Eigen::Vector3f color = jittered({0.55f, 0.45f, 0.4f}, rng, 0.15f);
    b.box(xmin, xmin + width, y0, y0 + depth, 0.0, height, color, cls::kBuilding);
  }

  // Poles along the road edges.
  for (int i = 0; i < spec.pole_count; ++i) {
    const double x = rng.uniform(-half + 0.5, half - 0.5);
    const double side = (i % 2 == 0) ? 1.0 : -1.0;
    const double y = side * (road_half + 0.4);
    const double h = rng.uniform(3.0, 5.0);
    const double r = 0.05;
    b.box(x - r, x + r, y - r, y + r, 0.0, h, pole_color, cls::kPole);
  }

  b.mesh.validate();
  return b.mesh;
}

}  // namespace vxf
