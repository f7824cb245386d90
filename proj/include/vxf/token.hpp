#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <string>
#include <vector>

#include "vxf/types.hpp"

namespace vxf {

namespace detail {

// Total order: squared distance to the voxel center, then lexicographic on
// (x,y,z), then on (r,g,b). Makes the token layout fully deterministic.
inline bool sample_before(const SurfaceSample& a, const SurfaceSample& b) {
  const double da = a.position.cast<double>().squaredNorm();
  const double db = b.position.cast<double>().squaredNorm();
  if (da != db) return da < db;
  for (int c = 0; c < 3; ++c)
    if (a.position[c] != b.position[c]) return a.position[c] < b.position[c];
  for (int c = 0; c < 3; ++c)
    if (a.color[c] != b.color[c]) return a.color[c] < b.color[c];
  return false;
}

}  // namespace detail

inline std::vector<SurfaceSample> canonical_order(std::vector<SurfaceSample> samples) {
  std::sort(samples.begin(), samples.end(), detail::sample_before);
  return samples;
}

inline bool is_canonically_ordered(const std::vector<SurfaceSample>& samples) {
  return std::is_sorted(samples.begin(), samples.end(), detail::sample_before);
}

// psi: [x1,y1,z1,r1,g1,b1, ...], positions scaled by 2/v_s into [-1,1],
// colors mapped 2c-1 into [-1,1]. Expects v in canonical order.
template <typename S = float>
Eigen::VectorX<S> flatten_token(const SigmaVoxfield& v, float voxel_size) {
  const S pos_scale = static_cast<S>(2.0 / static_cast<double>(voxel_size));
  Eigen::VectorX<S> out(6 * v.n());
  for (int i = 0; i < v.n(); ++i) {
    const SurfaceSample& s = v.samples[static_cast<std::size_t>(i)];
    for (int c = 0; c < 3; ++c) out[6 * i + c] = static_cast<S>(s.position[c]) * pos_scale;
    for (int c = 0; c < 3; ++c) out[6 * i + 3 + c] = static_cast<S>(2) * static_cast<S>(s.color[c]) - static_cast<S>(1);
  }
  return out;
}

// Inverse of flatten_token. Positions clamp to [-v_s/2, v_s/2], colors to
// [0,1]; the result is re-ordered canonically so reverse-diffusion overshoot
// still decodes to a valid voxfield.
template <typename S = float>
SigmaVoxfield unflatten_token(const Eigen::Ref<const Eigen::VectorX<S>>& t, float voxel_size) {
  if (t.size() % 6 != 0)
    throw DataError("token dimension " + std::to_string(t.size()) + " is not a multiple of 6");
  const int n = static_cast<int>(t.size() / 6);
  const float half = 0.5f * voxel_size;
  const S half_s = static_cast<S>(0.5) * static_cast<S>(voxel_size);
  SigmaVoxfield v;
  v.samples.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    SurfaceSample& s = v.samples[static_cast<std::size_t>(i)];
    for (int c = 0; c < 3; ++c) {
      const float p = static_cast<float>(t[6 * i + c] * half_s);
      s.position[c] = std::clamp(p, -half, half);
      const float col = static_cast<float>(static_cast<S>(0.5) * (t[6 * i + 3 + c] + static_cast<S>(1)));
      s.color[c] = std::clamp(col, 0.0f, 1.0f);
    }
  }
  v.samples = canonical_order(std::move(v.samples));
  return v;
}

// Dimension-checked variant used when decoding against a known grid n.
template <typename S = float>
SigmaVoxfield unflatten_token_checked(const Eigen::Ref<const Eigen::VectorX<S>>& t, float voxel_size,
                                      int expected_n) {
  if (t.size() != 6 * expected_n)
    throw DataError("token dimension " + std::to_string(t.size()) + " does not match 6*n = " +
                    std::to_string(6 * expected_n));
  return unflatten_token<S>(t, voxel_size);
}

}  // namespace vxf
