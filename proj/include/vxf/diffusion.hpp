#pragma once

#include <Eigen/Core>
#include <cmath>
#include <functional>
#include <vector>

#include "vxf/graph.hpp"
#include "vxf/rng.hpp"
#include "vxf/schedule.hpp"
#include "vxf/types.hpp"

namespace vxf {

// A bounded neighborhood of voxfields: the unit one diffusion pass works on.
struct LocalSet {
  std::vector<VoxelIndex> indices;
  Mat<float> tokens;                  // |X| x token_dim
  std::vector<SemanticLabel> semantics;
  Mat<double> centers;                // |X| x 3, meters
  std::vector<std::uint8_t> known_mask;  // nonzero = known (conditioning) token

  Eigen::Index count() const { return tokens.rows(); }

  void validate(int max_size = -1) const {
    const auto n = static_cast<std::size_t>(tokens.rows());
    if (indices.size() != n || semantics.size() != n ||
        static_cast<std::size_t>(centers.rows()) != n ||
        (!known_mask.empty() && known_mask.size() != n))
      throw DataError("local set fields have incongruent lengths");
    if (centers.cols() != 3) throw DataError("local set centers must be |X| x 3");
    if (max_size >= 0 && tokens.rows() > max_size)
      throw DataError("local set exceeds the maximum size " + std::to_string(max_size));
  }
};

// x_t = sqrt(alpha_bar_t) x0 + sqrt(1 - alpha_bar_t) eps, elementwise.
template <typename S>
Mat<S> q_sample(const Mat<S>& x0, int t, const Mat<S>& eps, const NoiseSchedule& schedule) {
  if (t < 1 || t > schedule.steps())
    throw DataError("q_sample step " + std::to_string(t) + " outside [1," +
                    std::to_string(schedule.steps()) + "]");
  if (x0.rows() != eps.rows() || x0.cols() != eps.cols())
    throw DataError("q_sample: x0 and eps shapes differ");
  const double ab = schedule.alpha_bar(t);
  return (std::sqrt(ab) * x0.template cast<double>() +
          std::sqrt(1.0 - ab) * eps.template cast<double>())
      .template cast<S>();
}

// One reverse step of the sample-prediction DDPM posterior:
//   mean = sqrt(ab_{t-1}) beta_t / (1-ab_t) * x0_hat
//        + sqrt(alpha_t) (1-ab_{t-1}) / (1-ab_t) * x_t
//   var  = beta_t (1-ab_{t-1}) / (1-ab_t)
// At t=1 the step is deterministic (no noise).
template <typename S>
Mat<S> ddpm_step(const Mat<S>& x_t, const Mat<S>& x0_hat, int t, const NoiseSchedule& schedule,
                 const Mat<S>& noise) {
  if (t < 1 || t > schedule.steps())
    throw DataError("ddpm_step step " + std::to_string(t) + " outside [1," +
                    std::to_string(schedule.steps()) + "]");
  if (x_t.rows() != x0_hat.rows() || x_t.cols() != x0_hat.cols())
    throw DataError("ddpm_step: x_t and x0_hat shapes differ");
  const double ab_t = schedule.alpha_bar(t);
  const double ab_prev = schedule.alpha_bar(t - 1);
  const double beta_t = schedule.beta(t);
  const double alpha_t = schedule.alpha(t);
  const double c0 = std::sqrt(ab_prev) * beta_t / (1.0 - ab_t);
  const double ct = std::sqrt(alpha_t) * (1.0 - ab_prev) / (1.0 - ab_t);
  Mat<double> mean =
      c0 * x0_hat.template cast<double>() + ct * x_t.template cast<double>();
  if (t > 1) {
    if (noise.rows() != x_t.rows() || noise.cols() != x_t.cols())
      throw DataError("ddpm_step: noise shape differs from x_t");
    const double sigma = std::sqrt(beta_t * (1.0 - ab_prev) / (1.0 - ab_t));
    mean += sigma * noise.template cast<double>();
  }
  return mean.template cast<S>();
}

// Classifier-free guidance: uncond + scale * (cond - uncond).
template <typename S>
Mat<S> cfg_combine(const Mat<S>& cond, const Mat<S>& uncond, S scale) {
  if (cond.rows() != uncond.rows() || cond.cols() != uncond.cols())
    throw DataError("cfg_combine: prediction shapes differ");
  return uncond + scale * (cond - uncond);
}

// Clean-sample predictor: (x_t, t, null_conditioning) -> x0_hat. The set
// context (semantics, centers, masks) is bound by the caller; passing
// null_conditioning = true must evaluate the unconditional branch.
using DenoiserFn = std::function<Mat<float>(const Mat<float>& x_t, int t, bool null_conditioning)>;

namespace noise_tag {
inline constexpr std::int64_t kInit = 1;     // x_T draw
inline constexpr std::int64_t kStep = 2;     // ddpm posterior noise
inline constexpr std::int64_t kKnown = 3;    // repaint known-row re-noising
inline constexpr std::int64_t kJump = 4;     // repaint resampling jumps
}  // namespace noise_tag

// Per-token Gaussian noise: row r streams from (seed, voxel index, tag, t, u),
// so permuting rows permutes noise rows and parallel schedules cannot
// reorder draws.
Mat<float> token_noise(std::uint64_t seed, const std::vector<VoxelIndex>& indices,
                       Eigen::Index token_dim, std::int64_t tag, int t, int u = 0);

struct SampleOptions {
  float guidance_scale = 4.0f;
  int resample_count = 1;              // repaint U; 1 = no jumps
  bool literal_known_overwrite = false;  // overwrite known rows with clean values
  std::uint64_t seed = 0;
};

// Full reverse chain from pure noise; final tokens clamped to [-1,1].
// Deterministic for a fixed seed.
Mat<float> sample(const DenoiserFn& denoiser, const std::vector<VoxelIndex>& indices,
                  Eigen::Index token_dim, const NoiseSchedule& schedule,
                  const SampleOptions& options);

// Repaint completion: rows flagged known in `known_mask` are re-noised known
// values at every step (or held fixed in literal mode); the rest follow the
// reverse process. Final known rows equal their inputs bit-exactly.
Mat<float> repaint_sample(const DenoiserFn& denoiser, const std::vector<VoxelIndex>& indices,
                          const Mat<float>& known_tokens,
                          const std::vector<std::uint8_t>& known_mask,
                          const NoiseSchedule& schedule, const SampleOptions& options);

}  // namespace vxf
