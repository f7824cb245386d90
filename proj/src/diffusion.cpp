#include "vxf/diffusion.hpp"

namespace vxf {

Mat<float> token_noise(std::uint64_t seed, const std::vector<VoxelIndex>& indices,
                       Eigen::Index token_dim, std::int64_t tag, int t, int u) {
  Mat<float> noise(static_cast<Eigen::Index>(indices.size()), token_dim);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    Rng rng(derive_seed(seed, indices[r].i, indices[r].j, indices[r].k, tag, t, u));
    for (Eigen::Index c = 0; c < token_dim; ++c)
      noise(static_cast<Eigen::Index>(r), c) = static_cast<float>(rng.normal());
  }
  return noise;
}

namespace {

Mat<float> predict_x0(const DenoiserFn& denoiser, const Mat<float>& x_t, int t,
                      float guidance_scale) {
  Mat<float> cond = denoiser(x_t, t, false);
  if (guidance_scale == 1.0f) return cond;
  Mat<float> uncond = denoiser(x_t, t, true);
  return cfg_combine(cond, uncond, guidance_scale);
}

}  // namespace

Mat<float> sample(const DenoiserFn& denoiser, const std::vector<VoxelIndex>& indices,
                  Eigen::Index token_dim, const NoiseSchedule& schedule,
                  const SampleOptions& options) {
  std::vector<std::uint8_t> no_known(indices.size(), 0);
  Mat<float> zeros = Mat<float>::Zero(static_cast<Eigen::Index>(indices.size()), token_dim);
  return repaint_sample(denoiser, indices, zeros, no_known, schedule, options);
}

Mat<float> repaint_sample(const DenoiserFn& denoiser, const std::vector<VoxelIndex>& indices,
                          const Mat<float>& known_tokens,
                          const std::vector<std::uint8_t>& known_mask,
                          const NoiseSchedule& schedule, const SampleOptions& options) {
  const Eigen::Index rows = known_tokens.rows();
  const Eigen::Index dim = known_tokens.cols();
  if (static_cast<std::size_t>(rows) != indices.size() || known_mask.size() != indices.size())
    throw DataError("repaint_sample: mask/token shape mismatch (" + std::to_string(rows) +
                    " tokens, " + std::to_string(indices.size()) + " indices, " +
                    std::to_string(known_mask.size()) + " mask entries)");
  const int T = schedule.steps();
  const int U = std::max(1, options.resample_count);

  auto overwrite_known = [&](Mat<float>& x, int level) {
    bool any = false;
    for (std::uint8_t m : known_mask) any |= m != 0;
    if (!any) return;
    Mat<float> replacement;
    if (options.literal_known_overwrite || level == 0) {
      replacement = known_tokens;
    } else {
      const Mat<float> eps = token_noise(options.seed, indices, dim, noise_tag::kKnown, level);
      replacement = q_sample(known_tokens, level, eps, schedule);
    }
    for (Eigen::Index r = 0; r < rows; ++r)
      if (known_mask[static_cast<std::size_t>(r)]) x.row(r) = replacement.row(r);
  };

  Mat<float> x = token_noise(options.seed, indices, dim, noise_tag::kInit, T + 1);
  for (int t = T; t >= 1; --t) {
    for (int u = 1; u <= U; ++u) {
      const Mat<float> x0_hat = predict_x0(denoiser, x, t, options.guidance_scale);
      Mat<float> noise;
      if (t > 1) noise = token_noise(options.seed, indices, dim, noise_tag::kStep, t, u);
      x = ddpm_step(x, x0_hat, t, schedule, noise);
      overwrite_known(x, t - 1);
      if (u < U) {
        // One forward step back to level t before re-denoising.
        const Mat<float> eps = token_noise(options.seed, indices, dim, noise_tag::kJump, t, u);
        const double beta_t = schedule.beta(t);
        x = (std::sqrt(1.0 - beta_t) * x.cast<double>() +
             std::sqrt(beta_t) * eps.cast<double>())
                .cast<float>();
      }
    }
  }
  return x.cwiseMax(-1.0f).cwiseMin(1.0f);
}

}  // namespace vxf
