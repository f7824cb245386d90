#pragma once

#include <Eigen/Core>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "vxf/adam.hpp"
#include "vxf/diffusion.hpp"
#include "vxf/graph.hpp"
#include "vxf/rng.hpp"
#include "vxf/schedule.hpp"
#include "vxf/types.hpp"

namespace vxf {

struct DenoiserConfig {
  int token_dim = 120;  // 6n
  int model_dim = 64;
  int layer_count = 2;
  int head_count = 4;
  int head_dim = 16;
  int mlp_hidden = 256;
  int timestep_embedding_dim = 64;
  int pe_dim = 48;  // 3D positional encoding width, divisible by 6
  double attention_radius = 3.0;  // meters
  int class_count = kClassCount + 1;  // taxonomy + null

  // Paper-scale preset: 1024-dim, 12 layers, 8 heads of 128.
  static DenoiserConfig large(int token_dim) {
    DenoiserConfig c;
    c.token_dim = token_dim;
    c.model_dim = 1024;
    c.layer_count = 12;
    c.head_count = 8;
    c.head_dim = 128;
    c.mlp_hidden = 4096;
    c.timestep_embedding_dim = 256;
    return c;
  }

  void validate() const {
    if (model_dim != head_count * head_dim)
      throw ConfigError("model_dim must equal head_count * head_dim");
    if (!(attention_radius > 0.0)) throw ConfigError("attention_radius must be positive");
    if (pe_dim % 6 != 0) throw ConfigError("pe_dim must be divisible by 6");
    if (token_dim % 6 != 0) throw ConfigError("token_dim must be 6*n");
    if (token_dim < 6 || model_dim < 1 || layer_count < 1 || mlp_hidden < 1 ||
        timestep_embedding_dim < 2)
      throw ConfigError("denoiser dimensions must be positive");
  }
};

// Sinusoidal 3D positional encoding: per axis, pe_dim/6 (sin, cos) pairs at
// geometric frequencies, wavelengths 0.5 m up to 256 m, highest frequency
// first. The input must already be centroid-relative.
Eigen::VectorXd sinusoidal_pe_3d(const Eigen::Vector3d& center, int pe_dim);

// Rows of per-center encodings, coordinates taken relative to the set's
// centroid so rigid translations leave the encoding unchanged.
Mat<double> pe_matrix(const Mat<double>& centers, int pe_dim);

// mask(a,b) = true iff the centers are within radius of each other.
// Symmetric with a true diagonal.
MaskMatrix build_attention_mask(const Mat<double>& centers, double radius);

// Sinusoidal timestep embedding (half sines, half cosines).
Eigen::VectorXd timestep_embedding(int t, int dim);

// Transformer denoiser over a local token set, predicting clean tokens.
// Timestep conditioning enters through per-block adaptive normalization
// (scale/shift plus a residual gate, all zero-initialized so every block
// starts as identity); semantic labels add a learned per-token embedding,
// with index class_count-1 reserved for the null label.
template <typename S>
class Denoiser {
 public:
  using ValueId = typename Graph<S>::ValueId;
  using ParamIds = std::map<std::string, ValueId>;

  DenoiserConfig config;
  Params<S> params;

  static Denoiser init(const DenoiserConfig& cfg, std::uint64_t seed);

  ParamIds insert_params(Graph<S>& g) const {
    ParamIds ids;
    for (const auto& [name, mat] : params) ids.emplace(name, g.input(mat));
    return ids;
  }

  ValueId forward(Graph<S>& g, const ParamIds& p, const Mat<S>& x_t, int t,
                  const std::vector<SemanticLabel>& semantics, const Mat<double>& centers,
                  bool null_conditioning) const;

  // Grad-free convenience wrapper around forward.
  Mat<S> predict(const Mat<S>& x_t, int t, const std::vector<SemanticLabel>& semantics,
                 const Mat<double>& centers, bool null_conditioning) const {
    Graph<S> g;
    const ParamIds p = insert_params(g);
    return g.value(forward(g, p, x_t, t, semantics, centers, null_conditioning));
  }

 private:
  ValueId modulate(Graph<S>& g, ValueId x, ValueId scale_row, ValueId shift_row) const;
  ValueId attention(Graph<S>& g, const ParamIds& p, ValueId h, const MaskMatrix& mask,
                    int block) const;
};

// One fixed training example: everything train_step draws stochastically,
// frozen so gradient checks can replay it exactly.
template <typename S>
struct TrainExample {
  LocalSet set;
  int t = 1;
  Mat<S> eps;
  bool semantics_dropped = false;
};

// Mean over examples of the per-example token MSE between the prediction
// and the clean tokens.
template <typename S>
typename Graph<S>::ValueId training_loss(Graph<S>& g,
                                         const typename Denoiser<S>::ParamIds& p,
                                         const Denoiser<S>& model,
                                         const std::vector<TrainExample<S>>& examples,
                                         const NoiseSchedule& schedule);

// Draws (t, eps, dropout) per set, runs forward/backward, applies one Adam
// update. Returns the batch loss. Dropout replaces every label of a set by
// null with probability sem_drop_prob.
template <typename S>
double train_step(Denoiser<S>& model, const std::vector<LocalSet>& batch,
                  const NoiseSchedule& schedule, AdamState<S>& opt_state,
                  const AdamConfig<S>& adam_cfg, double sem_drop_prob, Rng& rng);

// Binds a trained float model to a sampling context.
DenoiserFn bind_denoiser(const Denoiser<float>& model, std::vector<SemanticLabel> semantics,
                         Mat<double> centers);

// Closed-form posterior mean of x0 for x0 ~ N(mu, sigma2 I) observed through
// the forward process at step t; verifies samplers without training.
template <typename S>
Mat<S> oracle_gaussian_denoiser(const Mat<S>& x_t, int t, const NoiseSchedule& schedule,
                                double mu, double sigma2) {
  const double ab = schedule.alpha_bar(t);
  const double denom = ab * sigma2 + (1.0 - ab);
  return ((std::sqrt(ab) * sigma2 * x_t.template cast<double>().array() + (1.0 - ab) * mu) /
          denom)
      .template cast<S>();
}

extern template class Denoiser<float>;
extern template class Denoiser<double>;
extern template typename Graph<float>::ValueId training_loss<float>(
    Graph<float>&, const typename Denoiser<float>::ParamIds&, const Denoiser<float>&,
    const std::vector<TrainExample<float>>&, const NoiseSchedule&);
extern template typename Graph<double>::ValueId training_loss<double>(
    Graph<double>&, const typename Denoiser<double>::ParamIds&, const Denoiser<double>&,
    const std::vector<TrainExample<double>>&, const NoiseSchedule&);
extern template double train_step<float>(Denoiser<float>&, const std::vector<LocalSet>&,
                                         const NoiseSchedule&, AdamState<float>&,
                                         const AdamConfig<float>&, double, Rng&);
extern template double train_step<double>(Denoiser<double>&, const std::vector<LocalSet>&,
                                          const NoiseSchedule&, AdamState<double>&,
                                          const AdamConfig<double>&, double, Rng&);

}  // namespace vxf
