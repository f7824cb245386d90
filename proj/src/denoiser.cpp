#include "vxf/denoiser.hpp"

namespace vxf {

namespace {
constexpr double kMinWavelength = 0.5;
constexpr double kMaxWavelength = 256.0;
constexpr double kTwoPi = 6.283185307179586476925286766559;
}  // namespace

Eigen::VectorXd sinusoidal_pe_3d(const Eigen::Vector3d& center, int pe_dim) {
  if (pe_dim < 6 || pe_dim % 6 != 0)
    throw DataError("pe_dim " + std::to_string(pe_dim) + " is not divisible by 6");
  const int pairs = pe_dim / 6;
  Eigen::VectorXd pe(pe_dim);
  for (int axis = 0; axis < 3; ++axis) {
    for (int j = 0; j < pairs; ++j) {
      const double frac = pairs == 1 ? 0.0 : static_cast<double>(j) / (pairs - 1);
      const double wavelength = kMinWavelength * std::pow(kMaxWavelength / kMinWavelength, frac);
      const double phase = kTwoPi / wavelength * center[axis];
      pe[axis * 2 * pairs + 2 * j] = std::sin(phase);
      pe[axis * 2 * pairs + 2 * j + 1] = std::cos(phase);
    }
  }
  return pe;
}

Mat<double> pe_matrix(const Mat<double>& centers, int pe_dim) {
  if (centers.cols() != 3) throw DataError("pe_matrix expects |X| x 3 centers");
  const Eigen::RowVector3d centroid = centers.colwise().mean();
  Mat<double> pe(centers.rows(), pe_dim);
  for (Eigen::Index r = 0; r < centers.rows(); ++r)
    pe.row(r) = sinusoidal_pe_3d((centers.row(r) - centroid).transpose(), pe_dim).transpose();
  return pe;
}

MaskMatrix build_attention_mask(const Mat<double>& centers, double radius) {
  if (!(radius > 0.0)) throw DataError("attention radius must be positive");
  if (centers.cols() != 3) throw DataError("build_attention_mask expects |X| x 3 centers");
  const Eigen::Index n = centers.rows();
  const double r_sq = radius * radius;
  MaskMatrix mask(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    mask(a, a) = true;
    for (Eigen::Index b = a + 1; b < n; ++b) {
      const bool visible = (centers.row(a) - centers.row(b)).squaredNorm() <= r_sq;
      mask(a, b) = visible;
      mask(b, a) = visible;
    }
  }
  return mask;
}

Eigen::VectorXd timestep_embedding(int t, int dim) {
  if (dim < 2) throw DataError("timestep embedding dim must be >= 2");
  const int half = dim / 2;
  Eigen::VectorXd emb = Eigen::VectorXd::Zero(dim);
  for (int i = 0; i < half; ++i) {
    const double freq = std::exp(-std::log(10000.0) * static_cast<double>(i) /
                                 std::max(1, half - 1));
    emb[i] = std::sin(t * freq);
    emb[half + i] = std::cos(t * freq);
  }
  return emb;
}

template <typename S>
Denoiser<S> Denoiser<S>::init(const DenoiserConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Denoiser<S> model;
  model.config = cfg;
  Rng rng(derive_seed(seed, 0xd37));
  auto normal_mat = [&](int rows, int cols, double stddev) {
    Mat<S> m(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) m(r, c) = static_cast<S>(stddev * rng.normal());
    return m;
  };
  auto dense = [&](const std::string& name, int in, int out) {
    model.params[name + ".w"] = normal_mat(in, out, 1.0 / std::sqrt(static_cast<double>(in)));
    model.params[name + ".b"] = Mat<S>::Zero(1, out);
  };
  auto dense_zero = [&](const std::string& name, int in, int out) {
    model.params[name + ".w"] = Mat<S>::Zero(in, out);
    model.params[name + ".b"] = Mat<S>::Zero(1, out);
  };

  const int d = cfg.model_dim;
  dense("tok_proj", cfg.token_dim, d);
  dense("pe_proj", cfg.pe_dim, d);
  model.params["sem_embed"] = normal_mat(cfg.class_count, d, 0.02);
  dense("t_mlp1", cfg.timestep_embedding_dim, d);
  dense("t_mlp2", d, d);
  for (int b = 0; b < cfg.layer_count; ++b) {
    const std::string bk = "block" + std::to_string(b);
    dense(bk + ".attn.q", d, d);
    dense(bk + ".attn.k", d, d);
    dense(bk + ".attn.v", d, d);
    dense(bk + ".attn.o", d, d);
    dense(bk + ".mlp.fc1", d, cfg.mlp_hidden);
    dense(bk + ".mlp.fc2", cfg.mlp_hidden, d);
    dense_zero(bk + ".ada", d, 6 * d);  // identity block at init
  }
  dense_zero("final.ada", d, 2 * d);
  dense("final.out", d, cfg.token_dim);
  return model;
}

template <typename S>
typename Denoiser<S>::ValueId Denoiser<S>::modulate(Graph<S>& g, ValueId x, ValueId scale_row,
                                                    ValueId shift_row) const {
  ValueId ones = g.input(Mat<S>::Ones(1, g.value(scale_row).cols()));
  return g.add(g.mul(x, g.add(scale_row, ones)), shift_row);
}

template <typename S>
typename Denoiser<S>::ValueId Denoiser<S>::attention(Graph<S>& g, const ParamIds& p, ValueId h,
                                                     const MaskMatrix& mask, int block) const {
  const std::string bk = "block" + std::to_string(block);
  ValueId q = g.add(g.matmul(h, p.at(bk + ".attn.q.w")), p.at(bk + ".attn.q.b"));
  ValueId k = g.add(g.matmul(h, p.at(bk + ".attn.k.w")), p.at(bk + ".attn.k.b"));
  ValueId v = g.add(g.matmul(h, p.at(bk + ".attn.v.w")), p.at(bk + ".attn.v.b"));
  const S inv_sqrt_dh = static_cast<S>(1.0 / std::sqrt(static_cast<double>(config.head_dim)));
  std::vector<ValueId> heads;
  for (int hd = 0; hd < config.head_count; ++hd) {
    const Eigen::Index at = static_cast<Eigen::Index>(hd) * config.head_dim;
    ValueId qh = g.slice_cols(q, at, config.head_dim);
    ValueId kh = g.slice_cols(k, at, config.head_dim);
    ValueId vh = g.slice_cols(v, at, config.head_dim);
    ValueId scores = g.scale(g.matmul(qh, kh, /*transpose_b=*/true), inv_sqrt_dh);
    ValueId filled = g.masked_fill(scores, mask, static_cast<S>(-1e9));
    ValueId weights = g.softmax_rows(filled);
    heads.push_back(g.matmul(weights, vh));
  }
  ValueId cat = g.concat_cols(heads);
  return g.add(g.matmul(cat, p.at(bk + ".attn.o.w")), p.at(bk + ".attn.o.b"));
}

template <typename S>
typename Denoiser<S>::ValueId Denoiser<S>::forward(Graph<S>& g, const ParamIds& p,
                                                   const Mat<S>& x_t, int t,
                                                   const std::vector<SemanticLabel>& semantics,
                                                   const Mat<double>& centers,
                                                   bool null_conditioning) const {
  if (x_t.cols() != config.token_dim)
    throw DataError("denoiser got token dim " + std::to_string(x_t.cols()) + ", expects " +
                    std::to_string(config.token_dim));
  if (static_cast<std::size_t>(x_t.rows()) != semantics.size() || x_t.rows() != centers.rows())
    throw DataError("denoiser input lists have incongruent lengths");

  // Token embedding: linear(token) + linear(pe) + semantic embedding.
  ValueId tokens = g.input(x_t);
  ValueId h = g.add(g.matmul(tokens, p.at("tok_proj.w")), p.at("tok_proj.b"));
  const Mat<S> pe = pe_matrix(centers, config.pe_dim).template cast<S>();
  ValueId pe_emb = g.add(g.matmul(g.input(pe), p.at("pe_proj.w")), p.at("pe_proj.b"));
  h = g.add(h, pe_emb);
  std::vector<int> ids(semantics.size());
  for (std::size_t i = 0; i < semantics.size(); ++i)
    ids[i] = (null_conditioning || semantics[i].is_null()) ? config.class_count - 1
                                                           : semantics[i].class_id;
  h = g.add(h, g.embed_lookup(p.at("sem_embed"), ids));

  // Timestep conditioning trunk.
  const Mat<S> temb =
      timestep_embedding(t, config.timestep_embedding_dim).transpose().template cast<S>();
  ValueId c = g.silu(g.add(g.matmul(g.input(temb), p.at("t_mlp1.w")), p.at("t_mlp1.b")));
  c = g.silu(g.add(g.matmul(c, p.at("t_mlp2.w")), p.at("t_mlp2.b")));

  const MaskMatrix mask = build_attention_mask(centers, config.attention_radius);
  const int d = config.model_dim;
  for (int b = 0; b < config.layer_count; ++b) {
    const std::string bk = "block" + std::to_string(b);
    ValueId mod = g.add(g.matmul(c, p.at(bk + ".ada.w")), p.at(bk + ".ada.b"));
    ValueId shift1 = g.slice_cols(mod, 0, d);
    ValueId scale1 = g.slice_cols(mod, d, d);
    ValueId gate1 = g.slice_cols(mod, 2 * d, d);
    ValueId shift2 = g.slice_cols(mod, 3 * d, d);
    ValueId scale2 = g.slice_cols(mod, 4 * d, d);
    ValueId gate2 = g.slice_cols(mod, 5 * d, d);

    ValueId attn_in = modulate(g, g.layer_norm_rows(h), scale1, shift1);
    h = g.add(h, g.mul(attention(g, p, attn_in, mask, b), gate1));

    ValueId mlp_in = modulate(g, g.layer_norm_rows(h), scale2, shift2);
    const std::string mk = bk + ".mlp";
    ValueId mlp = g.silu(g.add(g.matmul(mlp_in, p.at(mk + ".fc1.w")), p.at(mk + ".fc1.b")));
    mlp = g.add(g.matmul(mlp, p.at(mk + ".fc2.w")), p.at(mk + ".fc2.b"));
    h = g.add(h, g.mul(mlp, gate2));
  }

  ValueId fmod = g.add(g.matmul(c, p.at("final.ada.w")), p.at("final.ada.b"));
  ValueId out_in = modulate(g, g.layer_norm_rows(h), g.slice_cols(fmod, d, d),
                            g.slice_cols(fmod, 0, d));
  return g.add(g.matmul(out_in, p.at("final.out.w")), p.at("final.out.b"));
}

template <typename S>
typename Graph<S>::ValueId training_loss(Graph<S>& g,
                                         const typename Denoiser<S>::ParamIds& p,
                                         const Denoiser<S>& model,
                                         const std::vector<TrainExample<S>>& examples,
                                         const NoiseSchedule& schedule) {
  if (examples.empty()) throw DataError("training_loss: empty batch");
  typename Graph<S>::ValueId total{};
  bool first = true;
  for (const TrainExample<S>& ex : examples) {
    ex.set.validate();
    const Mat<S> x_t = q_sample(ex.set.tokens.template cast<S>().eval(), ex.t, ex.eps, schedule);
    typename Graph<S>::ValueId pred = model.forward(g, p, x_t, ex.t, ex.set.semantics,
                                                    ex.set.centers, ex.semantics_dropped);
    typename Graph<S>::ValueId target = g.input(ex.set.tokens.template cast<S>().eval());
    typename Graph<S>::ValueId loss = g.mean_squared_error(pred, target);
    total = first ? loss : g.add(total, loss);
    first = false;
  }
  return g.scale(total, static_cast<S>(1.0 / static_cast<double>(examples.size())));
}

template <typename S>
double train_step(Denoiser<S>& model, const std::vector<LocalSet>& batch,
                  const NoiseSchedule& schedule, AdamState<S>& opt_state,
                  const AdamConfig<S>& adam_cfg, double sem_drop_prob, Rng& rng) {
  if (batch.empty()) throw DataError("train_step: empty batch");
  std::vector<TrainExample<S>> examples;
  examples.reserve(batch.size());
  for (const LocalSet& set : batch) {
    TrainExample<S> ex;
    ex.set = set;
    ex.t = static_cast<int>(rng.uniform_int(1, schedule.steps()));
    ex.eps.resize(set.tokens.rows(), set.tokens.cols());
    for (Eigen::Index r = 0; r < ex.eps.rows(); ++r)
      for (Eigen::Index c = 0; c < ex.eps.cols(); ++c)
        ex.eps(r, c) = static_cast<S>(rng.normal());
    ex.semantics_dropped = rng.uniform() < sem_drop_prob;
    examples.push_back(std::move(ex));
  }

  Graph<S> g;
  const auto param_ids = model.insert_params(g);
  const auto loss = training_loss<S>(g, param_ids, model, examples, schedule);
  g.backward(loss);

  Params<S> grads;
  for (const auto& [name, id] : param_ids) grads[name] = g.grad(id);
  adam_step(model.params, grads, opt_state, adam_cfg);
  return static_cast<double>(g.value(loss)(0, 0));
}

DenoiserFn bind_denoiser(const Denoiser<float>& model, std::vector<SemanticLabel> semantics,
                         Mat<double> centers) {
  return [&model, semantics = std::move(semantics), centers = std::move(centers)](
             const Mat<float>& x_t, int t, bool null_conditioning) {
    return model.predict(x_t, t, semantics, centers, null_conditioning);
  };
}

template class Denoiser<float>;
template class Denoiser<double>;
template typename Graph<float>::ValueId training_loss<float>(
    Graph<float>&, const typename Denoiser<float>::ParamIds&, const Denoiser<float>&,
    const std::vector<TrainExample<float>>&, const NoiseSchedule&);
template typename Graph<double>::ValueId training_loss<double>(
    Graph<double>&, const typename Denoiser<double>::ParamIds&, const Denoiser<double>&,
    const std::vector<TrainExample<double>>&, const NoiseSchedule&);
template double train_step<float>(Denoiser<float>&, const std::vector<LocalSet>&,
                                  const NoiseSchedule&, AdamState<float>&,
                                  const AdamConfig<float>&, double, Rng&);
template double train_step<double>(Denoiser<double>&, const std::vector<LocalSet>&,
                                   const NoiseSchedule&, AdamState<double>&,
                                   const AdamConfig<double>&, double, Rng&);

}  // namespace vxf
