#pragma once

#include <cmath>
#include <map>
#include <string>

#include "vxf/graph.hpp"

namespace vxf {

// Named parameter set; std::map keeps iteration (and serialization)
// deterministic.
template <typename S>
using Params = std::map<std::string, Mat<S>>;

template <typename S>
struct AdamState {
  Params<S> m, v;
  long step = 0;
};

template <typename S>
struct AdamConfig {
  S lr = static_cast<S>(5e-4);
  S beta1 = static_cast<S>(0.9);
  S beta2 = static_cast<S>(0.999);
  S eps = static_cast<S>(1e-8);
};

// Standard Adam update with bias correction. Missing state slots are
// zero-initialized on first use.
template <typename S>
void adam_step(Params<S>& params, const Params<S>& grads, AdamState<S>& state,
               const AdamConfig<S>& cfg) {
  state.step += 1;
  const S t = static_cast<S>(state.step);
  const S bc1 = S(1) - std::pow(cfg.beta1, t);
  const S bc2 = S(1) - std::pow(cfg.beta2, t);
  for (auto& [name, p] : params) {
    auto git = grads.find(name);
    if (git == grads.end()) throw DataError("adam_step: no gradient for parameter " + name);
    const Mat<S>& g = git->second;
    if (g.rows() != p.rows() || g.cols() != p.cols())
      throw DataError("adam_step: gradient shape mismatch for " + name);
    Mat<S>& m = state.m.try_emplace(name, Mat<S>::Zero(p.rows(), p.cols())).first->second;
    Mat<S>& v = state.v.try_emplace(name, Mat<S>::Zero(p.rows(), p.cols())).first->second;
    m = cfg.beta1 * m + (S(1) - cfg.beta1) * g;
    v = cfg.beta2 * v + (S(1) - cfg.beta2) * g.cwiseProduct(g);
    const Mat<S> m_hat = m / bc1;
    const Mat<S> v_hat = v / bc2;
    p.array() -= cfg.lr * m_hat.array() / (v_hat.array().sqrt() + cfg.eps);
  }
}

}  // namespace vxf
