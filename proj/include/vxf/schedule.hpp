#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "vxf/types.hpp"

namespace vxf {

// beta/alpha-bar tables driving the forward and reverse processes.
// t is 1-based; alpha_bar(0) == 1 by convention.
class NoiseSchedule {
 public:
  // Linear beta interpolation from beta_start to beta_end over T steps.
  static NoiseSchedule linear(int T, double beta_start, double beta_end) {
    if (T < 1) throw DataError("schedule needs at least one step");
    if (!(beta_start > 0.0) || !(beta_end < 1.0) || beta_start > beta_end)
      throw DataError("schedule betas must satisfy 0 < beta_start <= beta_end < 1");
    NoiseSchedule s;
    s.beta_.resize(static_cast<std::size_t>(T));
    s.alpha_bar_.resize(static_cast<std::size_t>(T) + 1);
    s.alpha_bar_[0] = 1.0;
    for (int t = 1; t <= T; ++t) {
      const double frac = T == 1 ? 0.0 : static_cast<double>(t - 1) / static_cast<double>(T - 1);
      const double beta = beta_start + (beta_end - beta_start) * frac;
      s.beta_[static_cast<std::size_t>(t - 1)] = beta;
      s.alpha_bar_[static_cast<std::size_t>(t)] =
          s.alpha_bar_[static_cast<std::size_t>(t - 1)] * (1.0 - beta);
    }
    return s;
  }

  // The 1000-step baseline range rescaled so total noise is comparable at
  // any T.
  static NoiseSchedule linear_scaled(int T) {
    if (T < 1) throw DataError("schedule needs at least one step");
    const double scale = 1000.0 / static_cast<double>(T);
    return linear(T, std::min(1e-4 * scale, 0.5), std::min(0.02 * scale, 0.999));
  }

  int steps() const { return static_cast<int>(beta_.size()); }

  double beta(int t) const {
    check_step(t);
    return beta_[static_cast<std::size_t>(t - 1)];
  }

  double alpha(int t) const { return 1.0 - beta(t); }

  // Cumulative product of (1 - beta); defined for t in [0, T].
  double alpha_bar(int t) const {
    if (t < 0 || t > steps())
      throw DataError("alpha_bar step " + std::to_string(t) + " outside [0," +
                      std::to_string(steps()) + "]");
    return alpha_bar_[static_cast<std::size_t>(t)];
  }

 private:
  void check_step(int t) const {
    if (t < 1 || t > steps())
      throw DataError("schedule step " + std::to_string(t) + " outside [1," +
                      std::to_string(steps()) + "]");
  }

  std::vector<double> beta_;
  std::vector<double> alpha_bar_;
};

}  // namespace vxf
