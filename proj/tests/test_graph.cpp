#include <cmath>
#include <functional>
#include <vector>

#include "doctest.h"
#include "vxf/adam.hpp"
#include "vxf/checkpoint.hpp"
#include "vxf/graph.hpp"
#include "vxf/rng.hpp"

using namespace vxf;
using GraphD = Graph<double>;
using IdD = GraphD::ValueId;

namespace {

Mat<double> random_mat(Rng& rng, Eigen::Index r, Eigen::Index c, double scale = 1.0) {
  Mat<double> m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = scale * rng.normal();
  return m;
}

using Net = std::function<IdD(GraphD&, const std::vector<IdD>&)>;

// Central-difference gradient check of a scalar-valued network against the
// tape's analytic gradients. Returns the worst relative error over every
// entry of every input; entries below the 1e-4 absolute floor are compared
// absolutely (the FD noise floor makes true relative error meaningless for
// near-zero gradients).
double check_gradients(const Net& net, const std::vector<Mat<double>>& inputs, double h = 1e-5) {
  GraphD g;
  std::vector<IdD> leaves;
  for (const auto& m : inputs) leaves.push_back(g.input(m));
  const IdD loss = net(g, leaves);
  g.backward(loss);

  auto eval = [&](const std::vector<Mat<double>>& xs) {
    GraphD fg;
    std::vector<IdD> ls;
    for (const auto& m : xs) ls.push_back(fg.input(m));
    return fg.value(net(fg, ls))(0, 0);
  };

  double worst = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    for (Eigen::Index r = 0; r < inputs[i].rows(); ++r)
      for (Eigen::Index c = 0; c < inputs[i].cols(); ++c) {
        std::vector<Mat<double>> plus = inputs, minus = inputs;
        plus[i](r, c) += h;
        minus[i](r, c) -= h;
        const double fd = (eval(plus) - eval(minus)) / (2.0 * h);
        const double an = g.grad(leaves[i])(r, c);
        const double denom = std::max({std::abs(fd), std::abs(an), 1e-4});
        worst = std::max(worst, std::abs(fd - an) / denom);
      }
  }
  return worst;
}

}  // namespace

TEST_CASE("matmul with identity is the identity") {
  Rng rng(1);
  GraphD g;
  Mat<double> A = random_mat(rng, 4, 3);
  IdD a = g.input(A);
  IdD eye = g.input(Mat<double>::Identity(4, 4));
  IdD out = g.matmul(eye, a);
  CHECK((g.value(out) - A).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("softmax of a uniform row is uniform") {
  GraphD g;
  IdD a = g.input(Mat<double>::Constant(1, 5, 0.37));
  IdD s = g.softmax_rows(a);
  for (int c = 0; c < 5; ++c) CHECK(g.value(s)(0, c) == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("mse gradient equals 2(x-y)/N and matches finite differences") {
  Rng rng(2);
  Mat<double> X = random_mat(rng, 3, 4);
  Mat<double> Y = random_mat(rng, 3, 4);
  GraphD g;
  IdD x = g.input(X);
  IdD y = g.input(Y);
  IdD loss = g.mean_squared_error(x, y);
  g.backward(loss);
  const Mat<double> expected = 2.0 * (X - Y) / 12.0;
  CHECK((g.grad(x) - expected).cwiseAbs().maxCoeff() < 1e-12);

  const double err = check_gradients(
      [](GraphD& fg, const std::vector<IdD>& in) {
        return fg.mean_squared_error(in[0], in[1]);
      },
      {X, Y});
  CHECK(err < 1e-6);
}

TEST_CASE("sum loss gives a gradient of ones; detached branches stay zero") {
  Rng rng(3);
  GraphD g;
  IdD x = g.input(random_mat(rng, 3, 3));
  IdD detached = g.input(random_mat(rng, 2, 2));
  IdD loss = g.sum(x);
  g.backward(loss);
  CHECK((g.grad(x).array() == 1.0).all());
  CHECK((g.grad(detached).array() == 0.0).all());
}

TEST_CASE("non-scalar loss is rejected") {
  GraphD g;
  IdD x = g.input(Mat<double>::Zero(2, 2));
  CHECK_THROWS_AS(g.backward(x), DataError);
}

TEST_CASE("shape mismatches name both shapes") {
  GraphD g;
  IdD a = g.input(Mat<double>::Zero(2, 3));
  IdD b = g.input(Mat<double>::Zero(4, 5));
  CHECK_THROWS_WITH_AS(g.matmul(a, b), doctest::Contains("[2x3]"), DataError);
  CHECK_THROWS_WITH_AS(g.add(a, b), doctest::Contains("[4x5]"), DataError);
}

TEST_CASE("two-layer MLP gradients match finite differences at 1e-7") {
  Rng rng(4);
  const Mat<double> X = random_mat(rng, 5, 4);
  const Mat<double> W1 = random_mat(rng, 4, 8, 0.5);
  const Mat<double> b1 = random_mat(rng, 1, 8, 0.1);
  const Mat<double> W2 = random_mat(rng, 8, 3, 0.5);
  const Mat<double> b2 = random_mat(rng, 1, 3, 0.1);
  const Mat<double> Y = random_mat(rng, 5, 3);
  const double err = check_gradients(
      [](GraphD& g, const std::vector<IdD>& in) {
        IdD h = g.silu(g.add(g.matmul(in[0], in[1]), in[2]));
        IdD out = g.add(g.matmul(h, in[3]), in[4]);
        return g.mean_squared_error(out, in[5]);
      },
      {X, W1, b1, W2, b2, Y});
  CHECK(err < 1e-7);
}

TEST_CASE("two-layer MLP gradients in float stay within 1e-4 of the FD oracle") {
  using GraphF = Graph<float>;
  using IdF = GraphF::ValueId;
  Rng rng(5);
  const auto randf = [&](Eigen::Index r, Eigen::Index c) {
    Mat<float> m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < c; ++j) m(i, j) = static_cast<float>(0.5 * rng.normal());
    return m;
  };
  const Mat<float> X = randf(5, 4), W1 = randf(4, 8), b1 = randf(1, 8), W2 = randf(8, 3),
                   b2 = randf(1, 3), Y = randf(5, 3);

  // Analytic gradients from the 32-bit tape.
  GraphF g;
  IdF w1 = g.input(W1);
  IdF h = g.silu(g.add(g.matmul(g.input(X), w1), g.input(b1)));
  IdF out = g.add(g.matmul(h, g.input(W2)), g.input(b2));
  g.backward(g.mean_squared_error(out, g.input(Y)));

  // The FD oracle evaluates the same function at 64-bit precision.
  auto eval64 = [&](const Mat<double>& w1d) {
    GraphD fg;
    IdD hh = fg.silu(fg.add(fg.matmul(fg.input(X.cast<double>()), fg.input(w1d)),
                            fg.input(b1.cast<double>())));
    IdD oo = fg.add(fg.matmul(hh, fg.input(W2.cast<double>())), fg.input(b2.cast<double>()));
    return fg.value(fg.mean_squared_error(oo, fg.input(Y.cast<double>())))(0, 0);
  };
  double worst = 0.0;
  const double h64 = 1e-5;
  for (Eigen::Index r = 0; r < W1.rows(); ++r)
    for (Eigen::Index c = 0; c < W1.cols(); ++c) {
      Mat<double> plus = W1.cast<double>(), minus = W1.cast<double>();
      plus(r, c) += h64;
      minus(r, c) -= h64;
      const double fd = (eval64(plus) - eval64(minus)) / (2.0 * h64);
      const double an = g.grad(w1)(r, c);
      const double denom = std::max({std::abs(fd), std::abs(an), 1e-4});
      worst = std::max(worst, std::abs(fd - an) / denom);
    }
  CHECK(worst < 1e-4);
}

TEST_CASE("every primitive passes randomized finite-difference checks") {
  Rng rng(6);
  const int trials = 100;
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const Eigen::Index m = 2 + t % 3, n = 2 + (t / 3) % 3, k = 2 + (t / 9) % 3;
    // matmul (both plain and transposed-b forms)
    worst = std::max(worst, check_gradients(
                                [t](GraphD& g, const std::vector<IdD>& in) {
                                  return g.sum(g.matmul(in[0], in[1], t % 2 == 1));
                                },
                                {random_mat(rng, m, n),
                                 t % 2 == 1 ? random_mat(rng, k, n) : random_mat(rng, n, k)}));
    // add / mul, including row broadcast
    worst = std::max(worst, check_gradients(
                                [](GraphD& g, const std::vector<IdD>& in) {
                                  return g.sum(g.mul(g.add(in[0], in[1]), in[2]));
                                },
                                {random_mat(rng, m, n), random_mat(rng, 1, n),
                                 random_mat(rng, m, n)}));
    worst = std::max(worst, check_gradients(
                                [](GraphD& g, const std::vector<IdD>& in) {
                                  return g.sum(g.mul(in[0], in[1]));
                                },
                                {random_mat(rng, m, n), random_mat(rng, 1, n)}));
    // scale, silu, softmax, layer_norm
    worst = std::max(worst, check_gradients(
                                [](GraphD& g, const std::vector<IdD>& in) {
                                  return g.sum(g.silu(g.scale(in[0], 1.7)));
                                },
                                {random_mat(rng, m, n)}));
    worst = std::max(worst, check_gradients(
                                [](GraphD& g, const std::vector<IdD>& in) {
                                  return g.sum(g.mul(g.softmax_rows(in[0]), in[1]));
                                },
                                {random_mat(rng, m, n), random_mat(rng, m, n)}));
    worst = std::max(worst, check_gradients(
                                [](GraphD& g, const std::vector<IdD>& in) {
                                  return g.sum(g.mul(g.layer_norm_rows(in[0]), in[1]));
                                },
                                {random_mat(rng, m, n), random_mat(rng, m, n)}));
    // embed_lookup
    {
      std::vector<int> ids;
      for (Eigen::Index r = 0; r < m; ++r)
        ids.push_back(static_cast<int>(rng.uniform_int(0, 3)));
      worst = std::max(worst, check_gradients(
                                  [ids](GraphD& g, const std::vector<IdD>& in) {
                                    return g.sum(g.mul(g.embed_lookup(in[0], ids), in[1]));
                                  },
                                  {random_mat(rng, 4, n), random_mat(rng, m, n)}));
    }
    // masked_fill feeding softmax
    {
      MaskMatrix keep(m, m);
      for (Eigen::Index r = 0; r < m; ++r)
        for (Eigen::Index c = 0; c < m; ++c) keep(r, c) = r == c || rng.uniform() < 0.6;
      worst = std::max(worst, check_gradients(
                                  [keep](GraphD& g, const std::vector<IdD>& in) {
                                    IdD filled = g.masked_fill(in[0], keep, -1e9);
                                    return g.sum(g.mul(g.softmax_rows(filled), in[1]));
                                  },
                                  {random_mat(rng, m, m), random_mat(rng, m, m)}));
    }
    // slice / concat
    worst = std::max(worst, check_gradients(
                                [n](GraphD& g, const std::vector<IdD>& in) {
                                  IdD left = g.slice_cols(in[0], 0, n / 2);
                                  IdD right = g.slice_cols(in[0], n / 2, n - n / 2);
                                  return g.sum(g.mul(g.concat_cols({right, left}), in[1]));
                                },
                                {random_mat(rng, m, n), random_mat(rng, m, n)}));
    // mean + mse
    worst = std::max(worst, check_gradients(
                                [](GraphD& g, const std::vector<IdD>& in) {
                                  return g.mean_squared_error(g.mean(in[0]),
                                                              g.mean(in[1]));
                                },
                                {random_mat(rng, m, n), random_mat(rng, m, n)}));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("a second backward after zero_grads reproduces identical gradients") {
  Rng rng(7);
  GraphD g;
  IdD x = g.input(random_mat(rng, 4, 4));
  IdD w = g.input(random_mat(rng, 4, 4));
  IdD loss = g.mean_squared_error(g.silu(g.matmul(x, w)), g.input(random_mat(rng, 4, 4)));
  g.backward(loss);
  const Mat<double> g1 = g.grad(w);
  g.zero_grads();
  g.backward(loss);
  CHECK((g.grad(w) - g1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("adam: zero gradient leaves parameters unchanged but advances time") {
  Params<double> params{{"w", Mat<double>::Constant(2, 2, 1.5)}};
  Params<double> grads{{"w", Mat<double>::Zero(2, 2)}};
  AdamState<double> state;
  adam_step(params, grads, state, AdamConfig<double>{});
  CHECK(state.step == 1);
  CHECK((params["w"].array() == 1.5).all());
}

TEST_CASE("adam first step follows the hand-evaluated recurrence") {
  // t=1: m_hat = g, v_hat = g^2, update = -lr * g / (|g| + eps).
  const double lr = 1e-3, eps = 1e-8;
  Mat<double> g0(1, 3);
  g0 << 0.5, -2.0, 0.001;
  Params<double> params{{"w", Mat<double>::Zero(1, 3)}};
  Params<double> grads{{"w", g0}};
  AdamState<double> state;
  AdamConfig<double> cfg;
  cfg.lr = lr;
  cfg.eps = eps;
  adam_step(params, grads, state, cfg);
  for (int c = 0; c < 3; ++c) {
    const double expected = -lr * g0(0, c) / (std::abs(g0(0, c)) + eps);
    CHECK(params["w"](0, c) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("adam is deterministic and validates shapes") {
  Params<double> p1{{"w", Mat<double>::Constant(2, 2, 0.3)}};
  Params<double> p2 = p1;
  Params<double> grads{{"w", Mat<double>::Constant(2, 2, 0.7)}};
  AdamState<double> s1, s2;
  for (int i = 0; i < 5; ++i) {
    adam_step(p1, grads, s1, AdamConfig<double>{});
    adam_step(p2, grads, s2, AdamConfig<double>{});
  }
  CHECK((p1["w"] - p2["w"]).cwiseAbs().maxCoeff() == 0.0);

  Params<double> bad{{"w", Mat<double>::Zero(3, 3)}};
  CHECK_THROWS_AS(adam_step(p1, bad, s1, AdamConfig<double>{}), DataError);
}

TEST_CASE("checkpoint round trip preserves names, shapes, and f32 data") {
  Rng rng(8);
  Params<float> params;
  params["block0.attn.wq"] = random_mat(rng, 4, 4).cast<float>();
  params["embed.sem"] = random_mat(rng, 21, 8).cast<float>();
  params["head.bias"] = random_mat(rng, 1, 6).cast<float>();
  const auto bytes = serialize_params(params);
  const Params<float> back = deserialize_params<float>(bytes);
  REQUIRE(back.size() == params.size());
  for (const auto& [name, mat] : params) {
    REQUIRE(back.count(name) == 1);
    CHECK((back.at(name) - mat).cwiseAbs().maxCoeff() == 0.0f);
  }
  CHECK(serialize_params(back) == bytes);

  auto corrupt = bytes;
  corrupt[0] = 'Q';
  CHECK_THROWS_WITH_AS(deserialize_params<float>(corrupt), doctest::Contains("VXCK"), DataError);
}
