#pragma once

#include <Eigen/Core>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "vxf/types.hpp"

namespace vxf {

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

using MaskMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Reverse-mode tape over dense matrices. Nodes are appended in forward
// order; backward() replays the recorded rules in reverse. One tape is
// single-writer; independent tapes may run concurrently.
template <typename S>
class Graph {
 public:
  struct ValueId {
    std::int32_t idx = -1;
  };

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  ValueId input(Mat<S> value) { return push(std::move(value), {}); }

  const Mat<S>& value(ValueId id) const { return node(id).value; }
  const Mat<S>& grad(ValueId id) const { return node(id).grad; }
  std::size_t size() const { return nodes_.size(); }

  // ---- primitives ----

  ValueId matmul(ValueId a, ValueId b, bool transpose_b = false) {
    const Mat<S>& A = value(a);
    const Mat<S>& B = value(b);
    const Eigen::Index inner_b = transpose_b ? B.cols() : B.rows();
    if (A.cols() != inner_b)
      fail_shapes("matmul", A, B);
    Mat<S> out = transpose_b ? Mat<S>(A * B.transpose()) : Mat<S>(A * B);
    ValueId id = push(std::move(out), {a, b});
    record([this, a, b, id, transpose_b] {
      const Mat<S>& g = node(id).grad;
      if (transpose_b) {
        node(a).grad.noalias() += g * node(b).value;
        node(b).grad.noalias() += g.transpose() * node(a).value;
      } else {
        node(a).grad.noalias() += g * node(b).value.transpose();
        node(b).grad.noalias() += node(a).value.transpose() * g;
      }
    });
    return id;
  }

  // b may be a 1 x n row vector, broadcast over a's rows.
  ValueId add(ValueId a, ValueId b) {
    const Mat<S>& A = value(a);
    const Mat<S>& B = value(b);
    const bool broadcast = B.rows() == 1 && A.rows() != 1 && B.cols() == A.cols();
    if (!broadcast && (A.rows() != B.rows() || A.cols() != B.cols()))
      fail_shapes("add", A, B);
    Mat<S> out = broadcast ? Mat<S>(A.rowwise() + B.row(0)) : Mat<S>(A + B);
    ValueId id = push(std::move(out), {a, b});
    record([this, a, b, id, broadcast] {
      const Mat<S>& g = node(id).grad;
      node(a).grad += g;
      if (broadcast)
        node(b).grad += g.colwise().sum();
      else
        node(b).grad += g;
    });
    return id;
  }

  // Elementwise product; b may be a broadcast 1 x n row.
  ValueId mul(ValueId a, ValueId b) {
    const Mat<S>& A = value(a);
    const Mat<S>& B = value(b);
    const bool broadcast = B.rows() == 1 && A.rows() != 1 && B.cols() == A.cols();
    if (!broadcast && (A.rows() != B.rows() || A.cols() != B.cols()))
      fail_shapes("mul", A, B);
    Mat<S> out = broadcast
                     ? Mat<S>(A.array().rowwise() * B.row(0).array())
                     : Mat<S>(A.array() * B.array());
    ValueId id = push(std::move(out), {a, b});
    record([this, a, b, id, broadcast] {
      const Mat<S>& g = node(id).grad;
      if (broadcast) {
        node(a).grad.array() += g.array().rowwise() * node(b).value.row(0).array();
        node(b).grad += (g.array() * node(a).value.array()).matrix().colwise().sum();
      } else {
        node(a).grad.array() += g.array() * node(b).value.array();
        node(b).grad.array() += g.array() * node(a).value.array();
      }
    });
    return id;
  }

  ValueId scale(ValueId a, S factor) {
    Mat<S> out = value(a) * factor;
    ValueId id = push(std::move(out), {a});
    record([this, a, id, factor] { node(a).grad += node(id).grad * factor; });
    return id;
  }

  // Row-wise softmax with max-subtraction; masked entries should be filled
  // with a large negative value beforehand so they underflow to exact zero.
  ValueId softmax_rows(ValueId a) {
    const Mat<S>& A = value(a);
    Mat<S> out(A.rows(), A.cols());
    for (Eigen::Index r = 0; r < A.rows(); ++r) {
      const S m = A.row(r).maxCoeff();
      out.row(r) = (A.row(r).array() - m).exp();
      out.row(r) /= out.row(r).sum();
    }
    ValueId id = push(std::move(out), {a});
    record([this, a, id] {
      const Mat<S>& y = node(id).value;
      const Mat<S>& g = node(id).grad;
      for (Eigen::Index r = 0; r < y.rows(); ++r) {
        const S dot = y.row(r).dot(g.row(r));
        node(a).grad.row(r).array() +=
            y.row(r).array() * (g.row(r).array() - dot);
      }
    });
    return id;
  }

  // Per-row normalization to zero mean, unit variance; no learned affine
  // (conditioning layers supply scale/shift).
  ValueId layer_norm_rows(ValueId a, S eps = static_cast<S>(1e-5)) {
    const Mat<S>& A = value(a);
    const S n = static_cast<S>(A.cols());
    Mat<S> out(A.rows(), A.cols());
    Mat<S> inv_sigma(A.rows(), 1);
    for (Eigen::Index r = 0; r < A.rows(); ++r) {
      const S mu = A.row(r).mean();
      const S var = (A.row(r).array() - mu).square().sum() / n;
      const S is = S(1) / std::sqrt(var + eps);
      inv_sigma(r, 0) = is;
      out.row(r) = (A.row(r).array() - mu) * is;
    }
    ValueId id = push(std::move(out), {a});
    record([this, a, id, inv_sigma, n] {
      const Mat<S>& y = node(id).value;
      const Mat<S>& g = node(id).grad;
      for (Eigen::Index r = 0; r < y.rows(); ++r) {
        const S mean_g = g.row(r).mean();
        const S mean_gy = (g.row(r).array() * y.row(r).array()).sum() / n;
        node(a).grad.row(r).array() +=
            inv_sigma(r, 0) * (g.row(r).array() - mean_g - y.row(r).array() * mean_gy);
      }
    });
    return id;
  }

  ValueId silu(ValueId a) {
    const Mat<S>& A = value(a);
    Mat<S> sig = (S(1) / (S(1) + (-A.array()).exp())).matrix();
    Mat<S> out = (A.array() * sig.array()).matrix();
    ValueId id = push(std::move(out), {a});
    record([this, a, id, sig] {
      const Mat<S>& g = node(id).grad;
      const Mat<S>& x = node(a).value;
      node(a).grad.array() +=
          g.array() * sig.array() * (S(1) + x.array() * (S(1) - sig.array()));
    });
    return id;
  }

  // Gathers one table row per id; gradients scatter-add back.
  ValueId embed_lookup(ValueId table, std::vector<int> ids) {
    const Mat<S>& T = value(table);
    Mat<S> out(static_cast<Eigen::Index>(ids.size()), T.cols());
    for (std::size_t r = 0; r < ids.size(); ++r) {
      if (ids[r] < 0 || ids[r] >= T.rows())
        throw DataError("embed_lookup id " + std::to_string(ids[r]) + " out of range [0," +
                        std::to_string(T.rows()) + ")");
      out.row(static_cast<Eigen::Index>(r)) = T.row(ids[r]);
    }
    ValueId id = push(std::move(out), {table});
    record([this, table, id, ids = std::move(ids)] {
      const Mat<S>& g = node(id).grad;
      for (std::size_t r = 0; r < ids.size(); ++r)
        node(table).grad.row(ids[r]) += g.row(static_cast<Eigen::Index>(r));
    });
    return id;
  }

  // Entries where keep is false are replaced by fill (no gradient flows).
  ValueId masked_fill(ValueId a, const MaskMatrix& keep, S fill) {
    const Mat<S>& A = value(a);
    if (keep.rows() != A.rows() || keep.cols() != A.cols())
      throw DataError("masked_fill mask is " + shape_str(keep.rows(), keep.cols()) +
                      " but value is " + shape_str(A.rows(), A.cols()));
    Mat<S> out = keep.select(A, Mat<S>::Constant(A.rows(), A.cols(), fill));
    ValueId id = push(std::move(out), {a});
    record([this, a, id, keep] {
      node(a).grad += keep.select(node(id).grad, Mat<S>::Zero(keep.rows(), keep.cols()));
    });
    return id;
  }

  ValueId slice_cols(ValueId a, Eigen::Index start, Eigen::Index count) {
    const Mat<S>& A = value(a);
    if (start < 0 || count < 0 || start + count > A.cols())
      throw DataError("slice_cols [" + std::to_string(start) + "," +
                      std::to_string(start + count) + ") out of range for " +
                      shape_str(A.rows(), A.cols()));
    Mat<S> out = A.middleCols(start, count);
    ValueId id = push(std::move(out), {a});
    record([this, a, id, start, count] {
      node(a).grad.middleCols(start, count) += node(id).grad;
    });
    return id;
  }

  ValueId concat_cols(const std::vector<ValueId>& parts) {
    if (parts.empty()) throw DataError("concat_cols needs at least one part");
    const Eigen::Index rows = value(parts[0]).rows();
    Eigen::Index cols = 0;
    for (ValueId p : parts) {
      if (value(p).rows() != rows) fail_shapes("concat_cols", value(parts[0]), value(p));
      cols += value(p).cols();
    }
    Mat<S> out(rows, cols);
    Eigen::Index at = 0;
    for (ValueId p : parts) {
      out.middleCols(at, value(p).cols()) = value(p);
      at += value(p).cols();
    }
    ValueId id = push(std::move(out), parts);
    record([this, id, parts] {
      Eigen::Index at = 0;
      for (ValueId p : parts) {
        node(p).grad += node(id).grad.middleCols(at, node(p).value.cols());
        at += node(p).value.cols();
      }
    });
    return id;
  }

  ValueId sum(ValueId a) {
    Mat<S> out(1, 1);
    out(0, 0) = value(a).sum();
    ValueId id = push(std::move(out), {a});
    record([this, a, id] {
      node(a).grad.array() += node(id).grad(0, 0);
    });
    return id;
  }

  ValueId mean(ValueId a) {
    const S inv = S(1) / static_cast<S>(value(a).size());
    return scale(sum(a), inv);
  }

  ValueId mean_squared_error(ValueId pred, ValueId target) {
    const Mat<S>& P = value(pred);
    const Mat<S>& T = value(target);
    if (P.rows() != T.rows() || P.cols() != T.cols()) fail_shapes("mean_squared_error", P, T);
    const S inv = S(1) / static_cast<S>(P.size());
    Mat<S> out(1, 1);
    out(0, 0) = (P - T).squaredNorm() * inv;
    ValueId id = push(std::move(out), {pred, target});
    record([this, pred, target, id, inv] {
      const S g = node(id).grad(0, 0);
      const Mat<S> diff = node(pred).value - node(target).value;
      node(pred).grad += (S(2) * inv * g) * diff;
      node(target).grad -= (S(2) * inv * g) * diff;
    });
    return id;
  }

  // ---- engine ----

  // Accumulates gradients for every node reachable from loss; leaves off the
  // path keep zeros. Rerunning after zero_grads reproduces identical values.
  void backward(ValueId loss) {
    const Mat<S>& L = value(loss);
    if (L.rows() != 1 || L.cols() != 1)
      throw DataError("backward needs a scalar loss, got " + shape_str(L.rows(), L.cols()));
    node(loss).grad(0, 0) = S(1);
    for (auto it = rules_.rbegin(); it != rules_.rend(); ++it) (*it)();
  }

  void zero_grads() {
    for (auto& n : nodes_) n.grad.setZero();
  }

 private:
  struct Node {
    Mat<S> value;
    Mat<S> grad;
    std::vector<std::int32_t> parents;
  };

  Node& node(ValueId id) { return nodes_[static_cast<std::size_t>(id.idx)]; }
  const Node& node(ValueId id) const { return nodes_[static_cast<std::size_t>(id.idx)]; }

  // Parents always precede the node they feed, so creation order is a
  // topological order and the tape is acyclic by construction.
  ValueId push(Mat<S> value, const std::vector<ValueId>& parents) {
    Node n;
    n.grad = Mat<S>::Zero(value.rows(), value.cols());
    n.value = std::move(value);
    for (ValueId p : parents) {
      if (p.idx < 0 || p.idx >= static_cast<std::int32_t>(nodes_.size()))
        throw DataError("tape parent out of range");
      n.parents.push_back(p.idx);
    }
    nodes_.push_back(std::move(n));
    return ValueId{static_cast<std::int32_t>(nodes_.size() - 1)};
  }

  void record(std::function<void()> rule) { rules_.push_back(std::move(rule)); }

  static std::string shape_str(Eigen::Index r, Eigen::Index c) {
    return "[" + std::to_string(r) + "x" + std::to_string(c) + "]";
  }

  [[noreturn]] static void fail_shapes(const char* op, const Mat<S>& a, const Mat<S>& b) {
    throw DataError(std::string(op) + ": incompatible shapes " + shape_str(a.rows(), a.cols()) +
                    " and " + shape_str(b.rows(), b.cols()));
  }

  std::vector<Node> nodes_;
  std::vector<std::function<void()>> rules_;
};

}  // namespace vxf
