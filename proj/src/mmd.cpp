#include "vxf/mmd.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "vxf/rng.hpp"
#include "vxf/token.hpp"

namespace vxf {

namespace {

Mat<float> subsample_rows(const Mat<float>& m, int max_rows, Rng rng) {
  if (m.rows() <= max_rows) return m;
  std::vector<Eigen::Index> ids(static_cast<std::size_t>(m.rows()));
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<Eigen::Index>(i);
  for (int i = 0; i < max_rows; ++i) {
    const auto j = static_cast<std::size_t>(
        rng.uniform_int(i, static_cast<std::int64_t>(ids.size()) - 1));
    std::swap(ids[static_cast<std::size_t>(i)], ids[j]);
  }
  Mat<float> out(max_rows, m.cols());
  for (int i = 0; i < max_rows; ++i) out.row(i) = m.row(ids[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace

double token_mmd(const Mat<float>& a, const Mat<float>& b, int max_tokens,
                 std::uint64_t subsample_seed) {
  if (a.rows() < 2 || b.rows() < 2)
    throw DataError("token_mmd needs at least two tokens per side");
  if (a.cols() != b.cols()) throw DataError("token_mmd: dimension mismatch between corpora");
  const Rng base(derive_seed(subsample_seed, 0x33d));
  const Mat<float> x = subsample_rows(a, max_tokens, base.derive(1));
  const Mat<float> y = subsample_rows(b, max_tokens, base.derive(2));

  const Eigen::Index n = x.rows(), m = y.rows();
  Mat<double> pooled(n + m, x.cols());
  pooled.topRows(n) = x.cast<double>();
  pooled.bottomRows(m) = y.cast<double>();

  // Median pairwise distance over the pooled sample sets the bandwidth.
  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>((n + m) * (n + m - 1) / 2));
  for (Eigen::Index i = 0; i < n + m; ++i)
    for (Eigen::Index j = i + 1; j < n + m; ++j)
      dists.push_back((pooled.row(i) - pooled.row(j)).norm());
  std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2),
                   dists.end());
  double sigma = dists[dists.size() / 2];
  if (!(sigma > 0.0)) sigma = 1.0;  // identical corpora
  const double gamma = 1.0 / (2.0 * sigma * sigma);

  auto kernel_mean_offdiag = [&](const Mat<double>& u) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < u.rows(); ++i)
      for (Eigen::Index j = i + 1; j < u.rows(); ++j)
        sum += std::exp(-gamma * (u.row(i) - u.row(j)).squaredNorm());
    return 2.0 * sum / (static_cast<double>(u.rows()) * (u.rows() - 1));
  };
  const Mat<double> xd = pooled.topRows(n);
  const Mat<double> yd = pooled.bottomRows(m);
  double cross = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      cross += std::exp(-gamma * (xd.row(i) - yd.row(j)).squaredNorm());
  cross /= static_cast<double>(n) * static_cast<double>(m);

  return kernel_mean_offdiag(xd) + kernel_mean_offdiag(yd) - 2.0 * cross;
}

Mat<float> grid_tokens(const VoxfieldGrid& grid) {
  if (grid.empty()) throw DataError("grid_tokens: empty grid");
  Mat<float> tokens(static_cast<Eigen::Index>(grid.size()), 6 * grid.n());
  Eigen::Index r = 0;
  for (const auto& [idx, entry] : grid.entries())
    tokens.row(r++) = flatten_token<float>(entry.field, grid.voxel_size()).transpose();
  return tokens;
}

}  // namespace vxf
