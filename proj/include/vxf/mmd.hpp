#pragma once

#include <cstdint>

#include "vxf/graph.hpp"
#include "vxf/types.hpp"

namespace vxf {

// Unbiased squared maximum mean discrepancy between two token sets
// (rows = tokens), RBF kernel with the median-distance heuristic bandwidth
// over the pooled sample. Sets larger than max_tokens are subsampled with
// the given seed. Can be slightly negative (unbiased estimator).
double token_mmd(const Mat<float>& a, const Mat<float>& b, int max_tokens = 2000,
                 std::uint64_t subsample_seed = 0);

// All flattened tokens of a grid, one row per voxel.
Mat<float> grid_tokens(const VoxfieldGrid& grid);

}  // namespace vxf
