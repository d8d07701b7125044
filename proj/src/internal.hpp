#pragma once

#include <vector>

#include "bipgo/block_matrix.hpp"
#include "bipgo/types.hpp"

namespace bipgo::detail {

// Symmetric 3x3 inverse with a condition check (SingularDualBlock above 1e12).
Mat3 invert_spd_block(const Mat3& m, Index time_index);
std::vector<Mat3> invert_spd_blocks(const std::vector<Mat3>& blocks);

// Power operator over a shared node set: op(i,j) = sum_s B(s,i)^T inv(s)
// B(s,j), where cols_sc holds the transposed measurement blocks, one row per
// shared node s. Output is block symmetric by construction.
BlockMatrix33 power_operator_from_cols(const BlockMatrix33& cols_sc,
                                       const std::vector<Mat3>& inv);

}  // namespace bipgo::detail
