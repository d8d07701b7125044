#pragma once

#include "bipgo/block_matrix.hpp"

namespace bipgo {

struct EigenOptions {
  int count = 3;
  double tol = 1e-8;            // residual tolerance, relative to ||L||
  int max_iterations = 4000;    // subspace expansions before NoConvergence
  Index dense_threshold = 600;  // scalar dimension at or below which a dense solve is used
  int subspace = 96;            // basis columns kept before a thick restart
  MatX initial_guess;           // optional warm-start columns (3n x k)
};

struct EigenPairs {
  VecX values;  // ascending
  MatX vectors; // orthonormal, one column per value
  int iterations = 0;
};

// Smallest eigenpairs of a block-symmetric operator. Small problems go through
// a dense decomposition; larger ones through block subspace iteration on the
// Gershgorin-shifted operator sigma*I - L, so the wanted pairs become the
// largest and a three-fold degenerate kernel is resolved by the block.
EigenPairs smallest_eigpairs(const BlockMatrix33& l, const EigenOptions& opts = {});

}  // namespace bipgo
