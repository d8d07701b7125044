#include "bipgo/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "bipgo/errors.hpp"

namespace bipgo {

namespace {

EigenPairs dense_smallest(const BlockMatrix33& l, int count) {
  Eigen::SelfAdjointEigenSolver<MatX> eig(l.to_dense());
  if (eig.info() != Eigen::Success) {
    throw NoConvergence("dense eigensolver failed", 0.0);
  }
  EigenPairs out;
  out.values = eig.eigenvalues().head(count);
  out.vectors = eig.eigenvectors().leftCols(count);
  return out;
}

// Orthonormalizes x against basis (two projection passes), dropping columns
// that collapse; lost columns are replaced by random directions.
MatX orthonormalize_against(const MatX& basis, MatX x, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  MatX out(x.rows(), x.cols());
  Index kept = 0;
  for (Index c = 0; c < x.cols(); ++c) {
    VecX v = x.col(c);
    for (int attempt = 0; attempt < 3; ++attempt) {
      for (int pass = 0; pass < 2; ++pass) {
        if (basis.cols() > 0) v -= basis * (basis.transpose() * v);
        if (kept > 0) {
          v -= out.leftCols(kept) * (out.leftCols(kept).transpose() * v);
        }
      }
      const double n = v.norm();
      if (n > 1e-10) {
        out.col(kept++) = v / n;
        break;
      }
      v = VecX::NullaryExpr(x.rows(), [&](Index) { return gauss(rng); });
    }
  }
  return out.leftCols(kept);
}

EigenPairs iterative_smallest(const BlockMatrix33& l, const EigenOptions& opts) {
  const Index n = 3 * l.block_rows();
  const int nev = opts.count;
  const int block = nev + 1;
  const double bound = std::max(l.norm_bound(), 1e-300);
  const double shift = 1.01 * bound;  // sigma*I - L is PSD by Gershgorin
  const double tol_abs = opts.tol * bound;
  const Index max_basis = std::min<Index>(n, std::max<Index>(opts.subspace, 3 * block));
  const Index keep = std::min<Index>(max_basis - block, std::max<Index>(24, 2 * block));

  auto apply_shifted = [&](const MatX& x) -> MatX { return shift * x - l.apply(x); };

  std::mt19937_64 rng(0x5eed5eedULL);
  std::normal_distribution<double> gauss(0.0, 1.0);

  MatX seed(n, block);
  seed.setZero();
  Index given = 0;
  if (opts.initial_guess.size() > 0 && opts.initial_guess.rows() == n) {
    given = std::min<Index>(opts.initial_guess.cols(), block);
    seed.leftCols(given) = opts.initial_guess.leftCols(given);
  }
  for (Index c = given; c < block; ++c) {
    seed.col(c) = VecX::NullaryExpr(n, [&](Index) { return gauss(rng); });
  }

  MatX basis = orthonormalize_against(MatX(n, 0), seed, rng);
  MatX image = apply_shifted(basis);
  MatX h = basis.transpose() * image;

  for (int it = 1; it <= opts.max_iterations; ++it) {
    MatX hsym = 0.5 * (h + h.transpose());
    Eigen::SelfAdjointEigenSolver<MatX> small(hsym);
    const Index s = basis.cols();
    // Ritz values of the shifted operator, largest first.
    VecX theta = small.eigenvalues().reverse();
    MatX order = small.eigenvectors().rowwise().reverse();

    MatX ritz = basis * order.leftCols(std::min<Index>(s, keep));
    MatX ritz_image = image * order.leftCols(std::min<Index>(s, keep));

    if (s >= nev) {
      double worst = 0.0;
      for (int k = 0; k < nev; ++k) {
        worst = std::max(worst, (ritz_image.col(k) - theta(k) * ritz.col(k)).norm());
      }
      if (worst <= tol_abs) {
        // theta is descending in the shifted operator, so shift - theta is
        // already ascending in L.
        EigenPairs out;
        out.values = VecX(nev);
        out.vectors = MatX(n, nev);
        for (int k = 0; k < nev; ++k) {
          out.values(k) = shift - theta(k);
          out.vectors.col(k) = ritz.col(k);
        }
        out.iterations = it;
        return out;
      }
    }

    if (s + block > max_basis) {  // thick restart on the best Ritz vectors
      basis = ritz;
      image = ritz_image;
      h = theta.head(basis.cols()).asDiagonal();
    }

    // Expand with the images of the current leading Ritz vectors.
    MatX expand = image.leftCols(0);
    if (s >= block) {
      expand = ritz_image.leftCols(block);
    } else {
      expand = image;
    }
    MatX fresh = orthonormalize_against(basis, expand, rng);
    if (fresh.cols() == 0) {
      fresh = orthonormalize_against(
          basis, MatX::NullaryExpr(n, block, [&](Index, Index) { return gauss(rng); }),
          rng);
    }
    MatX fresh_image = apply_shifted(fresh);
    const Index old = basis.cols();
    basis.conservativeResize(n, old + fresh.cols());
    basis.rightCols(fresh.cols()) = fresh;
    image.conservativeResize(n, old + fresh_image.cols());
    image.rightCols(fresh_image.cols()) = fresh_image;
    MatX hnew(basis.cols(), basis.cols());
    hnew.topLeftCorner(old, old) = h;
    hnew.rightCols(fresh.cols()) = basis.transpose() * fresh_image;
    hnew.bottomLeftCorner(fresh.cols(), old) =
        hnew.topRightCorner(old, fresh.cols()).transpose();
    h = std::move(hnew);
  }
  throw NoConvergence("eigensolver: residual above tolerance after iteration cap",
                      tol_abs);
}

}  // namespace

EigenPairs smallest_eigpairs(const BlockMatrix33& l, const EigenOptions& opts) {
  if (l.block_rows() != l.block_cols()) {
    throw InvalidInput("smallest_eigpairs: operator must be square");
  }
  if (!l.is_block_symmetric()) {
    throw InvalidInput("smallest_eigpairs: operator must be block symmetric");
  }
  const Index n = 3 * l.block_rows();
  const int count = static_cast<int>(std::min<Index>(opts.count, n));
  if (count <= 0) throw InvalidInput("smallest_eigpairs: count must be positive");
  if (n <= opts.dense_threshold || n <= 3 * (count + 1)) {
    return dense_smallest(l, count);
  }
  EigenOptions o = opts;
  o.count = count;
  return iterative_smallest(l, o);
}

}  // namespace bipgo
