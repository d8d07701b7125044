#include "doctest.h"

#include "bipgo/block_matrix.hpp"
#include "test_support.hpp"

using namespace bipgo;

TEST_SUITE_BEGIN("block_matrix");

namespace {

BlockMatrix33 random_block_matrix(std::mt19937_64& rng, Index rows, Index cols,
                                  double density) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  BlockMatrix33::Builder b(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      if (u(rng) < density) b.add(i, j, testsup::haar_rotation(rng) * u(rng));
    }
  }
  return b.build();
}

}  // namespace

TEST_CASE("builder accumulates duplicates and sorts") {
  BlockMatrix33::Builder b(2, 3);
  b.add(0, 2, Mat3::Identity());
  b.add(0, 0, 2.0 * Mat3::Identity());
  b.add(0, 2, Mat3::Identity());
  BlockMatrix33 m = b.build();
  CHECK(m.nnz_blocks() == 2);
  CHECK(m.row(0)[0].col == 0);
  CHECK(m.row(0)[1].col == 2);
  CHECK((*m.find(0, 2) - 2.0 * Mat3::Identity()).norm() == 0.0);
  CHECK(m.find(1, 1) == nullptr);
}

TEST_CASE("apply matches dense multiply") {
  auto rng = testsup::rng(41);
  const BlockMatrix33 m = random_block_matrix(rng, 7, 5, 0.4);
  const MatX x = MatX::Random(15, 4);
  CHECK((m.apply(x) - m.to_dense() * x).norm() < 1e-12);
  const BlockMatrix33 mt = m.transposed();
  CHECK((mt.to_dense() - m.to_dense().transpose()).norm() == 0.0);
  const MatX y = MatX::Random(21, 2);
  CHECK((mt.apply(y) - m.to_dense().transpose() * y).norm() < 1e-12);
}

TEST_CASE("apply_blocks matches stacked apply") {
  auto rng = testsup::rng(42);
  const BlockMatrix33 m = random_block_matrix(rng, 6, 6, 0.5);
  std::vector<Mat3> x;
  MatX xs(18, 3);
  for (Index i = 0; i < 6; ++i) {
    x.push_back(testsup::haar_rotation(rng));
    xs.middleRows(3 * i, 3) = x.back();
  }
  const std::vector<Mat3> y = m.apply_blocks(x);
  const MatX ys = m.apply(xs);
  for (Index i = 0; i < 6; ++i) {
    CHECK((y[static_cast<size_t>(i)] - ys.middleRows(3 * i, 3)).norm() < 1e-13);
  }
}

TEST_CASE("norm bound dominates the spectrum") {
  auto rng = testsup::rng(43);
  BlockMatrix33 m = random_block_matrix(rng, 8, 8, 0.4);
  // symmetrize
  BlockMatrix33::Builder b(8, 8);
  for (Index i = 0; i < 8; ++i) {
    for (const auto& e : m.row(i)) {
      b.add(i, e.col, e.m);
      b.add(e.col, i, e.m.transpose());
    }
  }
  m = b.build();
  CHECK(m.is_block_symmetric());
  const Eigen::SelfAdjointEigenSolver<MatX> eig(m.to_dense());
  CHECK(eig.eigenvalues().cwiseAbs().maxCoeff() <= m.norm_bound() + 1e-12);
}

TEST_CASE("append_row grows the matrix") {
  BlockMatrix33 m(1, 3);
  m.set(0, 1, Mat3::Identity());
  m.append_row({{0, 2.0 * Mat3::Identity()}, {2, 3.0 * Mat3::Identity()}});
  CHECK(m.block_rows() == 2);
  CHECK((*m.find(1, 0) - 2.0 * Mat3::Identity()).norm() == 0.0);
  CHECK((*m.find(1, 2) - 3.0 * Mat3::Identity()).norm() == 0.0);
}

TEST_SUITE_END();
