#pragma once

#include <span>
#include <vector>

#include "bipgo/types.hpp"

namespace bipgo {

// Sparse matrix of 3x3 real blocks, compressed by block row. An absent block
// is zero. Every solver kernel here is a 3x3 block operation, so the scalar
// sparsity pattern is never materialized.
class BlockMatrix33 {
 public:
  struct Entry {
    Index col;
    Mat3 m;
  };

  BlockMatrix33() = default;
  BlockMatrix33(Index block_rows, Index block_cols)
      : rows_(block_rows), cols_(block_cols), data_(static_cast<size_t>(block_rows)) {}

  Index block_rows() const { return rows_; }
  Index block_cols() const { return cols_; }
  Index nnz_blocks() const;

  std::span<const Entry> row(Index i) const {
    const auto& r = data_[static_cast<size_t>(i)];
    return {r.data(), r.size()};
  }

  // nullptr when the block is absent (zero).
  const Mat3* find(Index i, Index j) const;

  void set(Index i, Index j, const Mat3& m);  // insert or overwrite
  void add(Index i, Index j, const Mat3& m);  // insert or accumulate

  // Appends one block row (grows block_rows by one). Entries must have
  // strictly increasing column indices.
  void append_row(std::vector<Entry> entries);

  // y = A x with x of shape (3*block_cols) x k.
  MatX apply(const MatX& x) const;
  std::vector<Mat3> apply_blocks(const std::vector<Mat3>& x) const;

  BlockMatrix33 transposed() const;
  MatX to_dense() const;

  // Gershgorin-style bound on the spectral radius via block Frobenius norms.
  double norm_bound() const;
  double frobenius_norm() const;
  bool is_block_symmetric(double rel_tol = 1e-9) const;

  class Builder {
   public:
    Builder(Index block_rows, Index block_cols)
        : rows_(block_rows), cols_(block_cols), data_(static_cast<size_t>(block_rows)) {}
    void add(Index i, Index j, const Mat3& m) {
      data_[static_cast<size_t>(i)].push_back({j, m});
    }
    // Sorts rows and sums duplicate coordinates.
    BlockMatrix33 build();

   private:
    Index rows_;
    Index cols_;
    std::vector<std::vector<Entry>> data_;
  };

 private:
  friend class Builder;
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<std::vector<Entry>> data_;
};

}  // namespace bipgo
