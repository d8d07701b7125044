#include "bipgo/block_matrix.hpp"

#include <algorithm>
#include <cmath>

#include "bipgo/errors.hpp"
#include "bipgo/parallel.hpp"

namespace bipgo {

Index BlockMatrix33::nnz_blocks() const {
  size_t n = 0;
  for (const auto& r : data_) n += r.size();
  return static_cast<Index>(n);
}

const Mat3* BlockMatrix33::find(Index i, Index j) const {
  const auto& r = data_[static_cast<size_t>(i)];
  auto it = std::lower_bound(r.begin(), r.end(), j,
                             [](const Entry& e, Index col) { return e.col < col; });
  if (it != r.end() && it->col == j) return &it->m;
  return nullptr;
}

void BlockMatrix33::set(Index i, Index j, const Mat3& m) {
  auto& r = data_[static_cast<size_t>(i)];
  auto it = std::lower_bound(r.begin(), r.end(), j,
                             [](const Entry& e, Index col) { return e.col < col; });
  if (it != r.end() && it->col == j) {
    it->m = m;
  } else {
    r.insert(it, {j, m});
  }
}

void BlockMatrix33::add(Index i, Index j, const Mat3& m) {
  auto& r = data_[static_cast<size_t>(i)];
  auto it = std::lower_bound(r.begin(), r.end(), j,
                             [](const Entry& e, Index col) { return e.col < col; });
  if (it != r.end() && it->col == j) {
    it->m += m;
  } else {
    r.insert(it, {j, m});
  }
}

void BlockMatrix33::append_row(std::vector<Entry> entries) {
  data_.push_back(std::move(entries));
  ++rows_;
}

MatX BlockMatrix33::apply(const MatX& x) const {
  if (x.rows() != 3 * cols_) throw InvalidInput("BlockMatrix33::apply: shape mismatch");
  MatX y = MatX::Zero(3 * rows_, x.cols());
  parallel_for(rows_, [&](Index begin, Index end) {
    for (Index i = begin; i < end; ++i) {
      auto yi = y.middleRows(3 * i, 3);
      for (const Entry& e : data_[static_cast<size_t>(i)]) {
        yi.noalias() += e.m * x.middleRows(3 * e.col, 3);
      }
    }
  });
  return y;
}

std::vector<Mat3> BlockMatrix33::apply_blocks(const std::vector<Mat3>& x) const {
  if (static_cast<Index>(x.size()) != cols_) {
    throw InvalidInput("BlockMatrix33::apply_blocks: shape mismatch");
  }
  std::vector<Mat3> y(static_cast<size_t>(rows_), Mat3::Zero());
  parallel_for(rows_, [&](Index begin, Index end) {
    for (Index i = begin; i < end; ++i) {
      Mat3 acc = Mat3::Zero();
      for (const Entry& e : data_[static_cast<size_t>(i)]) {
        acc.noalias() += e.m * x[static_cast<size_t>(e.col)];
      }
      y[static_cast<size_t>(i)] = acc;
    }
  });
  return y;
}

BlockMatrix33 BlockMatrix33::transposed() const {
  Builder b(cols_, rows_);
  for (Index i = 0; i < rows_; ++i) {
    for (const Entry& e : data_[static_cast<size_t>(i)]) {
      b.add(e.col, i, e.m.transpose());
    }
  }
  return b.build();
}

MatX BlockMatrix33::to_dense() const {
  MatX d = MatX::Zero(3 * rows_, 3 * cols_);
  for (Index i = 0; i < rows_; ++i) {
    for (const Entry& e : data_[static_cast<size_t>(i)]) {
      d.block<3, 3>(3 * i, 3 * e.col) = e.m;
    }
  }
  return d;
}

double BlockMatrix33::norm_bound() const {
  double bound = 0.0;
  for (const auto& r : data_) {
    double s = 0.0;
    for (const Entry& e : r) s += e.m.norm();
    bound = std::max(bound, s);
  }
  return bound;
}

double BlockMatrix33::frobenius_norm() const {
  double s = 0.0;
  for (const auto& r : data_) {
    for (const Entry& e : r) s += e.m.squaredNorm();
  }
  return std::sqrt(s);
}

bool BlockMatrix33::is_block_symmetric(double rel_tol) const {
  if (rows_ != cols_) return false;
  double scale = 0.0;
  for (const auto& r : data_) {
    for (const Entry& e : r) scale = std::max(scale, e.m.norm());
  }
  const double tol = rel_tol * (1.0 + scale);
  for (Index i = 0; i < rows_; ++i) {
    for (const Entry& e : data_[static_cast<size_t>(i)]) {
      const Mat3* counterpart = find(e.col, i);
      if (!counterpart) {
        if (e.m.norm() > tol) return false;
      } else if ((e.m - counterpart->transpose()).norm() > tol) {
        return false;
      }
    }
  }
  return true;
}

BlockMatrix33 BlockMatrix33::Builder::build() {
  BlockMatrix33 out(rows_, cols_);
  for (Index i = 0; i < rows_; ++i) {
    auto& src = data_[static_cast<size_t>(i)];
    std::sort(src.begin(), src.end(),
              [](const Entry& a, const Entry& b) { return a.col < b.col; });
    auto& dst = out.data_[static_cast<size_t>(i)];
    dst.reserve(src.size());
    for (const Entry& e : src) {
      if (!dst.empty() && dst.back().col == e.col) {
        dst.back().m += e.m;
      } else {
        dst.push_back(e);
      }
    }
  }
  return out;
}

}  // namespace bipgo
