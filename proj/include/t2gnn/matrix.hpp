#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace t2gnn {

using DenseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
/// Elementwise boolean mask; true marks an observed entry.
using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::string shape_string(Eigen::Index rows, Eigen::Index cols);

inline std::string shape_string(const DenseMatrix& m) { return shape_string(m.rows(), m.cols()); }

struct SparseEntry {
  Eigen::Index col;
  double weight;
};

/// Row-compressed nonnegative matrix. Column indices are strictly increasing
/// within a row and no explicit zeros are stored.
class SparseRowMatrix {
 public:
  SparseRowMatrix() = default;
  SparseRowMatrix(Eigen::Index rows, Eigen::Index cols);

  /// Builds from (row, col, weight) triplets; duplicates are summed, zeros dropped.
  static SparseRowMatrix from_triplets(Eigen::Index rows, Eigen::Index cols,
                                       std::vector<std::tuple<Eigen::Index, Eigen::Index, double>> triplets);
  static SparseRowMatrix identity(Eigen::Index n);
  static SparseRowMatrix from_dense(const DenseMatrix& dense);

  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  std::size_t nnz() const { return entries_.size(); }

  std::span<const SparseEntry> row(Eigen::Index r) const {
    return {entries_.data() + offsets_[r], entries_.data() + offsets_[r + 1]};
  }
  std::size_t row_nnz(Eigen::Index r) const { return offsets_[r + 1] - offsets_[r]; }

  /// Weight at (r, c) or 0 when absent.
  double at(Eigen::Index r, Eigen::Index c) const;
  bool contains(Eigen::Index r, Eigen::Index c) const;
  double row_sum(Eigen::Index r) const;

  DenseMatrix to_dense() const;
  SparseRowMatrix transpose() const;
  bool is_symmetric() const;

  /// Dense result of this · rhs.
  DenseMatrix multiply(const DenseMatrix& rhs) const;
  /// Dense result of thisᵀ · rhs.
  DenseMatrix transpose_multiply(const DenseMatrix& rhs) const;

  friend bool operator==(const SparseRowMatrix& a, const SparseRowMatrix& b);

 private:
  friend class SparseRowBuilder;
  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<SparseEntry> entries_;
};

/// Appends rows in order; each row's entries must already be sorted by column.
class SparseRowBuilder {
 public:
  SparseRowBuilder(Eigen::Index rows, Eigen::Index cols);
  void push_row(std::span<const SparseEntry> entries);
  SparseRowMatrix finish() &&;

 private:
  SparseRowMatrix m_;
};

SparseRowMatrix add(const SparseRowMatrix& a, const SparseRowMatrix& b);
SparseRowMatrix scale(const SparseRowMatrix& a, double c);

/// D̃^{-1/2}(A + I)D̃^{-1/2} with weighted degrees of A + I.
SparseRowMatrix gcn_normalize(const SparseRowMatrix& adjacency);

/// Row-normalized adjacency (mean aggregation); empty rows stay empty.
SparseRowMatrix row_normalize(const SparseRowMatrix& adjacency);

}  // namespace t2gnn
