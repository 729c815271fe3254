#include "t2gnn/matrix.hpp"

#include "t2gnn/error.hpp"

#include <algorithm>
#include <cmath>

namespace t2gnn {

std::string shape_string(Eigen::Index rows, Eigen::Index cols) {
  return "(" + std::to_string(rows) + "x" + std::to_string(cols) + ")";
}

SparseRowMatrix::SparseRowMatrix(Eigen::Index rows, Eigen::Index cols)
    : rows_(rows), cols_(cols), offsets_(static_cast<std::size_t>(rows) + 1, 0) {}

SparseRowMatrix SparseRowMatrix::from_triplets(
    Eigen::Index rows, Eigen::Index cols,
    std::vector<std::tuple<Eigen::Index, Eigen::Index, double>> triplets) {
  for (const auto& [r, c, w] : triplets) {
    if (r < 0 || r >= rows || c < 0 || c >= cols) {
      throw DimensionError("triplet (" + std::to_string(r) + "," + std::to_string(c) +
                           ") outside " + shape_string(rows, cols));
    }
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("sparse weights must be finite and nonnegative");
  }
  std::sort(triplets.begin(), triplets.end(), [](const auto& a, const auto& b) {
    return std::get<0>(a) != std::get<0>(b) ? std::get<0>(a) < std::get<0>(b) : std::get<1>(a) < std::get<1>(b);
  });
  SparseRowBuilder builder(rows, cols);
  std::vector<SparseEntry> row;
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    row.clear();
    while (k < triplets.size() && std::get<0>(triplets[k]) == r) {
      auto c = std::get<1>(triplets[k]);
      double w = std::get<2>(triplets[k]);
      if (!row.empty() && row.back().col == c) {
        row.back().weight += w;
      } else {
        row.push_back({c, w});
      }
      ++k;
    }
    std::erase_if(row, [](const SparseEntry& e) { return e.weight == 0.0; });
    builder.push_row(row);
  }
  return std::move(builder).finish();
}

SparseRowMatrix SparseRowMatrix::identity(Eigen::Index n) {
  SparseRowBuilder builder(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    SparseEntry e{i, 1.0};
    builder.push_row({&e, 1});
  }
  return std::move(builder).finish();
}

SparseRowMatrix SparseRowMatrix::from_dense(const DenseMatrix& dense) {
  SparseRowBuilder builder(dense.rows(), dense.cols());
  std::vector<SparseEntry> row;
  for (Eigen::Index r = 0; r < dense.rows(); ++r) {
    row.clear();
    for (Eigen::Index c = 0; c < dense.cols(); ++c) {
      if (dense(r, c) != 0.0) row.push_back({c, dense(r, c)});
    }
    builder.push_row(row);
  }
  return std::move(builder).finish();
}

double SparseRowMatrix::at(Eigen::Index r, Eigen::Index c) const {
  auto entries = row(r);
  auto it = std::lower_bound(entries.begin(), entries.end(), c,
                             [](const SparseEntry& e, Eigen::Index col) { return e.col < col; });
  return (it != entries.end() && it->col == c) ? it->weight : 0.0;
}

bool SparseRowMatrix::contains(Eigen::Index r, Eigen::Index c) const {
  auto entries = row(r);
  return std::binary_search(entries.begin(), entries.end(), SparseEntry{c, 0.0},
                            [](const SparseEntry& a, const SparseEntry& b) { return a.col < b.col; });
}

double SparseRowMatrix::row_sum(Eigen::Index r) const {
  double s = 0.0;
  for (const auto& e : row(r)) s += e.weight;
  return s;
}

DenseMatrix SparseRowMatrix::to_dense() const {
  DenseMatrix d = DenseMatrix::Zero(rows_, cols_);
  for (Eigen::Index r = 0; r < rows_; ++r) {
    for (const auto& e : row(r)) d(r, e.col) = e.weight;
  }
  return d;
}

SparseRowMatrix SparseRowMatrix::transpose() const {
  std::vector<std::size_t> counts(static_cast<std::size_t>(cols_) + 1, 0);
  for (const auto& e : entries_) ++counts[e.col + 1];
  for (std::size_t c = 1; c < counts.size(); ++c) counts[c] += counts[c - 1];
  SparseRowMatrix t(cols_, rows_);
  t.offsets_ = counts;
  t.entries_.resize(entries_.size());
  std::vector<std::size_t> cursor(counts.begin(), counts.end() - 1);
  for (Eigen::Index r = 0; r < rows_; ++r) {
    for (const auto& e : row(r)) t.entries_[cursor[e.col]++] = {r, e.weight};
  }
  return t;
}

bool SparseRowMatrix::is_symmetric() const {
  if (rows_ != cols_) return false;
  return *this == transpose();
}

DenseMatrix SparseRowMatrix::multiply(const DenseMatrix& rhs) const {
  if (cols_ != rhs.rows()) {
    throw DimensionError("sparse_matmul: " + shape_string(rows_, cols_) + " x " + shape_string(rhs));
  }
  DenseMatrix out = DenseMatrix::Zero(rows_, rhs.cols());
  for (Eigen::Index r = 0; r < rows_; ++r) {
    auto out_row = out.row(r);
    for (const auto& e : row(r)) out_row.noalias() += e.weight * rhs.row(e.col);
  }
  return out;
}

DenseMatrix SparseRowMatrix::transpose_multiply(const DenseMatrix& rhs) const {
  if (rows_ != rhs.rows()) {
    throw DimensionError("sparse_matmul^T: " + shape_string(cols_, rows_) + " x " + shape_string(rhs));
  }
  DenseMatrix out = DenseMatrix::Zero(cols_, rhs.cols());
  for (Eigen::Index r = 0; r < rows_; ++r) {
    for (const auto& e : row(r)) out.row(e.col).noalias() += e.weight * rhs.row(r);
  }
  return out;
}

bool operator==(const SparseRowMatrix& a, const SparseRowMatrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_ || a.offsets_ != b.offsets_) return false;
  for (std::size_t k = 0; k < a.entries_.size(); ++k) {
    if (a.entries_[k].col != b.entries_[k].col || a.entries_[k].weight != b.entries_[k].weight) return false;
  }
  return true;
}

SparseRowBuilder::SparseRowBuilder(Eigen::Index rows, Eigen::Index cols) {
  m_.rows_ = rows;
  m_.cols_ = cols;
  m_.offsets_.reserve(static_cast<std::size_t>(rows) + 1);
}

void SparseRowBuilder::push_row(std::span<const SparseEntry> entries) {
  if (static_cast<Eigen::Index>(m_.offsets_.size()) > m_.rows_) {
    throw ContractError("SparseRowBuilder: too many rows");
  }
  Eigen::Index prev = -1;
  for (const auto& e : entries) {
    if (e.col <= prev || e.col >= m_.cols_) throw ContractError("SparseRowBuilder: unsorted or out-of-range column");
    if (!(e.weight > 0.0)) throw ContractError("SparseRowBuilder: weights must be positive");
    prev = e.col;
    m_.entries_.push_back(e);
  }
  m_.offsets_.push_back(m_.entries_.size());
}

SparseRowMatrix SparseRowBuilder::finish() && {
  while (static_cast<Eigen::Index>(m_.offsets_.size()) <= m_.rows_) m_.offsets_.push_back(m_.entries_.size());
  return std::move(m_);
}

SparseRowMatrix add(const SparseRowMatrix& a, const SparseRowMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("sparse add: " + shape_string(a.rows(), a.cols()) + " + " +
                         shape_string(b.rows(), b.cols()));
  }
  SparseRowBuilder builder(a.rows(), a.cols());
  std::vector<SparseEntry> row;
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    row.clear();
    auto ra = a.row(r);
    auto rb = b.row(r);
    std::size_t i = 0, j = 0;
    while (i < ra.size() || j < rb.size()) {
      if (j == rb.size() || (i < ra.size() && ra[i].col < rb[j].col)) {
        row.push_back(ra[i++]);
      } else if (i == ra.size() || rb[j].col < ra[i].col) {
        row.push_back(rb[j++]);
      } else {
        row.push_back({ra[i].col, ra[i].weight + rb[j].weight});
        ++i;
        ++j;
      }
    }
    builder.push_row(row);
  }
  return std::move(builder).finish();
}

SparseRowMatrix scale(const SparseRowMatrix& a, double c) {
  if (!(c > 0.0)) {
    if (c == 0.0) return SparseRowMatrix(a.rows(), a.cols());
    throw ConfigError("sparse scale factor must be nonnegative");
  }
  SparseRowBuilder builder(a.rows(), a.cols());
  std::vector<SparseEntry> row;
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    row.assign(a.row(r).begin(), a.row(r).end());
    for (auto& e : row) e.weight *= c;
    builder.push_row(row);
  }
  return std::move(builder).finish();
}

SparseRowMatrix gcn_normalize(const SparseRowMatrix& adjacency) {
  if (adjacency.rows() != adjacency.cols()) throw DimensionError("gcn_normalize expects a square matrix");
  const Eigen::Index n = adjacency.rows();
  SparseRowMatrix with_loops = add(adjacency, SparseRowMatrix::identity(n));
  std::vector<double> inv_sqrt(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(with_loops.row_sum(i));
  SparseRowBuilder builder(n, n);
  std::vector<SparseEntry> row;
  for (Eigen::Index i = 0; i < n; ++i) {
    row.assign(with_loops.row(i).begin(), with_loops.row(i).end());
    for (auto& e : row) e.weight *= inv_sqrt[i] * inv_sqrt[e.col];
    builder.push_row(row);
  }
  return std::move(builder).finish();
}

SparseRowMatrix row_normalize(const SparseRowMatrix& adjacency) {
  SparseRowBuilder builder(adjacency.rows(), adjacency.cols());
  std::vector<SparseEntry> row;
  for (Eigen::Index i = 0; i < adjacency.rows(); ++i) {
    row.assign(adjacency.row(i).begin(), adjacency.row(i).end());
    double s = adjacency.row_sum(i);
    for (auto& e : row) e.weight /= s;
    builder.push_row(row);
  }
  return std::move(builder).finish();
}

}  // namespace t2gnn
