#pragma once

#include "t2gnn/matrix.hpp"

#include <filesystem>
#include <vector>

namespace t2gnn {

struct PprConfig {
  double alpha = 0.15;     // reset probability
  double epsilon = 1e-4;   // residual tolerance per unit degree
  int top_k = 10;

  void validate() const;
};

/// Approximate personalized PageRank of one source by forward push on
/// T = D⁻¹(A + I). Returns the dense score vector (length n).
std::vector<double> ppr_push_source(const SparseRowMatrix& adjacency, Eigen::Index source, double alpha,
                                    double epsilon);

/// Row s holds the approximate PPR vector personalized to node s; the error of
/// entry (s, v) is at most epsilon·deg(v), deg taken in A + I. Sources are
/// independent; jobs > 1 splits them across threads without changing results.
SparseRowMatrix ppr_push(const SparseRowMatrix& adjacency, double alpha, double epsilon, int jobs = 1);

/// Keeps the k largest scores per row; ties go to the lower column index.
SparseRowMatrix top_k_sparsify(const SparseRowMatrix& scores, int k);

/// A + A_ppr, optionally symmetrized as (Ā + Āᵀ)/2.
SparseRowMatrix enhance_adjacency(const SparseRowMatrix& adjacency, const SparseRowMatrix& ppr_scores,
                                  bool symmetrize = true);

/// Full pipeline: push, sparsify, combine.
SparseRowMatrix build_enhanced_adjacency(const SparseRowMatrix& adjacency, const PprConfig& cfg,
                                         bool symmetrize = true, int jobs = 1);

/// "u v weight" per stored entry, row-major order.
void write_weighted_edgelist(const std::filesystem::path& path, const SparseRowMatrix& m);

}  // namespace t2gnn
