#pragma once

#include "t2gnn/matrix.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace t2gnn {

/// Disjoint node-index sets, each sorted ascending.
struct Split {
  std::vector<int> train;
  std::vector<int> val;
  std::vector<int> test;

  friend bool operator==(const Split&, const Split&) = default;
};

enum class FeatureMaskMode { Entrywise, Nodewise };

struct MaskSpec {
  double feature_missing_rate = 0.3;
  double edge_missing_rate = 0.3;
  FeatureMaskMode feature_mode = FeatureMaskMode::Entrywise;
  std::uint64_t seed = 0;

  void validate() const;
};

// Node-classification graph whose features and edges may be partly missing.
// Unobserved feature entries hold 0 as a placeholder; consult feature_observed.
struct IncompleteGraph {
  SparseRowMatrix adjacency;  // symmetric, zero diagonal
  DenseMatrix features;
  BoolMatrix feature_observed;
  std::vector<int> labels;
  int num_classes = 0;
  std::vector<std::string> node_ids;  // original ids, index = dense node id

  Eigen::Index num_nodes() const { return features.rows(); }
  Eigen::Index num_features() const { return features.cols(); }
  /// Number of undirected edges.
  std::size_t num_edges() const;
  std::size_t num_observed_features() const;
  /// Throws FormatError when an invariant does not hold.
  void validate() const;
};

struct LoadReport {
  std::size_t skipped_edges = 0;     // endpoint unknown
  std::size_t duplicate_edges = 0;
  std::size_t self_loops = 0;
};

/// `content`: "node_id f_1 .. f_d label" per line; `cites`: "citing cited" per line.
IncompleteGraph load_planetoid(const std::filesystem::path& content, const std::filesystem::path& cites,
                               LoadReport* report = nullptr);

/// `edges`: "u v" per line (0-based); `features`: CSV, one row per node;
/// `labels`: "node,label" per line.
IncompleteGraph load_edgelist(const std::filesystem::path& edges, const std::filesystem::path& features,
                              const std::filesystem::path& labels, LoadReport* report = nullptr);

/// Geom-GCN layout: a header line, then "id<TAB>f_1,..,f_d<TAB>label" per
/// node and "u<TAB>v" per edge (0-based ids).
IncompleteGraph load_geom_gcn(const std::filesystem::path& nodes, const std::filesystem::path& edges,
                              LoadReport* report = nullptr);

/// Builds a graph from an undirected edge list with the loaders' normalization.
IncompleteGraph make_graph(DenseMatrix features, std::vector<int> labels,
                           const std::vector<std::pair<int, int>>& edges, LoadReport* report = nullptr);

/// Masks ⌊rate·count⌋ feature entries (or node rows) and undirected edges.
IncompleteGraph apply_masks(const IncompleteGraph& g, const MaskSpec& spec);

struct SplitOptions {
  double train_fraction = 0.6;
  double val_fraction = 0.2;
  int min_class_size = 5;
};

/// Per-class stratified splits; the i-th split is drawn from derive_seed(seed, "split", i).
std::vector<Split> make_splits(const IncompleteGraph& g, std::uint64_t seed, int n_splits = 10,
                               const SplitOptions& options = {});

/// ⌊rate·count⌋ robust to representation error in rate (0.29·100 → 29).
std::size_t floor_count(double rate, std::size_t count);

nlohmann::json graph_to_json(const IncompleteGraph& g);
IncompleteGraph graph_from_json(const nlohmann::json& j);
nlohmann::json split_to_json(const Split& s);
Split split_from_json(const nlohmann::json& j);

/// Masked graph plus splits, for exact reuse across processes.
void write_graph_bundle(const std::filesystem::path& path, const IncompleteGraph& g,
                        const std::vector<Split>& splits);
IncompleteGraph read_graph_bundle(const std::filesystem::path& path, std::vector<Split>* splits = nullptr);

}  // namespace t2gnn
