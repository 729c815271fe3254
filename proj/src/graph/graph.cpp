#include "t2gnn/graph.hpp"

#include "t2gnn/error.hpp"
#include "t2gnn/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace t2gnn {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_tokens(const std::string& line, bool comma) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    bool sep = std::isspace(static_cast<unsigned char>(c)) || (comma && c == ',');
    if (sep) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

bool parse_double(const std::string& s, double& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

bool parse_long(const std::string& s, long long& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  return in;
}

// Sorted original ids: numerically when every id is an integer.
std::vector<std::string> sorted_ids(std::vector<std::string> ids) {
  bool numeric = std::all_of(ids.begin(), ids.end(), [](const std::string& s) {
    long long v;
    return parse_long(s, v);
  });
  if (numeric) {
    std::sort(ids.begin(), ids.end(), [](const std::string& a, const std::string& b) {
      long long x = 0, y = 0;
      parse_long(a, x);
      parse_long(b, y);
      return x < y;
    });
  } else {
    std::sort(ids.begin(), ids.end());
  }
  return ids;
}

}  // namespace

void MaskSpec::validate() const {
  if (!(feature_missing_rate >= 0.0 && feature_missing_rate <= 1.0)) {
    throw ConfigError("feature_missing_rate must lie in [0, 1]");
  }
  if (!(edge_missing_rate >= 0.0 && edge_missing_rate <= 1.0)) {
    throw ConfigError("edge_missing_rate must lie in [0, 1]");
  }
}

std::size_t IncompleteGraph::num_edges() const {
  std::size_t directed = 0;
  for (Eigen::Index i = 0; i < adjacency.rows(); ++i) {
    for (const auto& e : adjacency.row(i)) directed += (e.col != i) ? 1 : 2;
  }
  return directed / 2;
}

std::size_t IncompleteGraph::num_observed_features() const {
  return static_cast<std::size_t>(feature_observed.count());
}

void IncompleteGraph::validate() const {
  const Eigen::Index n = num_nodes();
  if (adjacency.rows() != n || adjacency.cols() != n) {
    throw FormatError("adjacency " + shape_string(adjacency.rows(), adjacency.cols()) + " for " +
                      std::to_string(n) + " nodes");
  }
  if (feature_observed.rows() != features.rows() || feature_observed.cols() != features.cols()) {
    throw FormatError("feature mask shape differs from feature shape");
  }
  if (static_cast<Eigen::Index>(labels.size()) != n) throw FormatError("one label per node required");
  for (int y : labels) {
    if (y < 0 || y >= num_classes) throw FormatError("label " + std::to_string(y) + " outside [0, num_classes)");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (adjacency.contains(i, i)) throw FormatError("adjacency has a self-loop at node " + std::to_string(i));
  }
  if (!adjacency.is_symmetric()) throw FormatError("adjacency is not symmetric");
}

IncompleteGraph make_graph(DenseMatrix features, std::vector<int> labels,
                           const std::vector<std::pair<int, int>>& edges, LoadReport* report) {
  const auto n = features.rows();
  if (static_cast<Eigen::Index>(labels.size()) != n) {
    throw FormatError(std::to_string(labels.size()) + " labels for " + std::to_string(n) + " nodes");
  }
  LoadReport local;
  std::set<std::pair<int, int>> unique;
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n || v >= n) {
      throw FormatError("edge (" + std::to_string(u) + "," + std::to_string(v) + ") outside [0, " +
                        std::to_string(n) + ")");
    }
    if (u == v) {
      ++local.self_loops;
      continue;
    }
    if (!unique.insert({std::min(u, v), std::max(u, v)}).second) ++local.duplicate_edges;
  }
  std::vector<std::tuple<Eigen::Index, Eigen::Index, double>> triplets;
  triplets.reserve(unique.size() * 2);
  for (auto [u, v] : unique) {
    triplets.emplace_back(u, v, 1.0);
    triplets.emplace_back(v, u, 1.0);
  }
  IncompleteGraph g;
  g.adjacency = SparseRowMatrix::from_triplets(n, n, std::move(triplets));
  g.feature_observed = BoolMatrix::Constant(n, features.cols(), true);
  g.features = std::move(features);
  g.num_classes = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  g.labels = std::move(labels);
  g.node_ids.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) g.node_ids[i] = std::to_string(i);
  if (report) {
    report->duplicate_edges += local.duplicate_edges;
    report->self_loops += local.self_loops;
  }
  return g;
}

IncompleteGraph load_planetoid(const fs::path& content, const fs::path& cites, LoadReport* report) {
  struct Row {
    std::vector<double> features;
    std::string label;
  };
  std::map<std::string, Row> rows;
  std::vector<std::string> raw_ids;
  {
    auto in = open_input(content);
    std::string line;
    std::size_t lineno = 0;
    std::size_t width = 0;
    bool have_width = false;
    while (std::getline(in, line)) {
      ++lineno;
      auto tok = split_tokens(line, false);
      if (tok.empty()) continue;
      if (tok.size() < 2) throw ParseError(content.string(), lineno, "expected `node_id <features> label`");
      Row row;
      row.label = tok.back();
      row.features.resize(tok.size() - 2);
      for (std::size_t k = 1; k + 1 < tok.size(); ++k) {
        if (!parse_double(tok[k], row.features[k - 1])) {
          throw ParseError(content.string(), lineno, "bad feature value `" + tok[k] + "`");
        }
      }
      if (!have_width) {
        width = row.features.size();
        have_width = true;
      } else if (row.features.size() != width) {
        throw FormatError(content.string() + ":" + std::to_string(lineno) + ": " +
                          std::to_string(row.features.size()) + " features, expected " + std::to_string(width));
      }
      if (rows.count(tok[0])) {
        throw FormatError(content.string() + ":" + std::to_string(lineno) + ": duplicate node id " + tok[0]);
      }
      raw_ids.push_back(tok[0]);
      rows.emplace(tok[0], std::move(row));
    }
  }
  std::vector<std::string> ids = sorted_ids(raw_ids);
  std::unordered_map<std::string, int> index;
  for (std::size_t i = 0; i < ids.size(); ++i) index.emplace(ids[i], static_cast<int>(i));

  std::set<std::string> label_names;
  for (const auto& [id, row] : rows) label_names.insert(row.label);
  std::map<std::string, int> label_index;
  for (const auto& name : label_names) label_index.emplace(name, static_cast<int>(label_index.size()));

  const auto n = static_cast<Eigen::Index>(ids.size());
  const auto d = n == 0 ? 0 : static_cast<Eigen::Index>(rows.begin()->second.features.size());
  DenseMatrix features(n, d);
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const Row& row = rows.at(ids[i]);
    for (Eigen::Index k = 0; k < d; ++k) features(i, k) = row.features[k];
    labels[i] = label_index.at(row.label);
  }

  LoadReport local;
  std::vector<std::pair<int, int>> edges;
  {
    auto in = open_input(cites);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto tok = split_tokens(line, false);
      if (tok.empty()) continue;
      if (tok.size() != 2) throw ParseError(cites.string(), lineno, "expected `citing cited`");
      auto a = index.find(tok[0]);
      auto b = index.find(tok[1]);
      if (a == index.end() || b == index.end()) {
        ++local.skipped_edges;
        continue;
      }
      edges.emplace_back(a->second, b->second);
    }
  }
  IncompleteGraph g = make_graph(std::move(features), std::move(labels), edges, &local);
  g.num_classes = static_cast<int>(label_index.size());
  g.node_ids = std::move(ids);
  if (report) *report = local;
  return g;
}

IncompleteGraph load_edgelist(const fs::path& edges_path, const fs::path& features_path,
                              const fs::path& labels_path, LoadReport* report) {
  std::vector<std::vector<double>> rows;
  {
    auto in = open_input(features_path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto tok = split_tokens(line, true);
      if (tok.empty()) continue;
      std::vector<double> row(tok.size());
      for (std::size_t k = 0; k < tok.size(); ++k) {
        if (!parse_double(tok[k], row[k])) {
          throw ParseError(features_path.string(), lineno, "bad feature value `" + tok[k] + "`");
        }
      }
      if (!rows.empty() && row.size() != rows.front().size()) {
        throw FormatError(features_path.string() + ":" + std::to_string(lineno) + ": " + std::to_string(row.size()) +
                          " features, expected " + std::to_string(rows.front().size()));
      }
      rows.push_back(std::move(row));
    }
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = n == 0 ? 0 : static_cast<Eigen::Index>(rows.front().size());
  DenseMatrix features(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < d; ++k) features(i, k) = rows[i][k];

  std::vector<int> labels(static_cast<std::size_t>(n), -1);
  {
    auto in = open_input(labels_path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto tok = split_tokens(line, true);
      if (tok.empty()) continue;
      long long node = 0, label = 0;
      if (tok.size() != 2 || !parse_long(tok[0], node) || !parse_long(tok[1], label)) {
        throw ParseError(labels_path.string(), lineno, "expected `node,label`");
      }
      if (node < 0 || node >= n) {
        throw FormatError(labels_path.string() + ":" + std::to_string(lineno) + ": node " + std::to_string(node) +
                          " outside [0, " + std::to_string(n) + ")");
      }
      if (label < 0) throw FormatError(labels_path.string() + ":" + std::to_string(lineno) + ": negative label");
      labels[node] = static_cast<int>(label);
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (labels[i] < 0) throw FormatError(labels_path.string() + ": node " + std::to_string(i) + " has no label");
  }

  std::vector<std::pair<int, int>> edges;
  {
    auto in = open_input(edges_path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto tok = split_tokens(line, true);
      if (tok.empty()) continue;
      long long u = 0, v = 0;
      if (tok.size() != 2 || !parse_long(tok[0], u) || !parse_long(tok[1], v)) {
        throw ParseError(edges_path.string(), lineno, "expected `u v`");
      }
      if (u < 0 || v < 0 || u >= n || v >= n) {
        throw FormatError(edges_path.string() + ":" + std::to_string(lineno) + ": node index outside [0, " +
                          std::to_string(n) + ")");
      }
      edges.emplace_back(static_cast<int>(u), static_cast<int>(v));
    }
  }
  LoadReport local;
  IncompleteGraph g = make_graph(std::move(features), std::move(labels), edges, &local);
  if (report) *report = local;
  return g;
}

IncompleteGraph load_geom_gcn(const fs::path& nodes_path, const fs::path& edges_path, LoadReport* report) {
  std::vector<std::pair<long long, std::vector<double>>> rows;
  std::vector<long long> raw_labels;
  {
    auto in = open_input(nodes_path);
    std::string line;
    std::size_t lineno = 0;
    bool header = true;
    while (std::getline(in, line)) {
      ++lineno;
      if (header) {
        header = false;
        continue;
      }
      std::vector<std::string> fields;
      std::stringstream ss(line);
      for (std::string f; std::getline(ss, f, '\t');) fields.push_back(f);
      if (fields.empty() || (fields.size() == 1 && split_tokens(fields[0], false).empty())) continue;
      if (fields.size() != 3) throw ParseError(nodes_path.string(), lineno, "expected `id<TAB>features<TAB>label`");
      long long id = 0, label = 0;
      auto id_tok = split_tokens(fields[0], false);
      auto label_tok = split_tokens(fields[2], false);
      if (id_tok.size() != 1 || !parse_long(id_tok[0], id)) {
        throw ParseError(nodes_path.string(), lineno, "bad node id `" + fields[0] + "`");
      }
      if (label_tok.size() != 1 || !parse_long(label_tok[0], label) || label < 0) {
        throw ParseError(nodes_path.string(), lineno, "bad label `" + fields[2] + "`");
      }
      auto tok = split_tokens(fields[1], true);
      std::vector<double> row(tok.size());
      for (std::size_t k = 0; k < tok.size(); ++k) {
        if (!parse_double(tok[k], row[k])) {
          throw ParseError(nodes_path.string(), lineno, "bad feature value `" + tok[k] + "`");
        }
      }
      if (!rows.empty() && row.size() != rows.front().second.size()) {
        throw FormatError(nodes_path.string() + ":" + std::to_string(lineno) + ": " + std::to_string(row.size()) +
                          " features, expected " + std::to_string(rows.front().second.size()));
      }
      rows.emplace_back(id, std::move(row));
      raw_labels.push_back(label);
    }
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = n == 0 ? 0 : static_cast<Eigen::Index>(rows.front().second.size());
  DenseMatrix features(n, d);
  std::vector<int> labels(static_cast<std::size_t>(n), -1);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const long long id = rows[r].first;
    if (id < 0 || id >= n) {
      throw FormatError(nodes_path.string() + ": node id " + std::to_string(id) + " outside [0, " +
                        std::to_string(n) + ")");
    }
    if (labels[id] >= 0) throw FormatError(nodes_path.string() + ": duplicate node id " + std::to_string(id));
    labels[id] = static_cast<int>(raw_labels[r]);
    for (Eigen::Index k = 0; k < d; ++k) features(id, k) = rows[r].second[k];
  }

  std::vector<std::pair<int, int>> edges;
  {
    auto in = open_input(edges_path);
    std::string line;
    std::size_t lineno = 0;
    bool header = true;
    while (std::getline(in, line)) {
      ++lineno;
      if (header) {
        header = false;
        continue;
      }
      auto tok = split_tokens(line, false);
      if (tok.empty()) continue;
      long long u = 0, v = 0;
      if (tok.size() != 2 || !parse_long(tok[0], u) || !parse_long(tok[1], v)) {
        throw ParseError(edges_path.string(), lineno, "expected `u<TAB>v`");
      }
      if (u < 0 || v < 0 || u >= n || v >= n) {
        throw FormatError(edges_path.string() + ":" + std::to_string(lineno) + ": node index outside [0, " +
                          std::to_string(n) + ")");
      }
      edges.emplace_back(static_cast<int>(u), static_cast<int>(v));
    }
  }
  LoadReport local;
  IncompleteGraph g = make_graph(std::move(features), std::move(labels), edges, &local);
  if (report) *report = local;
  return g;
}

std::size_t floor_count(double rate, std::size_t count) {
  const double exact = rate * static_cast<double>(count);
  const double nearest = std::round(exact);
  if (std::abs(exact - nearest) <= 1e-9 * std::max(1.0, exact)) return static_cast<std::size_t>(nearest);
  return static_cast<std::size_t>(std::floor(exact));
}

IncompleteGraph apply_masks(const IncompleteGraph& g, const MaskSpec& spec) {
  spec.validate();
  IncompleteGraph out = g;
  const Eigen::Index n = g.num_nodes();
  const Eigen::Index d = g.num_features();

  Rng feature_rng(derive_seed(spec.seed, "mask-features"));
  if (spec.feature_mode == FeatureMaskMode::Entrywise) {
    std::vector<Eigen::Index> candidates;
    for (Eigen::Index k = 0; k < n * d; ++k)
      if (out.feature_observed.data()[k]) candidates.push_back(k);
    feature_rng.shuffle(candidates);
    std::size_t count = std::min(floor_count(spec.feature_missing_rate, static_cast<std::size_t>(n * d)),
                                 candidates.size());
    for (std::size_t q = 0; q < count; ++q) {
      out.feature_observed.data()[candidates[q]] = false;
      out.features.data()[candidates[q]] = 0.0;
    }
  } else {
    std::vector<Eigen::Index> nodes(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) nodes[i] = i;
    feature_rng.shuffle(nodes);
    std::size_t count = floor_count(spec.feature_missing_rate, static_cast<std::size_t>(n));
    for (std::size_t q = 0; q < count; ++q) {
      out.feature_observed.row(nodes[q]).setConstant(false);
      out.features.row(nodes[q]).setZero();
    }
  }

  std::vector<std::tuple<Eigen::Index, Eigen::Index, double>> kept;
  std::vector<std::tuple<Eigen::Index, Eigen::Index, double>> undirected;
  for (Eigen::Index i = 0; i < n; ++i)
    for (const auto& e : g.adjacency.row(i))
      if (e.col > i) undirected.emplace_back(i, e.col, e.weight);
  Rng edge_rng(derive_seed(spec.seed, "mask-edges"));
  std::vector<std::size_t> order(undirected.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  edge_rng.shuffle(order);
  const std::size_t removed = floor_count(spec.edge_missing_rate, undirected.size());
  std::vector<bool> drop(undirected.size(), false);
  for (std::size_t q = 0; q < removed; ++q) drop[order[q]] = true;
  for (std::size_t k = 0; k < undirected.size(); ++k) {
    if (drop[k]) continue;
    auto [u, v, w] = undirected[k];
    kept.emplace_back(u, v, w);
    kept.emplace_back(v, u, w);
  }
  out.adjacency = SparseRowMatrix::from_triplets(n, n, std::move(kept));
  return out;
}

std::vector<Split> make_splits(const IncompleteGraph& g, std::uint64_t seed, int n_splits,
                               const SplitOptions& options) {
  if (n_splits < 1) throw ConfigError("n_splits must be positive");
  if (!(options.train_fraction > 0.0 && options.val_fraction >= 0.0 &&
        options.train_fraction + options.val_fraction < 1.0)) {
    throw ConfigError("split fractions must satisfy train > 0, val >= 0, train + val < 1");
  }
  std::vector<std::vector<int>> by_class(static_cast<std::size_t>(g.num_classes));
  for (std::size_t i = 0; i < g.labels.size(); ++i) by_class[g.labels[i]].push_back(static_cast<int>(i));
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    if (!by_class[c].empty() && static_cast<int>(by_class[c].size()) < options.min_class_size) {
      throw ConfigError("class " + std::to_string(c) + " has " + std::to_string(by_class[c].size()) +
                        " nodes; at least " + std::to_string(options.min_class_size) + " required for splitting");
    }
  }
  std::vector<Split> splits;
  for (int s = 0; s < n_splits; ++s) {
    Rng rng(derive_seed(seed, "split", static_cast<std::uint64_t>(s)));
    Split split;
    for (auto members : by_class) {
      rng.shuffle(members);
      std::size_t n_train = floor_count(options.train_fraction, members.size());
      std::size_t n_val = floor_count(options.val_fraction, members.size());
      split.train.insert(split.train.end(), members.begin(), members.begin() + n_train);
      split.val.insert(split.val.end(), members.begin() + n_train, members.begin() + n_train + n_val);
      split.test.insert(split.test.end(), members.begin() + n_train + n_val, members.end());
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.val.begin(), split.val.end());
    std::sort(split.test.begin(), split.test.end());
    splits.push_back(std::move(split));
  }
  return splits;
}

nlohmann::json graph_to_json(const IncompleteGraph& g) {
  nlohmann::json j;
  j["num_nodes"] = g.num_nodes();
  j["num_features"] = g.num_features();
  j["num_classes"] = g.num_classes;
  j["node_ids"] = g.node_ids;
  j["labels"] = g.labels;
  nlohmann::json edges = nlohmann::json::array();
  for (Eigen::Index i = 0; i < g.num_nodes(); ++i) {
    for (const auto& e : g.adjacency.row(i)) {
      if (e.col <= i) continue;
      if (e.weight == 1.0) {
        edges.push_back({i, e.col});
      } else {
        edges.push_back({i, e.col, e.weight});
      }
    }
  }
  j["edges"] = std::move(edges);
  nlohmann::json features = nlohmann::json::array();
  nlohmann::json observed = nlohmann::json::array();
  for (Eigen::Index i = 0; i < g.num_nodes(); ++i) {
    std::vector<double> row(g.features.row(i).data(), g.features.row(i).data() + g.num_features());
    features.push_back(row);
    std::string bits(static_cast<std::size_t>(g.num_features()), '0');
    for (Eigen::Index k = 0; k < g.num_features(); ++k)
      if (g.feature_observed(i, k)) bits[k] = '1';
    observed.push_back(std::move(bits));
  }
  j["features"] = std::move(features);
  j["observed"] = std::move(observed);
  return j;
}

IncompleteGraph graph_from_json(const nlohmann::json& j) {
  try {
    const Eigen::Index n = j.at("num_nodes").get<Eigen::Index>();
    const Eigen::Index d = j.at("num_features").get<Eigen::Index>();
    IncompleteGraph g;
    g.num_classes = j.at("num_classes").get<int>();
    g.node_ids = j.at("node_ids").get<std::vector<std::string>>();
    g.labels = j.at("labels").get<std::vector<int>>();
    g.features.resize(n, d);
    g.feature_observed.resize(n, d);
    const auto& features = j.at("features");
    const auto& observed = j.at("observed");
    if (static_cast<Eigen::Index>(features.size()) != n || static_cast<Eigen::Index>(observed.size()) != n) {
      throw FormatError("bundle: feature rows do not match num_nodes");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& row = features[i];
      const auto bits = observed[i].get<std::string>();
      if (static_cast<Eigen::Index>(row.size()) != d || static_cast<Eigen::Index>(bits.size()) != d) {
        throw FormatError("bundle: row " + std::to_string(i) + " has the wrong width");
      }
      for (Eigen::Index k = 0; k < d; ++k) {
        g.features(i, k) = row[k].get<double>();
        g.feature_observed(i, k) = bits[k] == '1';
      }
    }
    std::vector<std::tuple<Eigen::Index, Eigen::Index, double>> triplets;
    for (const auto& e : j.at("edges")) {
      Eigen::Index u = e.at(0).get<Eigen::Index>();
      Eigen::Index v = e.at(1).get<Eigen::Index>();
      double w = e.size() > 2 ? e.at(2).get<double>() : 1.0;
      triplets.emplace_back(u, v, w);
      triplets.emplace_back(v, u, w);
    }
    g.adjacency = SparseRowMatrix::from_triplets(n, n, std::move(triplets));
    g.validate();
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bundle: ") + e.what());
  } catch (const DimensionError& e) {
    throw FormatError(std::string("bundle: ") + e.what());
  }
}

nlohmann::json split_to_json(const Split& s) {
  return {{"train", s.train}, {"val", s.val}, {"test", s.test}};
}

Split split_from_json(const nlohmann::json& j) {
  Split s;
  s.train = j.at("train").get<std::vector<int>>();
  s.val = j.at("val").get<std::vector<int>>();
  s.test = j.at("test").get<std::vector<int>>();
  return s;
}

void write_graph_bundle(const fs::path& path, const IncompleteGraph& g, const std::vector<Split>& splits) {
  nlohmann::json j;
  j["format"] = "t2gnn.graph-bundle";
  j["version"] = 1;
  j["graph"] = graph_to_json(g);
  nlohmann::json s = nlohmann::json::array();
  for (const auto& split : splits) s.push_back(split_to_json(split));
  j["splits"] = std::move(s);
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump() << '\n';
}

IncompleteGraph read_graph_bundle(const fs::path& path, std::vector<Split>* splits) {
  auto in = open_input(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string(), 0, e.what());
  }
  if (j.value("format", "") != "t2gnn.graph-bundle") throw FormatError(path.string() + ": not a graph bundle");
  IncompleteGraph g = graph_from_json(j.at("graph"));
  if (splits) {
    splits->clear();
    for (const auto& s : j.at("splits")) splits->push_back(split_from_json(s));
  }
  return g;
}

}  // namespace t2gnn
