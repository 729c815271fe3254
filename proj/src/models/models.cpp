#include "t2gnn/models.hpp"

#include "t2gnn/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

namespace t2gnn {

Backbone parse_backbone(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "gcn") return Backbone::GCN;
  if (s == "gat") return Backbone::GAT;
  if (s == "sage" || s == "graphsage") return Backbone::GraphSAGE;
  if (s == "appnp") return Backbone::APPNP;
  throw ConfigError("unknown backbone '" + std::string(name) + "' (expected gcn, gat, sage, appnp)");
}

std::string backbone_name(Backbone b) {
  switch (b) {
    case Backbone::GCN: return "gcn";
    case Backbone::GAT: return "gat";
    case Backbone::GraphSAGE: return "sage";
    case Backbone::APPNP: return "appnp";
  }
  return "unknown";
}

void ModelConfig::validate() const {
  if (hidden < 1) throw ConfigError("model.hidden must be positive");
  if (feature_teacher_hidden < 1) throw ConfigError("model.feature_teacher_hidden must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("model.dropout must lie in [0, 1)");
  if (gat_heads < 1 || gat_head_width < 1) throw ConfigError("model.gat_heads and gat_head_width must be positive");
  if (!(gat_negative_slope >= 0.0)) throw ConfigError("model.gat_negative_slope must be nonnegative");
  if (appnp_steps < 0) throw ConfigError("model.appnp_steps must be nonnegative");
  if (!(appnp_alpha >= 0.0 && appnp_alpha <= 1.0)) throw ConfigError("model.appnp_alpha must lie in [0, 1]");
  if (!(theta_init >= 0.0)) throw ConfigError("model.theta_init must be nonnegative");
}

OutputValues values_of(const ModelOutput& out) { return {out.logits.value(), out.intermediate.value()}; }

namespace {

SparseRowMatrix unit_pattern_with_self_loops(const SparseRowMatrix& a) {
  SparseRowBuilder b(a.rows(), a.cols());
  std::vector<SparseEntry> row;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    row.clear();
    bool placed = false;
    for (const auto& e : a.row(i)) {
      if (!placed && e.col >= i) {
        row.push_back({i, 1.0});
        placed = true;
        if (e.col == i) continue;
      }
      row.push_back({e.col, 1.0});
    }
    if (!placed) row.push_back({i, 1.0});
    b.push_row(row);
  }
  return std::move(b).finish();
}

}  // namespace

GraphInput GraphInput::build(const IncompleteGraph& g) { return build(g, g.adjacency); }

GraphInput GraphInput::build(const IncompleteGraph& g, SparseRowMatrix adjacency) {
  if (adjacency.rows() != g.num_nodes() || adjacency.cols() != g.num_nodes()) {
    throw DimensionError("GraphInput: adjacency " + shape_string(adjacency.rows(), adjacency.cols()) + " for " +
                         std::to_string(g.num_nodes()) + " nodes");
  }
  GraphInput in;
  in.features = g.feature_observed.select(g.features, DenseMatrix::Zero(g.features.rows(), g.features.cols()));
  in.observed = g.feature_observed;
  in.normalized = gcn_normalize(adjacency);
  in.mean_neighbors = row_normalize(adjacency);
  in.attention_pattern = unit_pattern_with_self_loops(adjacency);
  in.adjacency = std::move(adjacency);
  return in;
}

Var impute_features(const DenseMatrix& x, const BoolMatrix& observed, const Var& theta) {
  return select_observed(x, observed, theta);
}

Var positional_encoding(const Var& table, const Var& bias) { return add_bias(table, bias); }

Var gcn_layer(const SparseRowMatrix& adj_normalized, const Var& h, const Var& weight, bool activate) {
  // (A·H)·W and A·(H·W) agree; multiply by W first when it shrinks the width.
  Var out = weight.cols() <= h.cols() ? sparse_matmul(adj_normalized, matmul(h, weight))
                                      : matmul(sparse_matmul(adj_normalized, h), weight);
  return activate ? relu(out) : out;
}

DenseMatrix fan_in_uniform(Eigen::Index fan_in, Eigen::Index fan_out, Rng& rng) {
  const double limit = 1.0 / std::sqrt(static_cast<double>(std::max<Eigen::Index>(fan_in, 1)));
  DenseMatrix w(fan_in, fan_out);
  for (Eigen::Index k = 0; k < w.size(); ++k) w.data()[k] = rng.uniform(-limit, limit);
  return w;
}

// --- Model ---------------------------------------------------------------

Parameter& Model::add_parameter(std::string name, DenseMatrix value) {
  return params_.emplace_back(std::move(name), std::move(value));
}

std::vector<Parameter*> Model::parameters() {
  std::vector<Parameter*> out;
  for (auto& p : params_) out.push_back(&p);
  return out;
}

std::vector<const Parameter*> Model::parameters() const {
  std::vector<const Parameter*> out;
  for (const auto& p : params_) out.push_back(&p);
  return out;
}

Parameter& Model::parameter(std::string_view name) {
  for (auto& p : params_)
    if (p.name() == name) return p;
  throw ConfigError(kind() + ": no parameter named '" + std::string(name) + "'");
}

std::vector<DenseMatrix> Model::snapshot() const {
  std::vector<DenseMatrix> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.value());
  return out;
}

void Model::restore(const std::vector<DenseMatrix>& values) {
  if (values.size() != params_.size()) throw ContractError(kind() + ": snapshot has wrong parameter count");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i].rows() != params_[i].value().rows() || values[i].cols() != params_[i].value().cols())
      throw ContractError(kind() + ": snapshot shape mismatch for " + params_[i].name());
    params_[i].value() = values[i];
  }
}

// --- FeatureTeacher ------------------------------------------------------

namespace {

DenseMatrix theta_init(Eigen::Index n, Eigen::Index d, double scale, Rng& rng) {
  DenseMatrix t(n, d);
  for (Eigen::Index k = 0; k < t.size(); ++k) t.data()[k] = rng.uniform(-scale, scale);
  return t;
}

void require_nodes(const std::string& who, const GraphInput& in, Eigen::Index n) {
  if (in.num_nodes() != n)
    throw DimensionError(who + ": built for " + std::to_string(n) + " nodes, got " +
                         std::to_string(in.num_nodes()));
}

}  // namespace

FeatureTeacher::FeatureTeacher(Eigen::Index nodes, Eigen::Index features, int classes, const ModelConfig& cfg,
                               Rng& rng)
    : dropout_(cfg.dropout) {
  cfg.validate();
  const Eigen::Index h = cfg.feature_teacher_hidden;
  theta_ = &add_parameter("theta", theta_init(nodes, features, cfg.theta_init, rng));
  w1_ = &add_parameter("w1", fan_in_uniform(features, h, rng));
  b1_ = &add_parameter("b1", DenseMatrix::Zero(1, h));
  w2_ = &add_parameter("w2", fan_in_uniform(h, classes, rng));
  b2_ = &add_parameter("b2", DenseMatrix::Zero(1, classes));
}

ModelOutput FeatureTeacher::forward(Tape& tape, const GraphInput& in, bool training, Rng& rng) {
  require_nodes(kind(), in, theta_->value().rows());
  Var x = impute_features(in.features, in.observed, tape.param(*theta_));
  x = dropout(x, dropout_, training, rng);
  Var r = relu(add_bias(matmul(x, tape.param(*w1_)), tape.param(*b1_)));
  Var z = add_bias(matmul(dropout(r, dropout_, training, rng), tape.param(*w2_)), tape.param(*b2_));
  return {z, r};
}

// --- StructureTeacher ----------------------------------------------------

StructureTeacher::StructureTeacher(Eigen::Index nodes, Eigen::Index pe_dim, int classes, const ModelConfig& cfg,
                                   Rng& rng)
    : dropout_(cfg.dropout) {
  cfg.validate();
  pe_table_ = &add_parameter("pe_table", fan_in_uniform(nodes, pe_dim, rng));
  pe_bias_ = &add_parameter("pe_bias", DenseMatrix::Zero(1, pe_dim));
  w1_ = &add_parameter("w1", fan_in_uniform(pe_dim, cfg.hidden, rng));
  w2_ = &add_parameter("w2", fan_in_uniform(cfg.hidden, classes, rng));
}

ModelOutput StructureTeacher::forward(Tape& tape, const GraphInput& in, bool training, Rng& rng) {
  require_nodes(kind(), in, pe_table_->value().rows());
  Var pe = positional_encoding(tape.param(*pe_table_), tape.param(*pe_bias_));
  Var r = gcn_layer(in.normalized, dropout(pe, dropout_, training, rng), tape.param(*w1_), true);
  Var z = gcn_layer(in.normalized, dropout(r, dropout_, training, rng), tape.param(*w2_), false);
  return {z, r};
}

// --- SingleTeacher -------------------------------------------------------

SingleTeacher::SingleTeacher(Eigen::Index nodes, Eigen::Index features, int classes, const ModelConfig& cfg,
                             Rng& rng)
    : dropout_(cfg.dropout) {
  cfg.validate();
  theta_ = &add_parameter("theta", theta_init(nodes, features, cfg.theta_init, rng));
  w1_ = &add_parameter("w1", fan_in_uniform(features, cfg.hidden, rng));
  w2_ = &add_parameter("w2", fan_in_uniform(cfg.hidden, classes, rng));
}

ModelOutput SingleTeacher::forward(Tape& tape, const GraphInput& in, bool training, Rng& rng) {
  require_nodes(kind(), in, theta_->value().rows());
  Var x = impute_features(in.features, in.observed, tape.param(*theta_));
  Var r = gcn_layer(in.normalized, dropout(x, dropout_, training, rng), tape.param(*w1_), true);
  Var z = gcn_layer(in.normalized, dropout(r, dropout_, training, rng), tape.param(*w2_), false);
  return {z, r};
}

// --- Student -------------------------------------------------------------

Student::Student(Backbone backbone, Eigen::Index features, int classes, const ModelConfig& cfg, Rng& rng)
    : backbone_(backbone), cfg_(cfg), hidden_(cfg.hidden) {
  cfg.validate();
  const Eigen::Index d = features, h = cfg.hidden;
  switch (backbone) {
    case Backbone::GCN:
      add_parameter("w1", fan_in_uniform(d, h, rng));
      add_parameter("w2", fan_in_uniform(h, classes, rng));
      break;
    case Backbone::GAT: {
      const Eigen::Index f = cfg.gat_head_width;
      hidden_ = static_cast<Eigen::Index>(cfg.gat_heads) * f;
      add_parameter("w1", fan_in_uniform(d, hidden_, rng));
      for (int k = 0; k < cfg.gat_heads; ++k) {
        add_parameter("a1_self_" + std::to_string(k), fan_in_uniform(f, 1, rng));
        add_parameter("a1_neigh_" + std::to_string(k), fan_in_uniform(f, 1, rng));
      }
      add_parameter("w2", fan_in_uniform(hidden_, classes, rng));
      add_parameter("a2_self", fan_in_uniform(classes, 1, rng));
      add_parameter("a2_neigh", fan_in_uniform(classes, 1, rng));
      break;
    }
    case Backbone::GraphSAGE:
      add_parameter("w1", fan_in_uniform(2 * d, h, rng));
      add_parameter("w2", fan_in_uniform(2 * h, classes, rng));
      break;
    case Backbone::APPNP:
      add_parameter("w1", fan_in_uniform(d, h, rng));
      add_parameter("b1", DenseMatrix::Zero(1, h));
      add_parameter("w2", fan_in_uniform(h, classes, rng));
      add_parameter("b2", DenseMatrix::Zero(1, classes));
      break;
  }
}

ModelOutput Student::forward(Tape& tape, const GraphInput& in, bool training, Rng& rng) {
  const Eigen::Index d = parameter("w1").value().rows() / (backbone_ == Backbone::GraphSAGE ? 2 : 1);
  if (in.features.cols() != d)
    throw DimensionError(kind() + ": built for " + std::to_string(d) + " features, got " +
                         std::to_string(in.features.cols()));
  switch (backbone_) {
    case Backbone::GCN: return forward_gcn(tape, in, training, rng);
    case Backbone::GAT: return forward_gat(tape, in, training, rng);
    case Backbone::GraphSAGE: return forward_sage(tape, in, training, rng);
    case Backbone::APPNP: return forward_appnp(tape, in, training, rng);
  }
  throw ContractError("unreachable backbone");
}

ModelOutput Student::forward_gcn(Tape& tape, const GraphInput& in, bool training, Rng& rng) {
  Var x = dropout(tape.constant(in.features), cfg_.dropout, training, rng);
  Var r = gcn_layer(in.normalized, x, tape.param(parameter("w1")), true);
  Var z = gcn_layer(in.normalized, dropout(r, cfg_.dropout, training, rng), tape.param(parameter("w2")), false);
  return {z, r};
}

ModelOutput Student::forward_gat(Tape& tape, const GraphInput& in, bool training, Rng& rng) {
  const double slope = cfg_.gat_negative_slope;
  const Eigen::Index f = cfg_.gat_head_width;
  Var x = dropout(tape.constant(in.features), cfg_.dropout, training, rng);
  Var wh = matmul(x, tape.param(parameter("w1")));
  std::vector<Var> heads;
  heads.reserve(static_cast<std::size_t>(cfg_.gat_heads));
  for (int k = 0; k < cfg_.gat_heads; ++k) {
    const std::string s = std::to_string(k);
    heads.push_back(graph_attention(in.attention_pattern, slice_cols(wh, k * f, f),
                                    tape.param(parameter("a1_self_" + s)), tape.param(parameter("a1_neigh_" + s)),
                                    slope));
  }
  Var r = elu(concat_cols(heads));
  Var h2 = matmul(dropout(r, cfg_.dropout, training, rng), tape.param(parameter("w2")));
  Var z = graph_attention(in.attention_pattern, h2, tape.param(parameter("a2_self")),
                          tape.param(parameter("a2_neigh")), slope);
  return {z, r};
}

ModelOutput Student::forward_sage(Tape& tape, const GraphInput& in, bool training, Rng& rng) {
  auto layer = [&](const Var& h, Parameter& w) {
    std::vector<Var> parts{h, sparse_matmul(in.mean_neighbors, h)};
    return matmul(concat_cols(parts), tape.param(w));
  };
  Var x = dropout(tape.constant(in.features), cfg_.dropout, training, rng);
  Var r = relu(layer(x, parameter("w1")));
  Var z = layer(dropout(r, cfg_.dropout, training, rng), parameter("w2"));
  return {z, r};
}

ModelOutput Student::forward_appnp(Tape& tape, const GraphInput& in, bool training, Rng& rng) {
  Var x = dropout(tape.constant(in.features), cfg_.dropout, training, rng);
  Var r = relu(add_bias(matmul(x, tape.param(parameter("w1"))), tape.param(parameter("b1"))));
  Var h0 = add_bias(matmul(dropout(r, cfg_.dropout, training, rng), tape.param(parameter("w2"))),
                    tape.param(parameter("b2")));
  const double a = cfg_.appnp_alpha;
  Var h = h0;
  if (a < 1.0) {
    Var teleport = scale(h0, a);
    for (int t = 0; t < cfg_.appnp_steps; ++t) h = add(scale(sparse_matmul(in.normalized, h), 1.0 - a), teleport);
  }
  return {h, r};
}

// --- checkpoints ---------------------------------------------------------

nlohmann::json checkpoint_to_json(const Model& model) {
  nlohmann::json params = nlohmann::json::array();
  for (const Parameter* p : model.parameters()) {
    const DenseMatrix& v = p->value();
    params.push_back({{"name", p->name()},
                      {"rows", v.rows()},
                      {"cols", v.cols()},
                      {"data", std::vector<double>(v.data(), v.data() + v.size())}});
  }
  return {{"format", "t2gnn.checkpoint"}, {"version", 1}, {"kind", model.kind()}, {"parameters", params}};
}

void load_checkpoint(Model& model, const nlohmann::json& j) {
  try {
    if (j.at("format") != "t2gnn.checkpoint" || j.at("version") != 1)
      throw FormatError("checkpoint: unsupported format or version");
    if (j.at("kind") != model.kind())
      throw FormatError("checkpoint: kind " + j.at("kind").dump() + " does not match " + model.kind());
    const auto& params = j.at("parameters");
    auto targets = model.parameters();
    if (params.size() != targets.size()) throw FormatError("checkpoint: parameter count mismatch");
    std::vector<DenseMatrix> values;
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const auto& e = params[i];
      const std::string name = e.at("name");
      if (name != targets[i]->name())
        throw FormatError("checkpoint: expected parameter " + targets[i]->name() + ", found " + name);
      const Eigen::Index rows = e.at("rows"), cols = e.at("cols");
      if (rows != targets[i]->value().rows() || cols != targets[i]->value().cols())
        throw FormatError("checkpoint: " + name + " has shape " + shape_string(rows, cols) + ", model expects " +
                          shape_string(targets[i]->value()));
      const std::vector<double> data = e.at("data");
      if (static_cast<Eigen::Index>(data.size()) != rows * cols)
        throw FormatError("checkpoint: " + name + " data length mismatch");
      values.emplace_back(Eigen::Map<const DenseMatrix>(data.data(), rows, cols));
    }
    model.restore(values);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Model& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << checkpoint_to_json(model).dump() << '\n';
}

void load_checkpoint(Model& model, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open checkpoint " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("checkpoint " + path.string() + ": " + e.what());
  }
  load_checkpoint(model, j);
}

}  // namespace t2gnn
