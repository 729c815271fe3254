#pragma once

#include "t2gnn/autodiff.hpp"
#include "t2gnn/graph.hpp"

#include <nlohmann/json.hpp>

#include <deque>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace t2gnn {

enum class Backbone { GCN, GAT, GraphSAGE, APPNP };

/// Accepts "gcn", "gat", "sage"/"graphsage", "appnp" (case-insensitive).
Backbone parse_backbone(std::string_view name);
std::string backbone_name(Backbone b);

struct ModelConfig {
  int hidden = 64;                    // students and the structure teacher
  int feature_teacher_hidden = 512;
  double dropout = 0.5;
  int gat_heads = 8;
  int gat_head_width = 8;
  double gat_negative_slope = 0.2;
  int appnp_steps = 10;
  double appnp_alpha = 0.1;
  double theta_init = 0.01;           // Θ ~ U(−theta_init, theta_init)

  void validate() const;
};

/// Logits Z and the last hidden representation R, both n rows.
struct ModelOutput {
  Var logits;
  Var intermediate;
};

struct OutputValues {
  DenseMatrix logits;
  DenseMatrix intermediate;
};

OutputValues values_of(const ModelOutput& out);

/// Graph operands precomputed once per graph. `adjacency` is either the masked
/// A (students, feature teacher) or the enhanced Ā (structure teacher, singleT).
struct GraphInput {
  DenseMatrix features;               // unobserved entries hold 0
  BoolMatrix observed;
  SparseRowMatrix adjacency;
  SparseRowMatrix normalized;         // D̃^{-1/2}(adjacency + I)D̃^{-1/2}
  SparseRowMatrix mean_neighbors;     // row-normalized adjacency
  SparseRowMatrix attention_pattern;  // adjacency + I, unit weights

  static GraphInput build(const IncompleteGraph& g);
  static GraphInput build(const IncompleteGraph& g, SparseRowMatrix adjacency);

  Eigen::Index num_nodes() const { return features.rows(); }
};

// --- building blocks ------------------------------------------------------

/// X̄: observed entries of x, Θ elsewhere; only unobserved entries pass gradient to Θ.
Var impute_features(const DenseMatrix& x, const BoolMatrix& observed, const Var& theta);

/// Row v = W(v, :) + b. `table` is n×d (row v plays the role of W·onehot(v)).
Var positional_encoding(const Var& table, const Var& bias);

/// act(adj · h · W).
Var gcn_layer(const SparseRowMatrix& adj_normalized, const Var& h, const Var& weight, bool activate);

/// U(−1/√fan_in, 1/√fan_in).
DenseMatrix fan_in_uniform(Eigen::Index fan_in, Eigen::Index fan_out, Rng& rng);

// --- models ---------------------------------------------------------------

/// Owns its parameters; pointers returned by parameters() stay valid for the
/// model's lifetime.
class Model {
 public:
  virtual ~Model() = default;
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  virtual ModelOutput forward(Tape& tape, const GraphInput& in, bool training, Rng& rng) = 0;
  virtual std::string kind() const = 0;

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  Parameter& parameter(std::string_view name);

  std::vector<DenseMatrix> snapshot() const;
  void restore(const std::vector<DenseMatrix>& values);

 protected:
  Model() = default;
  Parameter& add_parameter(std::string name, DenseMatrix value);

 private:
  std::deque<Parameter> params_;
};

/// MLP over imputed features; ignores the adjacency.
class FeatureTeacher final : public Model {
 public:
  FeatureTeacher(Eigen::Index nodes, Eigen::Index features, int classes, const ModelConfig& cfg, Rng& rng);
  ModelOutput forward(Tape& tape, const GraphInput& in, bool training, Rng& rng) override;
  std::string kind() const override { return "feature_teacher"; }

 private:
  double dropout_;
  Parameter* theta_;
  Parameter* w1_;
  Parameter* b1_;
  Parameter* w2_;
  Parameter* b2_;
};

/// Two-layer GCN over `in.normalized` (built from Ā) with positional encodings
/// in place of features; never reads in.features.
class StructureTeacher final : public Model {
 public:
  StructureTeacher(Eigen::Index nodes, Eigen::Index pe_dim, int classes, const ModelConfig& cfg, Rng& rng);
  ModelOutput forward(Tape& tape, const GraphInput& in, bool training, Rng& rng) override;
  std::string kind() const override { return "structure_teacher"; }

 private:
  double dropout_;
  Parameter* pe_table_;
  Parameter* pe_bias_;
  Parameter* w1_;
  Parameter* w2_;
};

/// Combined teacher: GCN over Ā consuming imputed features.
class SingleTeacher final : public Model {
 public:
  SingleTeacher(Eigen::Index nodes, Eigen::Index features, int classes, const ModelConfig& cfg, Rng& rng);
  ModelOutput forward(Tape& tape, const GraphInput& in, bool training, Rng& rng) override;
  std::string kind() const override { return "single_teacher"; }

 private:
  double dropout_;
  Parameter* theta_;
  Parameter* w1_;
  Parameter* w2_;
};

class Student final : public Model {
 public:
  Student(Backbone backbone, Eigen::Index features, int classes, const ModelConfig& cfg, Rng& rng);
  ModelOutput forward(Tape& tape, const GraphInput& in, bool training, Rng& rng) override;
  std::string kind() const override { return "student:" + backbone_name(backbone_); }
  Backbone backbone() const { return backbone_; }
  Eigen::Index hidden_width() const { return hidden_; }

 private:
  ModelOutput forward_gcn(Tape& tape, const GraphInput& in, bool training, Rng& rng);
  ModelOutput forward_gat(Tape& tape, const GraphInput& in, bool training, Rng& rng);
  ModelOutput forward_sage(Tape& tape, const GraphInput& in, bool training, Rng& rng);
  ModelOutput forward_appnp(Tape& tape, const GraphInput& in, bool training, Rng& rng);

  Backbone backbone_;
  ModelConfig cfg_;
  Eigen::Index hidden_;
};

// --- checkpoints ----------------------------------------------------------

nlohmann::json checkpoint_to_json(const Model& model);
/// Shapes and names must match the model exactly (FormatError otherwise).
void load_checkpoint(Model& model, const nlohmann::json& j);
void save_checkpoint(const Model& model, const std::filesystem::path& path);
void load_checkpoint(Model& model, const std::filesystem::path& path);

}  // namespace t2gnn
