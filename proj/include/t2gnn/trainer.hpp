#pragma once

#include "t2gnn/distill.hpp"
#include "t2gnn/graph.hpp"
#include "t2gnn/models.hpp"
#include "t2gnn/optim.hpp"
#include "t2gnn/ppr.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace t2gnn {

struct TrainConfig {
  double lr = 0.001;
  double weight_decay = 0.0005;
  int max_epochs = 500;
  int patience = 100;  // epochs without a strictly better validation accuracy

  void validate(const std::string& field = "train") const;
  AdamConfig adam() const;
};

enum class VariantMode { Full, SingleT, Online, NoTeacherStr, NoTeacherFea, NoDistillLog, NoDistillMid, StudentOnly };

VariantMode parse_variant(std::string_view name);
std::string variant_name(VariantMode mode);

/// Predicted class per row; ties go to the lowest class index.
std::vector<int> predict(const DenseMatrix& logits);
/// Fraction of index rows whose prediction equals the label.
double evaluate(const DenseMatrix& logits, std::span<const int> labels, std::span<const int> index);

/// Progress of one early-stopped training run. Accuracies belong to best_epoch.
struct TrainRecord {
  int best_epoch = 0;
  int epochs_run = 0;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
  double test_accuracy = 0.0;
};

/// Teacher outputs captured from the best-validation snapshot, plus the nodes
/// whose intermediate row is nonzero (anchors for the contrastive term).
struct FrozenTeacher {
  DenseMatrix logits;
  DenseMatrix intermediate;
  std::vector<int> nodes;

  static FrozenTeacher from(OutputValues values);
};

struct TeacherRun {
  FrozenTeacher outputs;
  TrainRecord record;
};

/// Full-batch Adam on training-node cross-entropy with early stopping; the
/// model is left at its best-validation parameters. Epoch 0 is the initial model.
TeacherRun train_teacher(Model& model, const GraphInput& in, std::span<const int> labels, const Split& split,
                         const TrainConfig& cfg, Rng& rng);

struct StudentTeachers {
  std::optional<FrozenTeacher> feature;
  std::optional<FrozenTeacher> structure;
  std::optional<FrozenTeacher> single;
};

/// Offline distillation into the student. Teacher outputs enter the tape as
/// constants, so no gradient reaches any teacher.
TrainRecord train_student(Student& student, const GraphInput& in, std::span<const int> labels, const Split& split,
                          const StudentTeachers& teachers, const DistillConfig& dcfg, const TrainConfig& cfg,
                          VariantMode mode, Rng& rng);

/// Joint end-to-end training of both teachers and the student under one
/// optimizer with live teacher outputs. Early stopping follows the student.
TrainRecord train_online(FeatureTeacher& ft, StructureTeacher& st, Student& student, const GraphInput& masked,
                         const GraphInput& enhanced, std::span<const int> labels, const Split& split,
                         const DistillConfig& dcfg, const TrainConfig& cfg, Rng& rng);

// --- experiments ------------------------------------------------------------

/// Pretrained teacher runs shared between runs that differ only in settings the
/// teachers never see (a sweep over k, ρ, λ). Thread-safe.
class TeacherCache {
 public:
  std::optional<TeacherRun> find(const std::string& key) const;
  void store(const std::string& key, const TeacherRun& run);
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, TeacherRun> runs_;
};

struct RunSpec {
  MaskSpec mask;
  bool fixed_masks = false;        // one mask for every split instead of one per split
  PprConfig ppr;
  bool symmetrize = true;
  DistillConfig distill;
  TrainConfig teacher_train;
  TrainConfig student_train;
  ModelConfig model;
  Backbone backbone = Backbone::GCN;
  VariantMode mode = VariantMode::Full;
  int n_splits = 10;
  SplitOptions split;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::filesystem::path checkpoint_dir;  // teachers saved and reloaded here when set
  std::shared_ptr<TeacherCache> teacher_cache;  // optional; results are identical with or without

  void validate() const;
};

struct SplitResult {
  int split = 0;
  TrainRecord student;
  std::optional<TrainRecord> feature_teacher;
  std::optional<TrainRecord> structure_teacher;
  std::optional<TrainRecord> single_teacher;
  std::uint64_t mask_seed = 0;
};

struct RunResult {
  nlohmann::json config;           // snapshot supplied by the caller
  std::vector<SplitResult> splits;
  double mean = 0.0;               // test accuracy
  double std = 0.0;                // population standard deviation
  double val_mean = 0.0;
  double wall_seconds = 0.0;       // not part of to_json()

  std::vector<double> test_accuracies() const;
  /// Recomputes mean, std, and val_mean from the splits.
  void aggregate();

  nlohmann::json to_json() const;
  static RunResult from_json(const nlohmann::json& j);
};

/// Mean and population standard deviation, summed in index order.
std::pair<double, double> mean_std(std::span<const double> values);

/// Seed of the mask used by split s.
std::uint64_t mask_seed_for(const RunSpec& spec, int split);

/// One split: mask, enhance, pretrain teachers, distill, evaluate.
SplitResult run_split(const IncompleteGraph& raw, const Split& split, int split_index, const RunSpec& spec);

/// All splits (parallel up to spec.jobs, results ordered by split index).
RunResult run_experiment(const IncompleteGraph& raw, const RunSpec& spec);

}  // namespace t2gnn
