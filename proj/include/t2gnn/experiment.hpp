#pragma once

#include "t2gnn/graph.hpp"
#include "t2gnn/trainer.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace t2gnn {

enum class LogLevel { Info = 0, Warning = 1 };
using Logger = std::function<void(LogLevel, const std::string&)>;

struct DatasetConfig {
  std::string name;
  std::string format;                      // planetoid, geom_gcn, edgelist, bundle; empty = from name
  std::filesystem::path root = "data";
  std::map<std::string, std::filesystem::path> paths;  // relative entries resolve against root

  std::string resolved_format() const;
  /// Every file the format needs; missing entries take the per-format default.
  std::map<std::string, std::filesystem::path> resolved_paths() const;
};

IncompleteGraph load_dataset(const DatasetConfig& dataset, LoadReport* report = nullptr);

struct SweepGrid {
  std::vector<int> top_k;
  std::vector<double> rho;
  std::vector<double> lambda;
  std::vector<double> missing_rate;  // applied to features and edges alike

  bool empty() const { return top_k.empty() && rho.empty() && lambda.empty() && missing_rate.empty(); }
};

struct ExperimentConfig {
  DatasetConfig dataset;
  RunSpec spec;
  std::filesystem::path output = "runs";
  SweepGrid sweep;

  /// Unknown fields and mistyped values are rejected with the dotted field name.
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
  /// Fields that determine results: everything except output, sweep, jobs, and checkpoint_dir.
  nlohmann::json snapshot() const;

  /// Dotted-key override; the value is read as JSON, falling back to a bare string.
  void set(const std::string& key, const std::string& value);
  /// T2GNN_DATA_ROOT replaces dataset.root.
  void apply_environment();
  /// Ranges, referenced paths, and sweep values, all before any computation.
  void validate() const;
  /// output, placed under T2GNN_OUTPUT_ROOT when that is set and output is relative.
  std::filesystem::path output_dir() const;
};

struct RunOutcome {
  RunResult result;
  std::filesystem::path dir;
};

/// Writes result.json, table.txt, and timing.json under the output directory.
RunOutcome cmd_run(const ExperimentConfig& cfg, const Logger& log = {});

struct SweepPoint {
  std::string name;
  nlohmann::json params;
  RunResult result;
};

struct SweepOutcome {
  std::vector<SweepPoint> points;  // grid order
  nlohmann::json summary;          // ranked by mean validation accuracy
};

/// One run per grid point in <out>/<point>/, plus sweep_summary.json.
SweepOutcome cmd_sweep(const ExperimentConfig& cfg, const Logger& log = {});

/// full and the four w/o_ variants (plus singleT and online when asked) under
/// shared masks, one directory each, plus ablation.json.
nlohmann::json cmd_ablate(const ExperimentConfig& cfg, bool with_baselines = false, const Logger& log = {});

struct Report {
  std::string text;
  std::string csv;
};

/// Dataset × method table over every result.json below dir.
Report cmd_report(const std::filesystem::path& dir);

/// Masked graph and splits as a bundle; returns the file written.
std::filesystem::path cmd_mask(const ExperimentConfig& cfg, const Logger& log = {});
/// Enhanced adjacency of the masked graph as a weighted edge list.
std::filesystem::path cmd_ppr(const ExperimentConfig& cfg, const Logger& log = {});

/// Human-readable per-split accuracy table.
std::string format_table(const RunResult& result);

}  // namespace t2gnn
