#include "t2gnn.h"

#include "CLI11.hpp"

#include <cstdio>
#include <string>
#include <vector>

namespace {

struct Options {
  std::string config;
  std::string out;
  int jobs = 0;
  std::vector<std::string> overrides;
  bool quiet = false;
  bool with_baselines = false;
  std::string results_dir;
  std::string csv;
};

void log_to_stderr(int level, const char* message, void*) {
  std::fprintf(stderr, "%s%s\n", level == T2GNN_LOG_WARNING ? "warning: " : "", message);
}

int fail(t2gnn_status status) {
  std::fprintf(stderr, "error: %s\n", t2gnn_last_error());
  return static_cast<int>(status);
}

// Owns one experiment handle for the duration of a command.
class Experiment {
 public:
  ~Experiment() { t2gnn_experiment_destroy(handle_); }

  t2gnn_status open(const Options& opt) {
    if (auto s = t2gnn_experiment_load(opt.config.c_str(), &handle_)) return s;
    for (const auto& kv : opt.overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) {
        std::fprintf(stderr, "error: --set expects key=value, got '%s'\n", kv.c_str());
        return T2GNN_ERR_CONFIG;
      }
      const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
      if (auto s = t2gnn_experiment_set(handle_, key.c_str(), value.c_str())) return s;
    }
    if (!opt.out.empty())
      if (auto s = t2gnn_experiment_set(handle_, "output", opt.out.c_str())) return s;
    if (opt.jobs > 0)
      if (auto s = t2gnn_experiment_set(handle_, "jobs", std::to_string(opt.jobs).c_str())) return s;
    if (!opt.quiet) t2gnn_experiment_set_logger(handle_, log_to_stderr, nullptr);
    return t2gnn_experiment_validate(handle_);
  }

  t2gnn_experiment* get() const { return handle_; }

 private:
  t2gnn_experiment* handle_ = nullptr;
};

void print_and_free(char* s) {
  if (!s) return;
  std::fputs(s, stdout);
  t2gnn_string_free(s);
}

void add_experiment_options(CLI::App* cmd, Options& opt) {
  cmd->add_option("-c,--config", opt.config, "experiment config (JSON)")->required();
  cmd->add_option("-o,--out", opt.out, "output directory (overrides the config)");
  cmd->add_option("-j,--jobs", opt.jobs, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("-s,--set", opt.overrides, "override a config field, e.g. --set distill.lambda=0.3");
  cmd->add_flag("-q,--quiet", opt.quiet, "no progress messages");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Teacher-student distillation for graphs with missing features and edges"};
  app.set_version_flag("--version", std::string(t2gnn_version()));
  app.require_subcommand(1);
  Options opt;

  auto* run = app.add_subcommand("run", "train and evaluate over all splits; writes result.json and table.txt");
  add_experiment_options(run, opt);
  auto* sweep = app.add_subcommand("sweep", "one run per point of the config's sweep grid, ranked by validation");
  add_experiment_options(sweep, opt);
  auto* ablate = app.add_subcommand("ablate", "full model and the four ablations under shared masks");
  add_experiment_options(ablate, opt);
  ablate->add_flag("--with-baselines", opt.with_baselines, "also run the singleT and online variants");
  auto* report = app.add_subcommand("report", "dataset x method table over a directory of results");
  report->add_option("results", opt.results_dir, "directory searched for result.json files")->required();
  report->add_option("--csv", opt.csv, "CSV output path (default <results>/report.csv)");
  auto* mask = app.add_subcommand("mask", "write the masked graph and its splits as a bundle");
  add_experiment_options(mask, opt);
  auto* ppr = app.add_subcommand("ppr", "write the PPR-enhanced adjacency of the masked graph");
  add_experiment_options(ppr, opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return T2GNN_ERR_CONFIG;
  }

  if (report->parsed()) {
    const std::string csv = opt.csv.empty() ? opt.results_dir + "/report.csv" : opt.csv;
    char* text = nullptr;
    if (auto s = t2gnn_report(opt.results_dir.c_str(), csv.c_str(), &text)) return fail(s);
    print_and_free(text);
    return 0;
  }

  Experiment exp;
  if (auto s = exp.open(opt)) return fail(s);

  t2gnn_status status = T2GNN_OK;
  char* text = nullptr;
  if (run->parsed()) {
    status = t2gnn_experiment_run(exp.get(), nullptr, &text);
  } else if (sweep->parsed()) {
    status = t2gnn_experiment_sweep(exp.get(), &text);
  } else if (ablate->parsed()) {
    status = t2gnn_experiment_ablate(exp.get(), opt.with_baselines ? 1 : 0, &text);
  } else if (mask->parsed()) {
    status = t2gnn_experiment_write_mask_bundle(exp.get(), &text);
  } else if (ppr->parsed()) {
    status = t2gnn_experiment_write_enhanced_adjacency(exp.get(), &text);
  }
  if (status != T2GNN_OK) return fail(status);
  print_and_free(text);
  if (mask->parsed() || ppr->parsed()) std::fputs("\n", stdout);
  return 0;
}
