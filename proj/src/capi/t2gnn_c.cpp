#include "t2gnn.h"

#include "t2gnn/error.hpp"
#include "t2gnn/experiment.hpp"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>

struct t2gnn_experiment {
  t2gnn::ExperimentConfig config;
  t2gnn_log_fn log_fn = nullptr;
  void* log_user = nullptr;

  t2gnn::Logger logger() const {
    if (!log_fn) return {};
    auto fn = log_fn;
    auto user = log_user;
    return [fn, user](t2gnn::LogLevel level, const std::string& msg) { fn(static_cast<int>(level), msg.c_str(), user); };
  }
};

namespace {

thread_local std::string last_error;

char* copy_out(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

void put(char** out, const std::string& s) {
  if (out) *out = copy_out(s);
}

template <class F>
t2gnn_status guarded(F&& f) {
  last_error.clear();
  try {
    f();
    return T2GNN_OK;
  } catch (const t2gnn::ConfigError& e) {
    last_error = e.what();
    return T2GNN_ERR_CONFIG;
  } catch (const nlohmann::json::exception& e) {
    last_error = std::string("invalid JSON: ") + e.what();
    return T2GNN_ERR_CONFIG;
  } catch (const std::exception& e) {
    last_error = e.what();
    return T2GNN_ERR_RUNTIME;
  } catch (...) {
    last_error = "unknown error";
    return T2GNN_ERR_RUNTIME;
  }
}

t2gnn_status null_argument(const char* what) {
  last_error = std::string(what) + " must not be NULL";
  return T2GNN_ERR_CONFIG;
}

}  // namespace

extern "C" {

const char* t2gnn_version(void) { return T2GNN_VERSION; }

const char* t2gnn_last_error(void) { return last_error.c_str(); }

void t2gnn_string_free(char* s) { std::free(s); }

t2gnn_status t2gnn_experiment_load(const char* config_path, t2gnn_experiment** out) {
  if (!config_path || !out) return null_argument("config_path and out");
  *out = nullptr;
  return guarded([&] {
    auto exp = std::make_unique<t2gnn_experiment>();
    exp->config = t2gnn::ExperimentConfig::load(config_path);
    exp->config.apply_environment();
    *out = exp.release();
  });
}

t2gnn_status t2gnn_experiment_from_json(const char* config_json, t2gnn_experiment** out) {
  if (!config_json || !out) return null_argument("config_json and out");
  *out = nullptr;
  return guarded([&] {
    auto exp = std::make_unique<t2gnn_experiment>();
    exp->config = t2gnn::ExperimentConfig::from_json(nlohmann::json::parse(config_json));
    exp->config.apply_environment();
    *out = exp.release();
  });
}

void t2gnn_experiment_destroy(t2gnn_experiment* exp) { delete exp; }

t2gnn_status t2gnn_experiment_set(t2gnn_experiment* exp, const char* key, const char* value) {
  if (!exp || !key || !value) return null_argument("exp, key, and value");
  return guarded([&] { exp->config.set(key, value); });
}

t2gnn_status t2gnn_experiment_validate(const t2gnn_experiment* exp) {
  if (!exp) return null_argument("exp");
  return guarded([&] { exp->config.validate(); });
}

t2gnn_status t2gnn_experiment_config_json(const t2gnn_experiment* exp, char** out) {
  if (!exp || !out) return null_argument("exp and out");
  return guarded([&] { put(out, exp->config.to_json().dump(2)); });
}

void t2gnn_experiment_set_logger(t2gnn_experiment* exp, t2gnn_log_fn fn, void* user) {
  if (!exp) return;
  exp->log_fn = fn;
  exp->log_user = user;
}

t2gnn_status t2gnn_experiment_run(t2gnn_experiment* exp, char** result_json, char** table_text) {
  if (!exp) return null_argument("exp");
  return guarded([&] {
    auto outcome = t2gnn::cmd_run(exp->config, exp->logger());
    const std::string json = outcome.result.to_json().dump(2) + "\n";
    const std::string table = t2gnn::format_table(outcome.result);
    put(result_json, json);
    try {
      put(table_text, table);
    } catch (...) {
      if (result_json) std::free(*result_json);
      throw;
    }
  });
}

t2gnn_status t2gnn_experiment_sweep(t2gnn_experiment* exp, char** summary_json) {
  if (!exp) return null_argument("exp");
  return guarded([&] { put(summary_json, t2gnn::cmd_sweep(exp->config, exp->logger()).summary.dump(2) + "\n"); });
}

t2gnn_status t2gnn_experiment_ablate(t2gnn_experiment* exp, int with_baselines, char** summary_json) {
  if (!exp) return null_argument("exp");
  return guarded([&] {
    put(summary_json, t2gnn::cmd_ablate(exp->config, with_baselines != 0, exp->logger()).dump(2) + "\n");
  });
}

t2gnn_status t2gnn_experiment_write_mask_bundle(t2gnn_experiment* exp, char** path_out) {
  if (!exp) return null_argument("exp");
  return guarded([&] { put(path_out, t2gnn::cmd_mask(exp->config, exp->logger()).string()); });
}

t2gnn_status t2gnn_experiment_write_enhanced_adjacency(t2gnn_experiment* exp, char** path_out) {
  if (!exp) return null_argument("exp");
  return guarded([&] { put(path_out, t2gnn::cmd_ppr(exp->config, exp->logger()).string()); });
}

t2gnn_status t2gnn_report(const char* results_dir, const char* csv_path, char** text_out) {
  if (!results_dir) return null_argument("results_dir");
  return guarded([&] {
    auto report = t2gnn::cmd_report(results_dir);
    if (csv_path) {
      std::ofstream csv(csv_path, std::ios::binary);
      if (!csv || !(csv << report.csv)) throw t2gnn::Error(std::string("cannot write ") + csv_path);
    }
    put(text_out, report.text);
  });
}

}  // extern "C"
