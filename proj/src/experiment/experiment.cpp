#include "t2gnn/experiment.hpp"

#include "t2gnn/error.hpp"
#include "t2gnn/rng.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace t2gnn {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::map<std::string, std::vector<std::string>>& format_keys() {
  static const std::map<std::string, std::vector<std::string>> keys = {
      {"planetoid", {"content", "cites"}},
      {"geom_gcn", {"nodes", "edges"}},
      {"edgelist", {"edges", "features", "labels"}},
      {"bundle", {"bundle"}},
  };
  return keys;
}

fs::path default_path(const std::string& name, const std::string& format, const std::string& key) {
  const fs::path dir = name;
  if (format == "planetoid") return dir / (name + "." + key);
  if (format == "geom_gcn") return dir / (key == "nodes" ? "out1_node_feature_label.txt" : "out1_graph_edges.txt");
  if (format == "edgelist") return dir / (key == "edges" ? "edges.txt" : key + ".csv");
  return dir / "bundle.json";
}

std::string mask_mode_name(FeatureMaskMode m) { return m == FeatureMaskMode::Entrywise ? "entrywise" : "nodewise"; }

FeatureMaskMode parse_mask_mode(const std::string& s) {
  if (s == "entrywise") return FeatureMaskMode::Entrywise;
  if (s == "nodewise") return FeatureMaskMode::Nodewise;
  throw ConfigError("mask.feature_mode must be \"entrywise\" or \"nodewise\", got \"" + s + "\"");
}

std::string type_name(const json& j) {
  if (j.is_boolean()) return "a boolean";
  if (j.is_number_integer() || j.is_number_unsigned()) return "an integer";
  if (j.is_number()) return "a number";
  if (j.is_string()) return "a string";
  if (j.is_array()) return "an array";
  if (j.is_object()) return "an object";
  return "null";
}

// Checks one user value against the default of the same field.
void check_type(const json& def, const json& val, const std::string& key) {
  bool ok = false;
  if (def.is_boolean()) ok = val.is_boolean();
  else if (def.is_number_integer() || def.is_number_unsigned()) ok = val.is_number_integer() || val.is_number_unsigned();
  else if (def.is_number()) ok = val.is_number();
  else if (def.is_string()) ok = val.is_string();
  else if (def.is_array()) ok = val.is_array();
  if (!ok) throw ConfigError(key + " must be " + type_name(def) + ", got " + type_name(val));
}

// Overlays user onto the defaults, rejecting fields the defaults lack.
void merge(json& base, const json& user, const std::string& prefix) {
  if (!user.is_object()) throw ConfigError((prefix.empty() ? "config" : prefix) + " must be an object");
  for (const auto& [k, v] : user.items()) {
    const std::string key = prefix.empty() ? k : prefix + "." + k;
    if (key == "dataset.paths") {
      if (!v.is_object()) throw ConfigError("dataset.paths must be an object");
      for (const auto& [pk, pv] : v.items())
        if (!pv.is_string()) throw ConfigError("dataset.paths." + pk + " must be a string");
      base[k] = v;
      continue;
    }
    if (key == "distill.negatives") {
      if (v.is_string()) base[k] = v;
      else if (v.is_number_integer() || v.is_number_unsigned()) base[k] = std::to_string(v.get<long long>());
      else throw ConfigError("distill.negatives must be \"auto\", \"all\", or a positive integer");
      continue;
    }
    if (key == "seed") {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        throw ConfigError("seed must be a nonnegative integer");
      base[k] = v.get<std::uint64_t>();
      continue;
    }
    if (!base.contains(k)) throw ConfigError("unknown field '" + key + "'");
    json& slot = base[k];
    if (slot.is_object()) {
      merge(slot, v, key);
      continue;
    }
    check_type(slot, v, key);
    if (slot.is_array()) {
      for (const auto& e : v) {
        const bool want_int = key == "sweep.top_k";
        if (want_int ? !(e.is_number_integer() || e.is_number_unsigned()) : !e.is_number())
          throw ConfigError(key + " entries must be " + (want_int ? "integers" : "numbers"));
      }
    }
    slot = v;
  }
}

json train_json(const TrainConfig& t) {
  return {{"lr", t.lr}, {"weight_decay", t.weight_decay}, {"max_epochs", t.max_epochs}, {"patience", t.patience}};
}

TrainConfig train_from(const json& j) {
  TrainConfig t;
  t.lr = j.at("lr").get<double>();
  t.weight_decay = j.at("weight_decay").get<double>();
  t.max_epochs = j.at("max_epochs").get<int>();
  t.patience = j.at("patience").get<int>();
  return t;
}

std::string method_label(const json& config) {
  std::string bb = config.at("backbone").get<std::string>();
  std::transform(bb.begin(), bb.end(), bb.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  const std::string mode = config.at("mode").get<std::string>();
  if (mode == "student_only") return bb;
  if (mode == "full") return "T2-" + bb;
  return "T2-" + bb + "/" + mode;
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  if (!out) throw Error("failed writing " + path.string());
}

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
  return buf;
}

std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

void emit(const Logger& log, const std::string& msg) {
  if (log) log(LogLevel::Info, msg);
}

RunOutcome run_into(const ExperimentConfig& cfg, const IncompleteGraph& raw, const fs::path& dir, const Logger& log) {
  RunResult result = run_experiment(raw, cfg.spec);
  result.config = cfg.snapshot();
  write_file(dir / "result.json", result.to_json().dump(2) + "\n");
  write_file(dir / "table.txt", format_table(result));
  write_file(dir / "timing.json", json{{"wall_seconds", result.wall_seconds}}.dump(2) + "\n");
  emit(log, "wrote " + (dir / "result.json").string() + ": test " + percent(result.mean) + " ± " +
                percent(result.std));
  return {std::move(result), dir};
}

IncompleteGraph masked_graph(const ExperimentConfig& cfg, const IncompleteGraph& raw) {
  MaskSpec mask = cfg.spec.mask;
  mask.seed = mask_seed_for(cfg.spec, 0);
  return apply_masks(raw, mask);
}

}  // namespace

std::string DatasetConfig::resolved_format() const {
  if (!format.empty()) {
    if (!format_keys().count(format))
      throw ConfigError("dataset.format must be planetoid, geom_gcn, edgelist, or bundle, got \"" + format + "\"");
    return format;
  }
  static const std::set<std::string> planetoid = {"cora", "citeseer", "pubmed"};
  static const std::set<std::string> geom = {"texas", "cornell", "wisconsin", "chameleon", "squirrel", "film"};
  if (planetoid.count(name)) return "planetoid";
  if (geom.count(name)) return "geom_gcn";
  throw ConfigError("dataset.format is required for dataset \"" + name + "\"");
}

std::map<std::string, fs::path> DatasetConfig::resolved_paths() const {
  const std::string fmt = resolved_format();
  const auto& keys = format_keys().at(fmt);
  for (const auto& [k, p] : paths) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end())
      throw ConfigError("dataset.paths." + k + " is not used by format " + fmt);
  }
  std::map<std::string, fs::path> out;
  for (const auto& k : keys) {
    auto it = paths.find(k);
    fs::path p = it != paths.end() ? it->second : default_path(name, fmt, k);
    out[k] = p.is_absolute() ? p : root / p;
  }
  return out;
}

IncompleteGraph load_dataset(const DatasetConfig& dataset, LoadReport* report) {
  const std::string fmt = dataset.resolved_format();
  const auto p = dataset.resolved_paths();
  if (fmt == "planetoid") return load_planetoid(p.at("content"), p.at("cites"), report);
  if (fmt == "geom_gcn") return load_geom_gcn(p.at("nodes"), p.at("edges"), report);
  if (fmt == "edgelist") return load_edgelist(p.at("edges"), p.at("features"), p.at("labels"), report);
  return read_graph_bundle(p.at("bundle"));
}

json ExperimentConfig::to_json() const {
  json paths = json::object();
  for (const auto& [k, p] : dataset.paths) paths[k] = p.string();
  const auto& d = spec.distill;
  const auto& m = spec.model;
  return {
      {"dataset", {{"name", dataset.name}, {"format", dataset.format}, {"root", dataset.root.string()}, {"paths", paths}}},
      {"mask",
       {{"feature_missing_rate", spec.mask.feature_missing_rate},
        {"edge_missing_rate", spec.mask.edge_missing_rate},
        {"feature_mode", mask_mode_name(spec.mask.feature_mode)},
        {"fixed", spec.fixed_masks}}},
      {"ppr",
       {{"alpha", spec.ppr.alpha}, {"epsilon", spec.ppr.epsilon}, {"top_k", spec.ppr.top_k},
        {"symmetrize", spec.symmetrize}}},
      {"distill",
       {{"rho", d.rho},
        {"rho_prime", d.rho_prime},
        {"lambda", d.lambda},
        {"negatives", d.negatives.to_string()},
        {"negative_count", d.negatives.count},
        {"negatives_auto_threshold", d.negatives.auto_threshold},
        {"l2_mode", d.l2_mode},
        {"use_logit", d.use_logit},
        {"use_mid", d.use_mid},
        {"logit_weight", d.logit_weight},
        {"mid_weight", d.mid_weight}}},
      {"teacher_train", train_json(spec.teacher_train)},
      {"student_train", train_json(spec.student_train)},
      {"model",
       {{"hidden", m.hidden},
        {"feature_teacher_hidden", m.feature_teacher_hidden},
        {"dropout", m.dropout},
        {"gat_heads", m.gat_heads},
        {"gat_head_width", m.gat_head_width},
        {"gat_negative_slope", m.gat_negative_slope},
        {"appnp_steps", m.appnp_steps},
        {"appnp_alpha", m.appnp_alpha},
        {"theta_init", m.theta_init}}},
      {"backbone", backbone_name(spec.backbone)},
      {"mode", variant_name(spec.mode)},
      {"splits",
       {{"count", spec.n_splits},
        {"train_fraction", spec.split.train_fraction},
        {"val_fraction", spec.split.val_fraction},
        {"min_class_size", spec.split.min_class_size}}},
      {"seed", spec.seed},
      {"jobs", spec.jobs},
      {"checkpoint_dir", spec.checkpoint_dir.string()},
      {"output", output.string()},
      {"sweep",
       {{"top_k", sweep.top_k}, {"rho", sweep.rho}, {"lambda", sweep.lambda}, {"missing_rate", sweep.missing_rate}}},
  };
}

json ExperimentConfig::snapshot() const {
  json j = to_json();
  for (const char* k : {"output", "sweep", "jobs", "checkpoint_dir"}) j.erase(k);
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& user) {
  json j = ExperimentConfig{}.to_json();
  merge(j, user, "");
  ExperimentConfig c;
  try {
    const auto& ds = j.at("dataset");
    c.dataset.name = ds.at("name").get<std::string>();
    c.dataset.format = ds.at("format").get<std::string>();
    c.dataset.root = ds.at("root").get<std::string>();
    for (const auto& [k, v] : ds.at("paths").items()) c.dataset.paths[k] = v.get<std::string>();

    const auto& mk = j.at("mask");
    c.spec.mask.feature_missing_rate = mk.at("feature_missing_rate").get<double>();
    c.spec.mask.edge_missing_rate = mk.at("edge_missing_rate").get<double>();
    c.spec.mask.feature_mode = parse_mask_mode(mk.at("feature_mode").get<std::string>());
    c.spec.fixed_masks = mk.at("fixed").get<bool>();

    const auto& pp = j.at("ppr");
    c.spec.ppr.alpha = pp.at("alpha").get<double>();
    c.spec.ppr.epsilon = pp.at("epsilon").get<double>();
    c.spec.ppr.top_k = pp.at("top_k").get<int>();
    c.spec.symmetrize = pp.at("symmetrize").get<bool>();

    const auto& di = j.at("distill");
    auto& d = c.spec.distill;
    d.rho = di.at("rho").get<double>();
    d.rho_prime = di.at("rho_prime").get<double>();
    d.lambda = di.at("lambda").get<double>();
    d.negatives = NegativePolicy::parse(di.at("negatives").get<std::string>());
    if (d.negatives.kind != NegativePolicy::Kind::Sampled) d.negatives.count = di.at("negative_count").get<int>();
    d.negatives.auto_threshold = di.at("negatives_auto_threshold").get<int>();
    d.l2_mode = di.at("l2_mode").get<bool>();
    d.use_logit = di.at("use_logit").get<bool>();
    d.use_mid = di.at("use_mid").get<bool>();
    d.logit_weight = di.at("logit_weight").get<double>();
    d.mid_weight = di.at("mid_weight").get<double>();

    c.spec.teacher_train = train_from(j.at("teacher_train"));
    c.spec.student_train = train_from(j.at("student_train"));

    const auto& mo = j.at("model");
    auto& m = c.spec.model;
    m.hidden = mo.at("hidden").get<int>();
    m.feature_teacher_hidden = mo.at("feature_teacher_hidden").get<int>();
    m.dropout = mo.at("dropout").get<double>();
    m.gat_heads = mo.at("gat_heads").get<int>();
    m.gat_head_width = mo.at("gat_head_width").get<int>();
    m.gat_negative_slope = mo.at("gat_negative_slope").get<double>();
    m.appnp_steps = mo.at("appnp_steps").get<int>();
    m.appnp_alpha = mo.at("appnp_alpha").get<double>();
    m.theta_init = mo.at("theta_init").get<double>();

    c.spec.backbone = parse_backbone(j.at("backbone").get<std::string>());
    c.spec.mode = parse_variant(j.at("mode").get<std::string>());

    const auto& sp = j.at("splits");
    c.spec.n_splits = sp.at("count").get<int>();
    c.spec.split.train_fraction = sp.at("train_fraction").get<double>();
    c.spec.split.val_fraction = sp.at("val_fraction").get<double>();
    c.spec.split.min_class_size = sp.at("min_class_size").get<int>();

    c.spec.seed = j.at("seed").get<std::uint64_t>();
    c.spec.jobs = j.at("jobs").get<int>();
    c.spec.checkpoint_dir = j.at("checkpoint_dir").get<std::string>();
    c.output = j.at("output").get<std::string>();

    const auto& sw = j.at("sweep");
    c.sweep.top_k = sw.at("top_k").get<std::vector<int>>();
    c.sweep.rho = sw.at("rho").get<std::vector<double>>();
    c.sweep.lambda = sw.at("lambda").get<std::vector<double>>();
    c.sweep.missing_rate = sw.at("missing_rate").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return from_json(j);
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  if (key.empty()) throw ConfigError("empty override key");
  json j = to_json();
  json* slot = &j;
  std::string path;
  std::stringstream ss(key);
  for (std::string part; std::getline(ss, part, '.');) {
    path += path.empty() ? part : "." + part;
    if (!slot->is_object() || (!slot->contains(part) && path.rfind("dataset.paths.", 0) != 0))
      throw ConfigError("unknown field '" + path + "'");
    slot = &(*slot)[part];
  }
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = value;
  }
  // A field whose default is a string keeps the raw text, so "--set dataset.name=123" stays a name.
  if (slot->is_string() || slot->is_null()) parsed = value;
  *slot = parsed;
  *this = from_json(j);
}

void ExperimentConfig::apply_environment() {
  if (const char* root = std::getenv("T2GNN_DATA_ROOT"); root && *root) dataset.root = root;
}

fs::path ExperimentConfig::output_dir() const {
  const char* root = std::getenv("T2GNN_OUTPUT_ROOT");
  if (root && *root && output.is_relative()) return fs::path(root) / output;
  return output;
}

void ExperimentConfig::validate() const {
  if (dataset.name.empty()) throw ConfigError("dataset.name is required");
  for (const auto& [k, p] : dataset.resolved_paths()) {
    if (!fs::exists(p)) throw ConfigError("dataset.paths." + k + ": file not found: " + p.string());
  }
  spec.validate();
  if (output.empty()) throw ConfigError("output must not be empty");
  for (int k : sweep.top_k)
    if (k < 1) throw ConfigError("sweep.top_k entries must be at least 1");
  for (double r : sweep.rho)
    if (!(r >= 1.0)) throw ConfigError("sweep.rho entries must be >= 1");
  for (double l : sweep.lambda)
    if (!(l >= 0.0 && l <= 1.0)) throw ConfigError("sweep.lambda entries must lie in [0, 1]");
  for (double m : sweep.missing_rate)
    if (!(m >= 0.0 && m <= 1.0)) throw ConfigError("sweep.missing_rate entries must lie in [0, 1]");
}

std::string format_table(const RunResult& r) {
  std::ostringstream out;
  const json& c = r.config;
  if (c.is_object() && c.contains("dataset")) {
    out << "dataset " << c["dataset"].value("name", "?") << "  method " << method_label(c) << "  splits "
        << r.splits.size() << "\n";
  }
  out << "split  best_epoch  train   val     test\n";
  char line[96];
  for (const auto& s : r.splits) {
    std::snprintf(line, sizeof line, "%5d  %10d  %6s  %6s  %6s\n", s.split, s.student.best_epoch,
                  percent(s.student.train_accuracy).c_str(), percent(s.student.val_accuracy).c_str(),
                  percent(s.student.test_accuracy).c_str());
    out << line;
  }
  out << "test accuracy " << percent(r.mean) << " ± " << percent(r.std) << "  (val " << percent(r.val_mean)
      << ")\n";
  return out.str();
}

RunOutcome cmd_run(const ExperimentConfig& cfg, const Logger& log) {
  cfg.validate();
  LoadReport report;
  IncompleteGraph raw = load_dataset(cfg.dataset, &report);
  emit(log, "loaded " + cfg.dataset.name + ": " + std::to_string(raw.num_nodes()) + " nodes, " +
                std::to_string(raw.num_edges()) + " edges");
  return run_into(cfg, raw, cfg.output_dir(), log);
}

SweepOutcome cmd_sweep(const ExperimentConfig& cfg, const Logger& log) {
  cfg.validate();
  if (cfg.sweep.empty()) throw ConfigError("sweep grid is empty: set at least one of sweep.top_k, rho, lambda, missing_rate");

  // Cartesian product in fixed axis order; absent axes contribute one "unset" value.
  struct Point {
    std::optional<int> k;
    std::optional<double> rho, lambda, miss;
  };
  std::vector<Point> points{Point{}};
  auto expand = [&](auto values, auto assign) {
    if (values.empty()) return;
    std::vector<Point> next;
    for (const auto& p : points)
      for (auto v : values) {
        Point q = p;
        assign(q, v);
        next.push_back(q);
      }
    points = std::move(next);
  };
  expand(cfg.sweep.top_k, [](Point& p, int v) { p.k = v; });
  expand(cfg.sweep.rho, [](Point& p, double v) { p.rho = v; });
  expand(cfg.sweep.lambda, [](Point& p, double v) { p.lambda = v; });
  expand(cfg.sweep.missing_rate, [](Point& p, double v) { p.miss = v; });

  LoadReport report;
  IncompleteGraph raw = load_dataset(cfg.dataset, &report);
  const fs::path out = cfg.output_dir();
  auto cache = std::make_shared<TeacherCache>();

  SweepOutcome outcome;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Point& p = points[i];
    ExperimentConfig pc = cfg;
    pc.spec.teacher_cache = cache;
    pc.sweep = {};
    json params = json::object();
    std::string name;
    auto tag = [&](const std::string& t, const std::string& v) { name += (name.empty() ? "" : "_") + t + v; };
    if (p.k) {
      pc.spec.ppr.top_k = *p.k;
      params["top_k"] = *p.k;
      tag("k", std::to_string(*p.k));
    }
    if (p.rho) {
      pc.spec.distill.rho = *p.rho;
      params["rho"] = *p.rho;
      tag("rho", short_number(*p.rho));
    }
    if (p.lambda) {
      pc.spec.distill.lambda = *p.lambda;
      params["lambda"] = *p.lambda;
      tag("lambda", short_number(*p.lambda));
    }
    if (p.miss) {
      pc.spec.mask.feature_missing_rate = *p.miss;
      pc.spec.mask.edge_missing_rate = *p.miss;
      params["missing_rate"] = *p.miss;
      tag("miss", short_number(*p.miss));
    }
    emit(log, "sweep point " + std::to_string(i + 1) + "/" + std::to_string(points.size()) + ": " + name);
    RunOutcome r = run_into(pc, raw, out / name, log);
    outcome.points.push_back({name, params, std::move(r.result)});
  }

  std::vector<std::size_t> order(outcome.points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return outcome.points[a].result.val_mean > outcome.points[b].result.val_mean;
  });
  json ranking = json::array();
  for (std::size_t i : order) {
    const auto& p = outcome.points[i];
    ranking.push_back({{"name", p.name},
                       {"params", p.params},
                       {"val_mean", p.result.val_mean},
                       {"test_mean", p.result.mean},
                       {"test_std", p.result.std}});
  }
  outcome.summary = {{"format", "t2gnn.sweep"},
                     {"version", 1},
                     {"best", ranking.front()["name"]},
                     {"ranking", ranking}};
  write_file(out / "sweep_summary.json", outcome.summary.dump(2) + "\n");
  return outcome;
}

json cmd_ablate(const ExperimentConfig& cfg, bool with_baselines, const Logger& log) {
  cfg.validate();
  std::vector<VariantMode> modes = {VariantMode::Full, VariantMode::NoTeacherStr, VariantMode::NoTeacherFea,
                                    VariantMode::NoDistillLog, VariantMode::NoDistillMid};
  if (with_baselines) {
    modes.push_back(VariantMode::SingleT);
    modes.push_back(VariantMode::Online);
  }
  LoadReport report;
  IncompleteGraph raw = load_dataset(cfg.dataset, &report);
  const fs::path out = cfg.output_dir();

  json variants = json::array();
  std::vector<std::uint64_t> shared;
  auto cache = std::make_shared<TeacherCache>();
  for (VariantMode mode : modes) {
    ExperimentConfig vc = cfg;
    vc.spec.teacher_cache = cache;
    vc.spec.mode = mode;
    vc.spec.fixed_masks = true;
    const std::string name = variant_name(mode);
    emit(log, "variant " + name);
    RunOutcome r = run_into(vc, raw, out / name, log);
    std::vector<std::uint64_t> seeds;
    for (const auto& s : r.result.splits) seeds.push_back(s.mask_seed);
    if (shared.empty()) shared = seeds;
    if (seeds != shared || std::adjacent_find(seeds.begin(), seeds.end(), std::not_equal_to<>()) != seeds.end())
      throw Error("variant " + name + " did not share the mask of the other variants");
    variants.push_back(
        {{"mode", name}, {"test_mean", r.result.mean}, {"test_std", r.result.std}, {"val_mean", r.result.val_mean}});
  }
  json summary = {{"format", "t2gnn.ablation"},
                  {"version", 1},
                  {"mask_seed", shared.empty() ? 0 : shared.front()},
                  {"variants", variants}};
  write_file(out / "ablation.json", summary.dump(2) + "\n");
  return summary;
}

Report cmd_report(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ConfigError("results directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().filename() == "result.json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error("no result.json found under " + dir.string());

  struct Cell {
    double mean, std, val;
    std::size_t n;
    std::string source;
  };
  std::map<std::pair<std::string, std::string>, Cell> cells;  // (method, dataset)
  std::set<std::string> dataset_set;
  std::set<std::string> method_set;
  for (const auto& f : files) {
    std::ifstream in(f);
    RunResult r;
    try {
      r = RunResult::from_json(json::parse(in));
    } catch (const std::exception& e) {
      throw FormatError(f.string() + ": " + e.what());
    }
    std::string method, dataset;
    try {
      method = method_label(r.config);
      dataset = r.config.at("dataset").at("name").get<std::string>();
    } catch (const json::exception&) {
      throw FormatError(f.string() + ": result has no dataset/backbone/mode in its config");
    }
    Cell c{r.mean, r.std, r.val_mean, r.splits.size(), fs::relative(f, dir).generic_string()};
    auto [it, inserted] = cells.try_emplace({method, dataset}, c);
    if (!inserted && c.val > it->second.val) it->second = c;  // sweeps: keep the best by validation
    dataset_set.insert(dataset);
    method_set.insert(method);
  }

  static const std::vector<std::string> canonical = {"cora",     "citeseer", "pubmed", "chameleon",
                                                     "squirrel", "texas",    "cornell", "wisconsin"};
  std::vector<std::string> datasets;
  for (const auto& d : canonical)
    if (dataset_set.count(d)) datasets.push_back(d);
  for (const auto& d : dataset_set)
    if (std::find(canonical.begin(), canonical.end(), d) == canonical.end()) datasets.push_back(d);
  const bool with_avg = datasets.size() >= 2;

  // Rows: each base backbone, its T2 counterpart, the improvement, then its variants.
  struct Row {
    std::string label;
    std::vector<std::optional<double>> values;
    std::vector<std::optional<double>> stds;
    bool improvement = false;
  };
  std::vector<Row> rows;
  std::set<std::string> placed;
  auto row_for = [&](const std::string& method) {
    Row row{method, {}, {}, false};
    for (const auto& d : datasets) {
      auto it = cells.find({method, d});
      row.values.push_back(it == cells.end() ? std::nullopt : std::optional<double>(it->second.mean));
      row.stds.push_back(it == cells.end() ? std::nullopt : std::optional<double>(it->second.std));
    }
    placed.insert(method);
    return row;
  };
  for (const char* bb : {"GCN", "GAT", "SAGE", "APPNP"}) {
    const std::string base = bb, t2 = "T2-" + std::string(bb);
    if (method_set.count(base)) rows.push_back(row_for(base));
    if (method_set.count(t2)) rows.push_back(row_for(t2));
    if (method_set.count(base) && method_set.count(t2)) {
      Row impv{"+Impv", {}, {}, true};
      const Row& a = rows[rows.size() - 2];
      const Row& b = rows.back();
      for (std::size_t k = 0; k < datasets.size(); ++k) {
        impv.values.push_back(a.values[k] && b.values[k] ? std::optional<double>(*b.values[k] - *a.values[k])
                                                         : std::nullopt);
        impv.stds.push_back(std::nullopt);
      }
      rows.push_back(impv);
    }
    for (const auto& m : method_set)
      if (!placed.count(m) && m.rfind(t2 + "/", 0) == 0) rows.push_back(row_for(m));
  }
  for (const auto& m : method_set)
    if (!placed.count(m)) rows.push_back(row_for(m));

  auto average = [&](const Row& r) -> std::optional<double> {
    double s = 0.0;
    for (const auto& v : r.values) {
      if (!v) return std::nullopt;
      s += *v;
    }
    return s / static_cast<double>(r.values.size());
  };
  auto fmt_cell = [](const std::optional<double>& v, const std::optional<double>& sd, bool impv) -> std::string {
    if (!v) return "-";
    if (impv) return (*v >= 0 ? "+" : "") + percent(*v);
    return sd ? percent(*v) + "±" + percent(*sd) : percent(*v);
  };

  std::vector<std::string> header = {"method"};
  header.insert(header.end(), datasets.begin(), datasets.end());
  if (with_avg) header.push_back("avg");
  std::vector<std::vector<std::string>> grid = {header};
  for (const auto& r : rows) {
    std::vector<std::string> line = {r.label};
    for (std::size_t k = 0; k < datasets.size(); ++k) line.push_back(fmt_cell(r.values[k], r.stds[k], r.improvement));
    if (with_avg) line.push_back(fmt_cell(average(r), std::nullopt, r.improvement));
    grid.push_back(std::move(line));
  }
  // Display widths count "±" as one column.
  auto width = [](const std::string& s) {
    std::size_t w = 0;
    for (unsigned char ch : s) w += (ch & 0xC0) != 0x80;
    return w;
  };
  std::vector<std::size_t> widths(header.size(), 0);
  for (const auto& line : grid)
    for (std::size_t k = 0; k < line.size(); ++k) widths[k] = std::max(widths[k], width(line[k]));
  std::ostringstream text;
  for (const auto& line : grid) {
    for (std::size_t k = 0; k < line.size(); ++k) {
      const std::size_t pad = widths[k] - width(line[k]);
      if (k == 0) text << line[k] << std::string(pad, ' ');
      else text << "  " << std::string(pad, ' ') << line[k];
    }
    text << "\n";
  }

  std::ostringstream csv;
  csv << "method,dataset,mean,std,val_mean,splits,source\n";
  char buf[64];
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < datasets.size(); ++k) {
      if (!r.values[k]) continue;
      csv << r.label << "," << datasets[k] << ",";
      std::snprintf(buf, sizeof buf, "%.4f", 100.0 * *r.values[k]);
      csv << buf << ",";
      if (r.improvement) {
        csv << ",,,\n";
        continue;
      }
      const Cell& c = cells.at({r.label, datasets[k]});
      std::snprintf(buf, sizeof buf, "%.4f,%.4f,%zu", 100.0 * c.std, 100.0 * c.val, c.n);
      csv << buf << "," << c.source << "\n";
    }
  }
  return {text.str(), csv.str()};
}

fs::path cmd_mask(const ExperimentConfig& cfg, const Logger& log) {
  cfg.validate();
  IncompleteGraph raw = load_dataset(cfg.dataset);
  IncompleteGraph g = masked_graph(cfg, raw);
  auto splits = make_splits(raw, derive_seed(cfg.spec.seed, "split"), cfg.spec.n_splits, cfg.spec.split);
  const fs::path path = cfg.output_dir() / "masked_graph.json";
  fs::create_directories(path.parent_path());
  write_graph_bundle(path, g, splits);
  emit(log, "wrote " + path.string());
  return path;
}

fs::path cmd_ppr(const ExperimentConfig& cfg, const Logger& log) {
  cfg.validate();
  IncompleteGraph g = masked_graph(cfg, load_dataset(cfg.dataset));
  SparseRowMatrix enhanced = build_enhanced_adjacency(g.adjacency, cfg.spec.ppr, cfg.spec.symmetrize, cfg.spec.jobs);
  const fs::path path = cfg.output_dir() / "enhanced_adjacency.txt";
  fs::create_directories(path.parent_path());
  write_weighted_edgelist(path, enhanced);
  emit(log, "wrote " + path.string() + " (" + std::to_string(enhanced.nnz()) + " entries)");
  return path;
}

}  // namespace t2gnn
