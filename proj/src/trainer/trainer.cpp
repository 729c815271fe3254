#include "t2gnn/trainer.hpp"

#include "t2gnn/error.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>

namespace t2gnn {

void TrainConfig::validate(const std::string& field) const {
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError(field + ".lr must be positive");
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay))
    throw ConfigError(field + ".weight_decay must be nonnegative");
  if (max_epochs < 0) throw ConfigError(field + ".max_epochs must be nonnegative");
  if (patience < 1) throw ConfigError(field + ".patience must be positive");
}

AdamConfig TrainConfig::adam() const {
  AdamConfig a;
  a.lr = lr;
  a.weight_decay = weight_decay;
  return a;
}

namespace {

struct VariantEntry {
  VariantMode mode;
  const char* name;
};

constexpr VariantEntry kVariants[] = {
    {VariantMode::Full, "full"},
    {VariantMode::SingleT, "singleT"},
    {VariantMode::Online, "online"},
    {VariantMode::NoTeacherStr, "no_teacher_str"},
    {VariantMode::NoTeacherFea, "no_teacher_fea"},
    {VariantMode::NoDistillLog, "no_distill_log"},
    {VariantMode::NoDistillMid, "no_distill_mid"},
    {VariantMode::StudentOnly, "student_only"},
};

}  // namespace

VariantMode parse_variant(std::string_view name) {
  for (const auto& v : kVariants)
    if (name == v.name) return v.mode;
  std::string options;
  for (const auto& v : kVariants) options += (options.empty() ? "" : ", ") + std::string(v.name);
  throw ConfigError("unknown variant '" + std::string(name) + "' (expected one of " + options + ")");
}

std::string variant_name(VariantMode mode) {
  for (const auto& v : kVariants)
    if (v.mode == mode) return v.name;
  return "unknown";
}

std::vector<int> predict(const DenseMatrix& logits) {
  std::vector<int> out(static_cast<std::size_t>(logits.rows()), 0);
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    int best = 0;
    for (Eigen::Index c = 1; c < logits.cols(); ++c)
      if (logits(i, c) > logits(i, best)) best = static_cast<int>(c);
    out[i] = best;
  }
  return out;
}

double evaluate(const DenseMatrix& logits, std::span<const int> labels, std::span<const int> index) {
  if (index.empty()) throw ConfigError("evaluate: empty index set");
  if (static_cast<Eigen::Index>(labels.size()) != logits.rows())
    throw DimensionError("evaluate: " + std::to_string(labels.size()) + " labels for " + shape_string(logits));
  std::size_t correct = 0;
  for (int i : index) {
    if (i < 0 || i >= logits.rows()) throw ConfigError("evaluate: node index out of range");
    int best = 0;
    for (Eigen::Index c = 1; c < logits.cols(); ++c)
      if (logits(i, c) > logits(i, best)) best = static_cast<int>(c);
    if (best == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(index.size());
}

FrozenTeacher FrozenTeacher::from(OutputValues values) {
  FrozenTeacher t;
  t.logits = std::move(values.logits);
  t.intermediate = std::move(values.intermediate);
  for (Eigen::Index i = 0; i < t.intermediate.rows(); ++i)
    if (t.intermediate.row(i).squaredNorm() > 0.0) t.nodes.push_back(static_cast<int>(i));
  return t;
}

// --- shared loop -----------------------------------------------------------

namespace {

struct Loop {
  std::function<void(int epoch)> step;
  std::function<DenseMatrix()> eval_logits;
  std::function<void()> save;
  std::function<void()> restore;
};

TrainRecord early_stopping(const TrainConfig& cfg, std::span<const int> labels, const Split& split, Loop& loop) {
  TrainRecord rec;
  auto score = [&](int epoch) {
    DenseMatrix z = loop.eval_logits();
    rec.best_epoch = epoch;
    rec.train_accuracy = split.train.empty() ? 0.0 : evaluate(z, labels, split.train);
    rec.val_accuracy = evaluate(z, labels, split.val);
    rec.test_accuracy = evaluate(z, labels, split.test);
    loop.save();
  };
  score(0);
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    loop.step(epoch);
    rec.epochs_run = epoch;
    DenseMatrix z = loop.eval_logits();
    const double val = evaluate(z, labels, split.val);
    if (val > rec.val_accuracy) {
      rec.best_epoch = epoch;
      rec.val_accuracy = val;
      rec.train_accuracy = evaluate(z, labels, split.train);
      rec.test_accuracy = evaluate(z, labels, split.test);
      loop.save();
    } else if (epoch - rec.best_epoch >= cfg.patience) {
      break;
    }
  }
  loop.restore();
  return rec;
}

void check_finite(const Var& loss, int epoch, const std::string& who) {
  if (!std::isfinite(loss.value()(0, 0))) throw DivergenceError(who + ": non-finite loss", epoch);
}

DenseMatrix eval_logits(Model& model, const GraphInput& in) {
  Tape tape;
  Rng unused(0);
  return model.forward(tape, in, false, unused).logits.value();
}

OutputValues eval_outputs(Model& model, const GraphInput& in) {
  Tape tape;
  Rng unused(0);
  return values_of(model.forward(tape, in, false, unused));
}

template <typename T>
void append(std::vector<T>& dst, const std::vector<T>& src) {
  dst.insert(dst.end(), src.begin(), src.end());
}

}  // namespace

TeacherRun train_teacher(Model& model, const GraphInput& in, std::span<const int> labels, const Split& split,
                         const TrainConfig& cfg, Rng& rng) {
  cfg.validate();
  std::vector<Parameter*> params = model.parameters();
  const AdamConfig adam = cfg.adam();
  std::vector<DenseMatrix> best;
  Loop loop;
  loop.step = [&](int epoch) {
    zero_grads(params);
    Tape tape;
    ModelOutput out = model.forward(tape, in, true, rng);
    Var loss = cross_entropy(log_softmax_rows(out.logits), labels, split.train);
    check_finite(loss, epoch, model.kind());
    tape.backward(loss);
    adam_step(params, adam);
  };
  loop.eval_logits = [&] { return eval_logits(model, in); };
  loop.save = [&] { best = model.snapshot(); };
  loop.restore = [&] { model.restore(best); };
  TeacherRun run;
  run.record = early_stopping(cfg, labels, split, loop);
  run.outputs = FrozenTeacher::from(eval_outputs(model, in));
  return run;
}

// --- student ---------------------------------------------------------------

namespace {

bool uses_feature_teacher(VariantMode m) {
  return m == VariantMode::Full || m == VariantMode::NoTeacherStr || m == VariantMode::NoDistillLog ||
         m == VariantMode::NoDistillMid;
}

bool uses_structure_teacher(VariantMode m) {
  return m == VariantMode::Full || m == VariantMode::NoTeacherFea || m == VariantMode::NoDistillLog ||
         m == VariantMode::NoDistillMid;
}

DistillConfig mode_config(DistillConfig d, VariantMode mode) {
  if (mode == VariantMode::NoDistillLog) d.use_logit = false;
  if (mode == VariantMode::NoDistillMid) d.use_mid = false;
  return d;
}

// Dual loss of the student against one teacher's outputs (constants or live).
Var dual_against(Tape& tape, const ModelOutput& student, ProjectionHead& head, const Var& t_logits,
                 const Var& t_intermediate, std::span<const int> nodes, const DistillConfig& d, Rng& rng) {
  Var r = d.use_mid ? head.apply(tape, student.intermediate) : student.intermediate;
  Var t_r = t_intermediate;
  NegativeSet negatives = NegativeSet::all();
  if (d.use_mid && !d.l2_mode)
    negatives = NegativeSet::from_policy(d.negatives, static_cast<Eigen::Index>(nodes.size()), rng);
  if (!d.use_mid) t_r = r;  // unused by dual_loss
  return dual_loss(student.logits, r, TeacherSignal{t_logits, t_r, nodes}, d, negatives);
}

}  // namespace

TrainRecord train_student(Student& student, const GraphInput& in, std::span<const int> labels, const Split& split,
                          const StudentTeachers& teachers, const DistillConfig& dcfg, const TrainConfig& cfg,
                          VariantMode mode, Rng& rng) {
  cfg.validate();
  dcfg.validate();
  if (mode == VariantMode::Online) throw ConfigError("train_student: online mode is trained by train_online");
  const bool need_fea = uses_feature_teacher(mode);
  const bool need_str = uses_structure_teacher(mode);
  const bool need_single = mode == VariantMode::SingleT;
  const std::string name = variant_name(mode);
  if (need_fea && !teachers.feature) throw ConfigError("mode " + name + " needs feature teacher outputs");
  if (need_str && !teachers.structure) throw ConfigError("mode " + name + " needs structure teacher outputs");
  if (need_single && !teachers.single) throw ConfigError("mode " + name + " needs single teacher outputs");

  const DistillConfig d = mode_config(dcfg, mode);
  const Eigen::Index h = student.hidden_width();
  std::optional<ProjectionHead> fea_head, str_head, single_head;
  if (need_fea) fea_head.emplace("proj_fea", h, teachers.feature->intermediate.cols(), rng);
  if (need_str) str_head.emplace("proj_str", h, teachers.structure->intermediate.cols(), rng);
  if (need_single) single_head.emplace("proj_single", h, teachers.single->intermediate.cols(), rng);

  std::vector<Parameter*> params = student.parameters();
  for (auto* head : {&fea_head, &str_head, &single_head})
    if (*head) append(params, (*head)->parameters());
  const AdamConfig adam = cfg.adam();

  std::vector<DenseMatrix> best;
  Loop loop;
  loop.step = [&](int epoch) {
    zero_grads(params);
    Tape tape;
    ModelOutput out = student.forward(tape, in, true, rng);
    Var ce = cross_entropy(log_softmax_rows(out.logits), labels, split.train);
    auto against = [&](const FrozenTeacher& t, ProjectionHead& head) {
      return dual_against(tape, out, head, tape.constant(t.logits), tape.constant(t.intermediate), t.nodes, d, rng);
    };
    Var loss = ce;
    if (need_single) {
      loss = add(ce, against(*teachers.single, *single_head));
    } else if (need_fea || need_str) {
      std::optional<Var> fea, str;
      if (need_fea && d.lambda > 0.0) fea = against(*teachers.feature, *fea_head);
      if (need_str && d.lambda < 1.0) str = against(*teachers.structure, *str_head);
      loss = student_loss(ce, fea, str, d.lambda);
    }
    check_finite(loss, epoch, student.kind());
    tape.backward(loss);
    adam_step(params, adam);
  };
  loop.eval_logits = [&] { return eval_logits(student, in); };
  loop.save = [&] { best = student.snapshot(); };
  loop.restore = [&] { student.restore(best); };
  return early_stopping(cfg, labels, split, loop);
}

TrainRecord train_online(FeatureTeacher& ft, StructureTeacher& st, Student& student, const GraphInput& masked,
                         const GraphInput& enhanced, std::span<const int> labels, const Split& split,
                         const DistillConfig& dcfg, const TrainConfig& cfg, Rng& rng) {
  cfg.validate();
  dcfg.validate();
  const Eigen::Index h = student.hidden_width();
  ProjectionHead fea_head("proj_fea", h, ft.parameter("w1").value().cols(), rng);
  ProjectionHead str_head("proj_str", h, st.parameter("w1").value().cols(), rng);
  std::vector<Parameter*> params = ft.parameters();
  append(params, st.parameters());
  append(params, student.parameters());
  append(params, fea_head.parameters());
  append(params, str_head.parameters());
  const AdamConfig adam = cfg.adam();

  auto nonzero_rows = [](const DenseMatrix& r) {
    std::vector<int> nodes;
    for (Eigen::Index i = 0; i < r.rows(); ++i)
      if (r.row(i).squaredNorm() > 0.0) nodes.push_back(static_cast<int>(i));
    return nodes;
  };

  std::vector<DenseMatrix> best_ft, best_st, best_student;
  Loop loop;
  loop.step = [&](int epoch) {
    zero_grads(params);
    Tape tape;
    ModelOutput fo = ft.forward(tape, masked, true, rng);
    ModelOutput so = st.forward(tape, enhanced, true, rng);
    ModelOutput out = student.forward(tape, masked, true, rng);
    Var ce_fea = cross_entropy(log_softmax_rows(fo.logits), labels, split.train);
    Var ce_str = cross_entropy(log_softmax_rows(so.logits), labels, split.train);
    Var ce = cross_entropy(log_softmax_rows(out.logits), labels, split.train);
    const std::vector<int> fea_nodes = nonzero_rows(fo.intermediate.value());
    const std::vector<int> str_nodes = nonzero_rows(so.intermediate.value());
    std::optional<Var> fea, str;
    if (dcfg.lambda > 0.0) fea = dual_against(tape, out, fea_head, fo.logits, fo.intermediate, fea_nodes, dcfg, rng);
    if (dcfg.lambda < 1.0) str = dual_against(tape, out, str_head, so.logits, so.intermediate, str_nodes, dcfg, rng);
    Var loss = add(add(ce_fea, ce_str), student_loss(ce, fea, str, dcfg.lambda));
    check_finite(loss, epoch, "online");
    tape.backward(loss);
    adam_step(params, adam);
  };
  loop.eval_logits = [&] { return eval_logits(student, masked); };
  loop.save = [&] {
    best_ft = ft.snapshot();
    best_st = st.snapshot();
    best_student = student.snapshot();
  };
  loop.restore = [&] {
    ft.restore(best_ft);
    st.restore(best_st);
    student.restore(best_student);
  };
  return early_stopping(cfg, labels, split, loop);
}

// --- experiments -----------------------------------------------------------

void RunSpec::validate() const {
  mask.validate();
  ppr.validate();
  distill.validate();
  teacher_train.validate("teacher_train");
  student_train.validate("student_train");
  model.validate();
  if (n_splits < 1) throw ConfigError("n_splits must be positive");
  if (jobs < 1) throw ConfigError("jobs must be positive");
  if (!(split.train_fraction > 0.0) || !(split.val_fraction > 0.0) ||
      split.train_fraction + split.val_fraction >= 1.0)
    throw ConfigError("split fractions must be positive and leave room for a test set");
}

std::pair<double, double> mean_std(std::span<const double> values) {
  if (values.empty()) return {0.0, 0.0};
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / static_cast<double>(values.size()))};
}

std::vector<double> RunResult::test_accuracies() const {
  std::vector<double> v;
  for (const auto& s : splits) v.push_back(s.student.test_accuracy);
  return v;
}

void RunResult::aggregate() {
  std::tie(mean, std) = mean_std(test_accuracies());
  std::vector<double> val;
  for (const auto& s : splits) val.push_back(s.student.val_accuracy);
  val_mean = mean_std(val).first;
}

namespace {

nlohmann::json record_to_json(const TrainRecord& r) {
  return {{"best_epoch", r.best_epoch},
          {"epochs_run", r.epochs_run},
          {"train_accuracy", r.train_accuracy},
          {"val_accuracy", r.val_accuracy},
          {"test_accuracy", r.test_accuracy}};
}

TrainRecord record_from_json(const nlohmann::json& j) {
  TrainRecord r;
  r.best_epoch = j.at("best_epoch");
  r.epochs_run = j.at("epochs_run");
  r.train_accuracy = j.at("train_accuracy");
  r.val_accuracy = j.at("val_accuracy");
  r.test_accuracy = j.at("test_accuracy");
  return r;
}

}  // namespace

nlohmann::json RunResult::to_json() const {
  nlohmann::json splits_json = nlohmann::json::array();
  std::vector<double> val;
  for (const auto& s : splits) {
    nlohmann::json e = {{"split", s.split}, {"mask_seed", s.mask_seed}, {"student", record_to_json(s.student)}};
    if (s.feature_teacher) e["feature_teacher"] = record_to_json(*s.feature_teacher);
    if (s.structure_teacher) e["structure_teacher"] = record_to_json(*s.structure_teacher);
    if (s.single_teacher) e["single_teacher"] = record_to_json(*s.single_teacher);
    splits_json.push_back(std::move(e));
    val.push_back(s.student.val_accuracy);
  }
  return {{"format", "t2gnn.result"},
          {"version", 1},
          {"config", config},
          {"test_accuracy", {{"mean", mean}, {"std", std}, {"values", test_accuracies()}}},
          {"val_accuracy", {{"mean", val_mean}, {"values", val}}},
          {"splits", splits_json}};
}

RunResult RunResult::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "t2gnn.result" || j.at("version") != 1)
      throw FormatError("result: unsupported format or version");
    RunResult r;
    r.config = j.at("config");
    r.mean = j.at("test_accuracy").at("mean");
    r.std = j.at("test_accuracy").at("std");
    r.val_mean = j.at("val_accuracy").at("mean");
    for (const auto& e : j.at("splits")) {
      SplitResult s;
      s.split = e.at("split");
      s.mask_seed = e.at("mask_seed");
      s.student = record_from_json(e.at("student"));
      if (e.contains("feature_teacher")) s.feature_teacher = record_from_json(e["feature_teacher"]);
      if (e.contains("structure_teacher")) s.structure_teacher = record_from_json(e["structure_teacher"]);
      if (e.contains("single_teacher")) s.single_teacher = record_from_json(e["single_teacher"]);
      r.splits.push_back(s);
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("result: ") + e.what());
  }
}

std::uint64_t mask_seed_for(const RunSpec& spec, int split) {
  return derive_seed(spec.seed, "mask", spec.fixed_masks ? 0 : static_cast<std::uint64_t>(split));
}

namespace {

// Saves the teacher, reloads it, and recomputes its frozen outputs from the reloaded weights.
void checkpoint_roundtrip(Model& model, const RunSpec& spec, int split, TeacherRun& run, const GraphInput& in) {
  if (spec.checkpoint_dir.empty()) return;
  std::filesystem::create_directories(spec.checkpoint_dir);
  const auto path = spec.checkpoint_dir / ("split" + std::to_string(split) + "_" + model.kind() + ".json");
  save_checkpoint(model, path);
  load_checkpoint(model, path);
  run.outputs = FrozenTeacher::from(eval_outputs(model, in));
}

// Everything a teacher's training depends on besides the raw graph.
std::string teacher_key(const char* kind, const RunSpec& spec, int split_index, const Split& split,
                        std::uint64_t mask_seed, bool uses_ppr) {
  const ModelConfig& m = spec.model;
  const TrainConfig& t = spec.teacher_train;
  char buf[512];
  std::snprintf(buf, sizeof buf, "%s|%d|%zu/%zu/%zu|%llu|%llu|%.17g/%.17g/%d|%d/%d/%.17g/%.17g|%.17g/%.17g/%d/%d",
                kind, split_index, split.train.size(), split.val.size(), split.test.size(),
                static_cast<unsigned long long>(spec.seed), static_cast<unsigned long long>(mask_seed),
                spec.mask.feature_missing_rate, spec.mask.edge_missing_rate, static_cast<int>(spec.mask.feature_mode),
                m.hidden, m.feature_teacher_hidden, m.dropout, m.theta_init, t.lr, t.weight_decay, t.max_epochs,
                t.patience);
  std::string key = buf;
  if (uses_ppr) {
    std::snprintf(buf, sizeof buf, "|ppr %.17g/%.17g/%d/%d", spec.ppr.alpha, spec.ppr.epsilon, spec.ppr.top_k,
                  spec.symmetrize ? 1 : 0);
    key += buf;
  }
  if (!spec.checkpoint_dir.empty()) key += "|ckpt " + spec.checkpoint_dir.string();
  return key;
}

}  // namespace

std::optional<TeacherRun> TeacherCache::find(const std::string& key) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = runs_.find(key);
  if (it == runs_.end()) return std::nullopt;
  return it->second;
}

void TeacherCache::store(const std::string& key, const TeacherRun& run) {
  std::lock_guard<std::mutex> lock(mutex_);
  runs_.emplace(key, run);
}

std::size_t TeacherCache::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return runs_.size();
}

SplitResult run_split(const IncompleteGraph& raw, const Split& split, int split_index, const RunSpec& spec) {
  SplitResult res;
  res.split = split_index;
  res.mask_seed = mask_seed_for(spec, split_index);
  MaskSpec ms = spec.mask;
  ms.seed = res.mask_seed;
  const IncompleteGraph masked = apply_masks(raw, ms);
  const GraphInput in = GraphInput::build(masked);
  const VariantMode mode = spec.mode;
  const bool need_enhanced = uses_structure_teacher(mode) || mode == VariantMode::SingleT || mode == VariantMode::Online;
  std::optional<GraphInput> enhanced;
  if (need_enhanced)
    enhanced = GraphInput::build(masked, build_enhanced_adjacency(masked.adjacency, spec.ppr, spec.symmetrize));

  const Eigen::Index n = masked.num_nodes(), d = masked.num_features();
  const int classes = raw.num_classes;
  const std::span<const int> labels = masked.labels;
  auto seed = [&](const char* label) { return derive_seed(spec.seed, label, static_cast<std::uint64_t>(split_index)); };

  Rng student_init(seed("init-student"));
  Student student(spec.backbone, d, classes, spec.model, student_init);

  if (mode == VariantMode::Online) {
    Rng fi(seed("init-feature")), si(seed("init-structure")), train(seed("train-online"));
    FeatureTeacher ft(n, d, classes, spec.model, fi);
    StructureTeacher st(n, d, classes, spec.model, si);
    res.student = train_online(ft, st, student, in, *enhanced, labels, split, spec.distill, spec.student_train, train);
    return res;
  }

  StudentTeachers teachers;
  // Trains (or fetches) one teacher; make() builds the model from its init rng.
  auto teacher = [&](const char* kind, bool uses_ppr, const GraphInput& input, auto make) {
    std::string key;
    if (spec.teacher_cache) {
      key = teacher_key(kind, spec, split_index, split, res.mask_seed, uses_ppr);
      if (auto hit = spec.teacher_cache->find(key)) return std::move(*hit);
    }
    Rng init(seed((std::string("init-") + kind).c_str())), train(seed((std::string("train-") + kind).c_str()));
    auto model = make(init);
    TeacherRun run = train_teacher(model, input, labels, split, spec.teacher_train, train);
    checkpoint_roundtrip(model, spec, split_index, run, input);
    if (spec.teacher_cache) spec.teacher_cache->store(key, run);
    return run;
  };
  if (uses_feature_teacher(mode)) {
    TeacherRun run = teacher("feature", false, in, [&](Rng& r) { return FeatureTeacher(n, d, classes, spec.model, r); });
    res.feature_teacher = run.record;
    teachers.feature = std::move(run.outputs);
  }
  if (uses_structure_teacher(mode)) {
    TeacherRun run =
        teacher("structure", true, *enhanced, [&](Rng& r) { return StructureTeacher(n, d, classes, spec.model, r); });
    res.structure_teacher = run.record;
    teachers.structure = std::move(run.outputs);
  }
  if (mode == VariantMode::SingleT) {
    TeacherRun run =
        teacher("single", true, *enhanced, [&](Rng& r) { return SingleTeacher(n, d, classes, spec.model, r); });
    res.single_teacher = run.record;
    teachers.single = std::move(run.outputs);
  }
  Rng train(seed("train-student"));
  res.student = train_student(student, in, labels, split, teachers, spec.distill, spec.student_train, mode, train);
  return res;
}

RunResult run_experiment(const IncompleteGraph& raw, const RunSpec& spec) {
  spec.validate();
  raw.validate();
  const auto start = std::chrono::steady_clock::now();
  const std::vector<Split> splits = make_splits(raw, derive_seed(spec.seed, "split"), spec.n_splits, spec.split);

  RunResult result;
  result.splits.resize(splits.size());
  std::vector<std::exception_ptr> errors(splits.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t s; (s = next.fetch_add(1)) < splits.size();) {
      try {
        result.splits[s] = run_split(raw, splits[s], static_cast<int>(s), spec);
      } catch (...) {
        errors[s] = std::current_exception();
      }
    }
  };
  const int workers = std::min<int>(spec.jobs, static_cast<int>(splits.size()));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (std::size_t s = 0; s < errors.size(); ++s) {
    if (!errors[s]) continue;
    const std::string prefix = "split " + std::to_string(s) + ": ";
    try {
      std::rethrow_exception(errors[s]);
    } catch (const ConfigError& e) {
      throw ConfigError(prefix + e.what());
    } catch (const std::exception& e) {
      throw Error(prefix + e.what());
    }
  }
  result.aggregate();
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace t2gnn
