#include "t2gnn/ppr.hpp"

#include "t2gnn/error.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <fstream>
#include <thread>

namespace t2gnn {

void PprConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("ppr.alpha must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("ppr.epsilon must be positive");
  if (top_k < 1) throw ConfigError("ppr.top_k must be at least 1");
}

namespace {

struct PushWorkspace {
  std::vector<double> estimate;
  std::vector<double> residual;
  std::vector<char> queued;
  std::vector<Eigen::Index> touched;
  std::deque<Eigen::Index> queue;

  explicit PushWorkspace(Eigen::Index n)
      : estimate(static_cast<std::size_t>(n), 0.0),
        residual(static_cast<std::size_t>(n), 0.0),
        queued(static_cast<std::size_t>(n), 0) {}

  void touch(Eigen::Index v) {
    if (estimate[v] == 0.0 && residual[v] == 0.0) touched.push_back(v);
  }

  void clear() {
    for (Eigen::Index v : touched) {
      estimate[v] = 0.0;
      residual[v] = 0.0;
      queued[v] = 0;
    }
    touched.clear();
    queue.clear();
  }
};

// Degree in A + I; the self-loop is applied implicitly.
double loop_degree(const SparseRowMatrix& a, Eigen::Index u) { return a.row_sum(u) + 1.0; }

void push_from(const SparseRowMatrix& a, const std::vector<double>& degree, Eigen::Index source, double alpha,
               double epsilon, PushWorkspace& ws) {
  ws.touch(source);
  ws.residual[source] = 1.0;
  ws.queue.push_back(source);
  ws.queued[source] = 1;
  while (!ws.queue.empty()) {
    Eigen::Index u = ws.queue.front();
    ws.queue.pop_front();
    ws.queued[u] = 0;
    const double r = ws.residual[u];
    if (!(r > epsilon * degree[u])) continue;
    ws.estimate[u] += alpha * r;
    const double spread = (1.0 - alpha) * r / degree[u];
    ws.residual[u] = spread;  // self-loop share
    auto enqueue = [&](Eigen::Index v) {
      if (!ws.queued[v] && ws.residual[v] > epsilon * degree[v]) {
        ws.queue.push_back(v);
        ws.queued[v] = 1;
      }
    };
    for (const auto& e : a.row(u)) {
      ws.touch(e.col);
      ws.residual[e.col] += spread * e.weight;
      enqueue(e.col);
    }
    enqueue(u);
  }
}

std::vector<double> degrees(const SparseRowMatrix& a) {
  std::vector<double> d(static_cast<std::size_t>(a.rows()));
  for (Eigen::Index u = 0; u < a.rows(); ++u) d[u] = loop_degree(a, u);
  return d;
}

void check_square(const SparseRowMatrix& a, double alpha, double epsilon) {
  if (a.rows() != a.cols()) throw DimensionError("ppr_push: adjacency must be square");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("ppr_push: alpha must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("ppr_push: epsilon must be positive");
}

}  // namespace

std::vector<double> ppr_push_source(const SparseRowMatrix& adjacency, Eigen::Index source, double alpha,
                                    double epsilon) {
  check_square(adjacency, alpha, epsilon);
  if (source < 0 || source >= adjacency.rows()) throw ConfigError("ppr_push_source: source out of range");
  PushWorkspace ws(adjacency.rows());
  push_from(adjacency, degrees(adjacency), source, alpha, epsilon, ws);
  return ws.estimate;
}

SparseRowMatrix ppr_push(const SparseRowMatrix& adjacency, double alpha, double epsilon, int jobs) {
  check_square(adjacency, alpha, epsilon);
  const Eigen::Index n = adjacency.rows();
  const std::vector<double> degree = degrees(adjacency);
  std::vector<std::vector<SparseEntry>> rows(static_cast<std::size_t>(n));

  auto worker = [&](Eigen::Index begin, Eigen::Index end) {
    PushWorkspace ws(n);
    for (Eigen::Index s = begin; s < end; ++s) {
      push_from(adjacency, degree, s, alpha, epsilon, ws);
      auto& row = rows[s];
      for (Eigen::Index v : ws.touched)
        if (ws.estimate[v] > 0.0) row.push_back({v, ws.estimate[v]});
      std::sort(row.begin(), row.end(), [](const SparseEntry& a, const SparseEntry& b) { return a.col < b.col; });
      ws.clear();
    }
  };
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(std::max<Eigen::Index>(n, 1))));
  if (workers == 1) {
    worker(0, n);
  } else {
    std::vector<std::thread> threads;
    const Eigen::Index chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      Eigen::Index begin = std::min<Eigen::Index>(n, w * chunk);
      Eigen::Index end = std::min<Eigen::Index>(n, begin + chunk);
      threads.emplace_back(worker, begin, end);
    }
    for (auto& t : threads) t.join();
  }
  SparseRowBuilder builder(n, n);
  for (const auto& row : rows) builder.push_row(row);
  return std::move(builder).finish();
}

SparseRowMatrix top_k_sparsify(const SparseRowMatrix& scores, int k) {
  if (k < 1) throw ConfigError("top_k must be at least 1");
  SparseRowBuilder builder(scores.rows(), scores.cols());
  std::vector<SparseEntry> row;
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    row.assign(scores.row(i).begin(), scores.row(i).end());
    if (row.size() > static_cast<std::size_t>(k)) {
      std::stable_sort(row.begin(), row.end(),
                       [](const SparseEntry& a, const SparseEntry& b) { return a.weight > b.weight; });
      row.resize(static_cast<std::size_t>(k));
      std::sort(row.begin(), row.end(), [](const SparseEntry& a, const SparseEntry& b) { return a.col < b.col; });
    }
    builder.push_row(row);
  }
  return std::move(builder).finish();
}

SparseRowMatrix enhance_adjacency(const SparseRowMatrix& adjacency, const SparseRowMatrix& ppr_scores,
                                  bool symmetrize) {
  SparseRowMatrix combined = add(adjacency, ppr_scores);
  if (!symmetrize) return combined;
  return scale(add(combined, combined.transpose()), 0.5);
}

SparseRowMatrix build_enhanced_adjacency(const SparseRowMatrix& adjacency, const PprConfig& cfg, bool symmetrize,
                                         int jobs) {
  cfg.validate();
  return enhance_adjacency(adjacency, top_k_sparsify(ppr_push(adjacency, cfg.alpha, cfg.epsilon, jobs), cfg.top_k),
                           symmetrize);
}

void write_weighted_edgelist(const std::filesystem::path& path, const SparseRowMatrix& m) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  char buf[64];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (const auto& e : m.row(i)) {
      std::snprintf(buf, sizeof buf, "%.17g", e.weight);
      out << i << ' ' << e.col << ' ' << buf << '\n';
    }
  }
}

}  // namespace t2gnn
