#include "t2gnn/autodiff.hpp"

#include "t2gnn/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace t2gnn {

Parameter::Parameter(std::string name, DenseMatrix value)
    : name_(std::move(name)),
      value_(std::move(value)),
      grad_(DenseMatrix::Zero(value_.rows(), value_.cols())),
      m_(DenseMatrix::Zero(value_.rows(), value_.cols())),
      v_(DenseMatrix::Zero(value_.rows(), value_.cols())) {}

const DenseMatrix& Var::value() const { return tape_->value_of(id_); }
const DenseMatrix& Var::grad() const { return tape_->grad_of(id_); }
bool Var::requires_grad() const { return tape_->requires_grad(id_); }

Var Tape::push(Node node) {
  if (backward_done_) throw ContractError("tape already consumed by backward(); call reset() first");
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(DenseMatrix value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::param(Parameter& p) {
  Node n;
  n.value = p.value();
  n.requires_grad = true;
  n.param = &p;
  return push(std::move(n));
}

Var Tape::variable(DenseMatrix value) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = true;
  return push(std::move(n));
}

Var Tape::record(DenseMatrix value, std::initializer_list<Var> inputs, Backward backward) {
  return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()), std::move(backward));
}

Var Tape::record(DenseMatrix value, std::span<const Var> inputs, Backward backward) {
  Node n;
  n.value = std::move(value);
  for (const auto& in : inputs) {
    if (in.tape_ != this) throw ContractError("operands recorded on different tapes");
    n.requires_grad = n.requires_grad || nodes_[in.id_].requires_grad;
  }
  if (n.requires_grad) n.backward = std::move(backward);
  return push(std::move(n));
}

void Tape::accumulate(const Var& v, const DenseMatrix& g) {
  Node& n = nodes_[v.id_];
  if (!n.requires_grad) return;
  if (n.grad.size() == 0) {
    n.grad = g;
  } else {
    n.grad += g;
  }
}

DenseMatrix& Tape::adjoint(const Var& v) {
  Node& n = nodes_[v.id_];
  if (n.grad.size() == 0) n.grad = DenseMatrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::backward(const Var& loss) {
  if (backward_done_) throw ContractError("backward() called twice on the same tape");
  if (loss.tape_ != this) throw ContractError("loss was not recorded on this tape");
  const DenseMatrix& lv = nodes_[loss.id_].value;
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw ContractError("backward() needs a scalar loss, got " + shape_string(lv));
  }
  backward_done_ = true;
  if (!nodes_[loss.id_].requires_grad) return;
  nodes_[loss.id_].grad = DenseMatrix::Ones(1, 1);
  for (std::size_t i = loss.id_ + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.size() == 0) continue;
    if (n.backward) n.backward(*this, n.grad);
    if (n.param != nullptr) n.param->grad() += n.grad;
  }
}

void Tape::reset() {
  nodes_.clear();
  backward_done_ = false;
  branch_signature_ = 0;
}

void Tape::mix_branch_signature(std::uint64_t h) {
  branch_signature_ ^= h + 0x9e3779b97f4a7c15ULL + (branch_signature_ << 6) + (branch_signature_ >> 2);
}

namespace {

void require_same_shape(const char* op, const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a) + " vs " + shape_string(b));
  }
}

std::uint64_t sign_pattern_hash(const DenseMatrix& x) {
  std::uint64_t h = 1469598103934665603ULL;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    h ^= (x.data()[k] > 0.0) ? 0x5bd1e995ULL : 0x27d4eb2fULL;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: " + shape_string(a.value()) + " x " + shape_string(b.value()));
  }
  DenseMatrix out = a.value() * b.value();
  return a.tape().record(std::move(out), {a, b}, [a, b](Tape& t, const DenseMatrix& g) {
    if (a.requires_grad()) t.accumulate(a, g * b.value().transpose());
    if (b.requires_grad()) t.accumulate(b, a.value().transpose() * g);
  });
}

Var sparse_matmul(const SparseRowMatrix& s, const Var& d) {
  DenseMatrix out = s.multiply(d.value());
  const SparseRowMatrix* sp = &s;
  return d.tape().record(std::move(out), {d}, [sp, d](Tape& t, const DenseMatrix& g) {
    t.accumulate(d, sp->transpose_multiply(g));
  });
}

Var add(const Var& a, const Var& b) {
  require_same_shape("add", a.value(), b.value());
  return a.tape().record(a.value() + b.value(), {a, b}, [a, b](Tape& t, const DenseMatrix& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Var sub(const Var& a, const Var& b) {
  require_same_shape("sub", a.value(), b.value());
  return a.tape().record(a.value() - b.value(), {a, b}, [a, b](Tape& t, const DenseMatrix& g) {
    t.accumulate(a, g);
    if (b.requires_grad()) t.accumulate(b, -g);
  });
}

Var scale(const Var& x, double c) {
  return x.tape().record(x.value() * c, {x}, [x, c](Tape& t, const DenseMatrix& g) { t.accumulate(x, g * c); });
}

Var add_bias(const Var& x, const Var& b) {
  if (b.rows() != 1 || b.cols() != x.cols()) {
    throw DimensionError("add_bias: bias " + shape_string(b.value()) + " for input " + shape_string(x.value()));
  }
  DenseMatrix out = x.value().rowwise() + b.value().row(0);
  return x.tape().record(std::move(out), {x, b}, [x, b](Tape& t, const DenseMatrix& g) {
    t.accumulate(x, g);
    if (b.requires_grad()) t.accumulate(b, g.colwise().sum());
  });
}

Var relu(const Var& x) {
  x.tape().mix_branch_signature(sign_pattern_hash(x.value()));
  DenseMatrix out = x.value().cwiseMax(0.0);
  return x.tape().record(std::move(out), {x}, [x](Tape& t, const DenseMatrix& g) {
    t.accumulate(x, (x.value().array() > 0.0).select(g, 0.0));
  });
}

Var leaky_relu(const Var& x, double slope) {
  x.tape().mix_branch_signature(sign_pattern_hash(x.value()));
  DenseMatrix out = (x.value().array() > 0.0).select(x.value(), slope * x.value());
  return x.tape().record(std::move(out), {x}, [x, slope](Tape& t, const DenseMatrix& g) {
    t.accumulate(x, (x.value().array() > 0.0).select(g, slope * g));
  });
}

Var elu(const Var& x, double alpha) {
  x.tape().mix_branch_signature(sign_pattern_hash(x.value()));
  DenseMatrix out = (x.value().array() > 0.0).select(x.value(), alpha * (x.value().array().exp() - 1.0));
  return x.tape().record(std::move(out), {x}, [x, alpha](Tape& t, const DenseMatrix& g) {
    DenseMatrix slope = (x.value().array() > 0.0).select(DenseMatrix::Ones(x.rows(), x.cols()),
                                                         alpha * x.value().array().exp());
    t.accumulate(x, g.cwiseProduct(slope));
  });
}

Var log_softmax_rows(const Var& x) {
  const DenseMatrix& v = x.value();
  DenseMatrix out(v.rows(), v.cols());
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    double m = v.row(i).maxCoeff();
    double lse = m + std::log((v.row(i).array() - m).exp().sum());
    out.row(i) = v.row(i).array() - lse;
  }
  DenseMatrix probs = out.array().exp();
  return x.tape().record(std::move(out), {x}, [x, probs = std::move(probs)](Tape& t, const DenseMatrix& g) {
    DenseMatrix gx = g - (probs.array().colwise() * g.rowwise().sum().array()).matrix();
    t.accumulate(x, gx);
  });
}

Var dropout(const Var& x, double p, bool training, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) throw ConfigError("dropout rate must lie in [0, 1)");
  if (!training || p == 0.0) return x;
  DenseMatrix mask(x.rows(), x.cols());
  const double keep = 1.0 / (1.0 - p);
  for (Eigen::Index k = 0; k < mask.size(); ++k) mask.data()[k] = rng.uniform() < p ? 0.0 : keep;
  DenseMatrix out = x.value().cwiseProduct(mask);
  return x.tape().record(std::move(out), {x}, [x, mask = std::move(mask)](Tape& t, const DenseMatrix& g) {
    t.accumulate(x, g.cwiseProduct(mask));
  });
}

Var sum(const Var& x) {
  DenseMatrix out(1, 1);
  out(0, 0) = x.value().sum();
  return x.tape().record(std::move(out), {x}, [x](Tape& t, const DenseMatrix& g) {
    t.accumulate(x, DenseMatrix::Constant(x.rows(), x.cols(), g(0, 0)));
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ConfigError("concat_cols needs at least one operand");
  const Eigen::Index rows = parts.front().rows();
  Eigen::Index cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) throw DimensionError("concat_cols: row mismatch " + shape_string(p.value()));
    cols += p.cols();
  }
  DenseMatrix out(rows, cols);
  Eigen::Index c = 0;
  for (const auto& p : parts) {
    out.middleCols(c, p.cols()) = p.value();
    c += p.cols();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return parts.front().tape().record(std::move(out), parts, [inputs](Tape& t, const DenseMatrix& g) {
    Eigen::Index c = 0;
    for (const auto& p : inputs) {
      if (p.requires_grad()) t.accumulate(p, g.middleCols(c, p.cols()));
      c += p.cols();
    }
  });
}

Var slice_cols(const Var& x, Eigen::Index start, Eigen::Index width) {
  if (start < 0 || width < 0 || start + width > x.cols()) {
    throw DimensionError("slice_cols: [" + std::to_string(start) + ", " + std::to_string(start + width) +
                         ") outside " + shape_string(x.value()));
  }
  DenseMatrix out = x.value().middleCols(start, width);
  return x.tape().record(std::move(out), {x}, [x, start, width](Tape& t, const DenseMatrix& g) {
    t.adjoint(x).middleCols(start, width) += g;
  });
}

Var select_observed(const DenseMatrix& x, const BoolMatrix& observed, const Var& theta) {
  if (x.rows() != observed.rows() || x.cols() != observed.cols()) {
    throw DimensionError("select_observed: mask " + shape_string(observed.rows(), observed.cols()) +
                         " for features " + shape_string(x));
  }
  require_same_shape("select_observed", x, theta.value());
  DenseMatrix out = observed.select(x, theta.value());
  return theta.tape().record(std::move(out), {theta}, [theta, &observed](Tape& t, const DenseMatrix& g) {
    t.accumulate(theta, observed.select(DenseMatrix::Zero(g.rows(), g.cols()), g));
  });
}

Var cross_entropy(const Var& log_probs, std::span<const int> labels, std::span<const int> index) {
  if (index.empty()) throw ConfigError("cross_entropy: empty index set");
  if (static_cast<Eigen::Index>(labels.size()) != log_probs.rows()) {
    throw DimensionError("cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                         shape_string(log_probs.value()));
  }
  const auto classes = log_probs.cols();
  double total = 0.0;
  for (int i : index) {
    if (i < 0 || i >= log_probs.rows()) throw ConfigError("cross_entropy: node index out of range");
    int y = labels[i];
    if (y < 0 || y >= classes) throw ConfigError("cross_entropy: label out of range");
    total -= log_probs.value()(i, y);
  }
  const double inv = 1.0 / static_cast<double>(index.size());
  DenseMatrix out(1, 1);
  out(0, 0) = total * inv;
  std::vector<int> idx(index.begin(), index.end());
  std::vector<int> lab(labels.begin(), labels.end());
  return log_probs.tape().record(std::move(out), {log_probs},
                                 [log_probs, idx = std::move(idx), lab = std::move(lab), inv](Tape& t,
                                                                                              const DenseMatrix& g) {
                                   DenseMatrix& adj = t.adjoint(log_probs);
                                   for (int i : idx) adj(i, lab[i]) -= g(0, 0) * inv;
                                 });
}

namespace {

struct AttentionForward {
  std::vector<double> alpha;      // per stored entry of pattern
  std::vector<double> pre;        // pre-activation score per entry
};

AttentionForward attention_forward(const SparseRowMatrix& pattern, const DenseMatrix& h, const DenseMatrix& a_self,
                                   const DenseMatrix& a_neigh, double slope) {
  if (pattern.rows() != h.rows() || pattern.cols() != h.rows()) {
    throw DimensionError("graph_attention: pattern " + shape_string(pattern.rows(), pattern.cols()) +
                         " for features " + shape_string(h));
  }
  if (a_self.rows() != h.cols() || a_self.cols() != 1 || a_neigh.rows() != h.cols() || a_neigh.cols() != 1) {
    throw DimensionError("graph_attention: attention vectors must be " + shape_string(h.cols(), 1));
  }
  const Eigen::VectorXd s = h * a_self;
  const Eigen::VectorXd u = h * a_neigh;
  AttentionForward f;
  f.alpha.reserve(pattern.nnz());
  f.pre.reserve(pattern.nnz());
  for (Eigen::Index i = 0; i < pattern.rows(); ++i) {
    auto row = pattern.row(i);
    const std::size_t base = f.alpha.size();
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& e : row) {
      double p = s(i) + u(e.col);
      f.pre.push_back(p);
      double act = p > 0.0 ? p : slope * p;
      f.alpha.push_back(act);
      m = std::max(m, act);
    }
    double z = 0.0;
    for (std::size_t k = base; k < f.alpha.size(); ++k) {
      f.alpha[k] = std::exp(f.alpha[k] - m);
      z += f.alpha[k];
    }
    for (std::size_t k = base; k < f.alpha.size(); ++k) f.alpha[k] /= z;
  }
  return f;
}

}  // namespace

SparseRowMatrix attention_coefficients(const SparseRowMatrix& pattern, const DenseMatrix& h,
                                       const DenseMatrix& a_self, const DenseMatrix& a_neigh,
                                       double negative_slope) {
  auto f = attention_forward(pattern, h, a_self, a_neigh, negative_slope);
  SparseRowBuilder builder(pattern.rows(), pattern.cols());
  std::vector<SparseEntry> row;
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < pattern.rows(); ++i) {
    row.clear();
    for (const auto& e : pattern.row(i)) {
      if (f.alpha[k] > 0.0) row.push_back({e.col, f.alpha[k]});
      ++k;
    }
    builder.push_row(row);
  }
  return std::move(builder).finish();
}

Var graph_attention(const SparseRowMatrix& pattern, const Var& h, const Var& a_self, const Var& a_neigh,
                    double negative_slope) {
  auto f = attention_forward(pattern, h.value(), a_self.value(), a_neigh.value(), negative_slope);
  std::uint64_t sig = 1469598103934665603ULL;
  for (double p : f.pre) sig = (sig ^ (p > 0.0 ? 1u : 2u)) * 1099511628211ULL;
  h.tape().mix_branch_signature(sig);

  const DenseMatrix& hv = h.value();
  DenseMatrix out = DenseMatrix::Zero(hv.rows(), hv.cols());
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < pattern.rows(); ++i) {
    for (const auto& e : pattern.row(i)) out.row(i).noalias() += f.alpha[k++] * hv.row(e.col);
  }
  const SparseRowMatrix* pat = &pattern;
  return h.tape().record(
      std::move(out), {h, a_self, a_neigh},
      [pat, h, a_self, a_neigh, negative_slope, f = std::move(f)](Tape& t, const DenseMatrix& g) {
        const DenseMatrix& hv = h.value();
        DenseMatrix dh = DenseMatrix::Zero(hv.rows(), hv.cols());
        Eigen::VectorXd ds = Eigen::VectorXd::Zero(hv.rows());
        Eigen::VectorXd du = Eigen::VectorXd::Zero(hv.rows());
        std::vector<double> dalpha;
        std::size_t k = 0;
        for (Eigen::Index i = 0; i < pat->rows(); ++i) {
          auto row = pat->row(i);
          dalpha.resize(row.size());
          double weighted = 0.0;
          for (std::size_t q = 0; q < row.size(); ++q) {
            const auto j = row[q].col;
            dalpha[q] = g.row(i).dot(hv.row(j));
            dh.row(j).noalias() += f.alpha[k + q] * g.row(i);
            weighted += f.alpha[k + q] * dalpha[q];
          }
          for (std::size_t q = 0; q < row.size(); ++q) {
            double de = f.alpha[k + q] * (dalpha[q] - weighted);
            double dp = f.pre[k + q] > 0.0 ? de : negative_slope * de;
            ds(i) += dp;
            du(row[q].col) += dp;
          }
          k += row.size();
        }
        dh.noalias() += ds * a_self.value().transpose();
        dh.noalias() += du * a_neigh.value().transpose();
        t.accumulate(h, dh);
        if (a_self.requires_grad()) t.accumulate(a_self, hv.transpose() * ds);
        if (a_neigh.requires_grad()) t.accumulate(a_neigh, hv.transpose() * du);
      });
}

}  // namespace t2gnn
