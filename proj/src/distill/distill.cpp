#include "t2gnn/distill.hpp"

#include "t2gnn/error.hpp"

#include <cmath>
#include <limits>
#include <unordered_set>

namespace t2gnn {

NegativePolicy NegativePolicy::parse(const std::string& text) {
  NegativePolicy p;
  if (text == "auto") return p;
  if (text == "all") {
    p.kind = Kind::All;
    return p;
  }
  std::size_t used = 0;
  int n = 0;
  try {
    n = std::stoi(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty() || n < 1)
    throw ConfigError("distill.negatives must be \"auto\", \"all\", or a positive count, got \"" + text + "\"");
  p.kind = Kind::Sampled;
  p.count = n;
  return p;
}

std::string NegativePolicy::to_string() const {
  switch (kind) {
    case Kind::Auto: return "auto";
    case Kind::All: return "all";
    case Kind::Sampled: return std::to_string(count);
  }
  return "auto";
}

void DistillConfig::validate() const {
  if (!(rho >= 1.0) || !std::isfinite(rho)) throw ConfigError("distill.rho must be a finite value >= 1");
  if (!(rho_prime > 0.0) || !std::isfinite(rho_prime)) throw ConfigError("distill.rho_prime must be positive");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("distill.lambda must lie in [0, 1]");
  if (negatives.count < 1) throw ConfigError("distill.negatives count must be positive");
  if (negatives.auto_threshold < 1) throw ConfigError("distill.negatives threshold must be positive");
  if (!(logit_weight >= 0.0) || !(mid_weight >= 0.0)) throw ConfigError("distill term weights must be nonnegative");
}

// --- negatives -----------------------------------------------------------

NegativeSet NegativeSet::all() { return NegativeSet(); }

NegativeSet NegativeSet::sample(Eigen::Index m, int count, Rng& rng) {
  if (count < 1) throw ConfigError("negative sample count must be positive");
  if (count >= m - 1) return all();
  NegativeSet s;
  s.all_ = false;
  s.lists_.resize(static_cast<std::size_t>(m));
  std::unordered_set<Eigen::Index> seen;
  for (Eigen::Index i = 0; i < m; ++i) {
    auto& list = s.lists_[i];
    list.reserve(static_cast<std::size_t>(count));
    seen.clear();
    // rejection is cheap because count < m − 1 and sampling is mostly sparse
    while (static_cast<int>(list.size()) < count) {
      Eigen::Index j = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(m - 1)));
      if (j >= i) ++j;
      if (seen.insert(j).second) list.push_back(j);
    }
  }
  return s;
}

NegativeSet NegativeSet::from_policy(const NegativePolicy& policy, Eigen::Index m, Rng& rng) {
  switch (policy.kind) {
    case NegativePolicy::Kind::All: return all();
    case NegativePolicy::Kind::Sampled: return sample(m, policy.count, rng);
    case NegativePolicy::Kind::Auto:
      return m <= policy.auto_threshold ? all() : sample(m, policy.count, rng);
  }
  return all();
}

// --- logit distillation --------------------------------------------------

namespace {

void require_same_shape(const char* op, const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError(std::string(op) + ": " + shape_string(a) + " vs " + shape_string(b));
}

DenseMatrix log_softmax(const DenseMatrix& z) {
  DenseMatrix out(z.rows(), z.cols());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double m = z.row(i).maxCoeff();
    const double lse = m + std::log((z.row(i).array() - m).exp().sum());
    out.row(i) = z.row(i).array() - lse;
  }
  return out;
}

DenseMatrix scalar(double v) {
  DenseMatrix s(1, 1);
  s(0, 0) = v;
  return s;
}

}  // namespace

Var logit_distill(const Var& z_s, const Var& z_t, double rho) {
  require_same_shape("logit_distill", z_s.value(), z_t.value());
  if (!(rho > 0.0)) throw ConfigError("logit_distill: temperature must be positive");
  const Eigen::Index n = z_s.rows();
  if (n == 0) throw DimensionError("logit_distill: no rows");
  DenseMatrix a = log_softmax(z_s.value() / rho);
  DenseMatrix b = log_softmax(z_t.value() / rho);
  DenseMatrix p = a.array().exp().matrix();
  Eigen::VectorXd kl = (p.array() * (a - b).array()).rowwise().sum().matrix();
  const double loss = kl.sum() / static_cast<double>(n);
  return z_s.tape().record(
      scalar(loss), {z_s, z_t},
      [z_s, z_t, rho, n, a = std::move(a), b = std::move(b), p = std::move(p), kl = std::move(kl)](
          Tape& t, const DenseMatrix& g) {
        const double c = g(0, 0) / (rho * static_cast<double>(n));
        if (z_s.requires_grad()) {
          DenseMatrix diff = a - b;
          diff.colwise() -= kl;
          t.accumulate(z_s, c * p.cwiseProduct(diff));
        }
        if (z_t.requires_grad()) t.accumulate(z_t, c * (b.array().exp().matrix() - p));
      });
}

// --- contrastive alignment -----------------------------------------------

Var contrastive_mid_distill(const Var& r_s, const Var& r_t, double rho_prime, const NegativeSet& negatives,
                            std::span<const int> nodes) {
  if (r_s.rows() != r_t.rows() || r_s.cols() != r_t.cols())
    throw DimensionError("contrastive_mid_distill: " + shape_string(r_s.value()) + " vs " +
                         shape_string(r_t.value()));
  if (!(rho_prime > 0.0)) throw ConfigError("contrastive_mid_distill: temperature must be positive");

  std::vector<int> index(nodes.begin(), nodes.end());
  if (index.empty()) {
    index.resize(static_cast<std::size_t>(r_s.rows()));
    for (std::size_t i = 0; i < index.size(); ++i) index[i] = static_cast<int>(i);
  }
  const Eigen::Index m = static_cast<Eigen::Index>(index.size());
  if (m == 0) throw DimensionError("contrastive_mid_distill: no anchor nodes");
  for (int v : index)
    if (v < 0 || v >= r_s.rows()) throw DimensionError("contrastive_mid_distill: node index out of range");

  // Unit rows of the selected nodes.
  const Eigen::Index w = r_s.cols();
  DenseMatrix u(m, w), v(m, w);
  Eigen::VectorXd su(m), sv(m);
  for (Eigen::Index p = 0; p < m; ++p) {
    const int node = index[p];
    su(p) = r_s.value().row(node).norm();
    sv(p) = r_t.value().row(node).norm();
    if (!(su(p) > 0.0))
      throw NumericError("contrastive_mid_distill: zero-norm student row at node " + std::to_string(node));
    if (!(sv(p) > 0.0))
      throw NumericError("contrastive_mid_distill: zero-norm teacher row at node " + std::to_string(node));
    u.row(p) = r_s.value().row(node) / su(p);
    v.row(p) = r_t.value().row(node) / sv(p);
  }

  // du, dv: ∂loss/∂u and ∂loss/∂v for the unit rows.
  double loss = 0.0;
  DenseMatrix du = DenseMatrix::Zero(m, w), dv = DenseMatrix::Zero(m, w);
  const double inv_m = 1.0 / static_cast<double>(m);
  if (negatives.is_all()) {
    DenseMatrix s = (u * v.transpose()) / rho_prime;
    for (Eigen::Index p = 0; p < m; ++p) {
      const double mx = s.row(p).maxCoeff();
      Eigen::RowVectorXd e = (s.row(p).array() - mx).exp().matrix();
      const double z = e.sum();
      loss += mx + std::log(z) - s(p, p);
      s.row(p) = e / z;
      s(p, p) -= 1.0;
    }
    s *= inv_m / rho_prime;  // now ∂loss/∂(u_p·v_q)
    du.noalias() = s * v;
    dv.noalias() = s.transpose() * u;
  } else {
    if (negatives.anchors() != m)
      throw ContractError("contrastive_mid_distill: negative set drawn for " + std::to_string(negatives.anchors()) +
                          " anchors, got " + std::to_string(m));
    std::vector<double> logits;
    for (Eigen::Index p = 0; p < m; ++p) {
      const auto& list = negatives.of(p);
      logits.assign(1, u.row(p).dot(v.row(p)) / rho_prime);
      for (Eigen::Index q : list) {
        if (q < 0 || q >= m || q == p) throw ContractError("contrastive_mid_distill: invalid negative index");
        logits.push_back(u.row(p).dot(v.row(q)) / rho_prime);
      }
      double mx = -std::numeric_limits<double>::infinity();
      for (double l : logits) mx = std::max(mx, l);
      double z = 0.0;
      for (double& l : logits) z += (l = std::exp(l - mx));
      loss += std::log(z) - std::log(logits[0]);
      const double c = inv_m / rho_prime;
      const double gp = c * (logits[0] / z - 1.0);
      du.row(p) += gp * v.row(p);
      dv.row(p) += gp * u.row(p);
      for (std::size_t k = 0; k < list.size(); ++k) {
        const double gq = c * logits[k + 1] / z;
        du.row(p) += gq * v.row(list[k]);
        dv.row(list[k]) += gq * u.row(p);
      }
    }
  }
  loss *= inv_m;

  return r_s.tape().record(
      scalar(loss), {r_s, r_t},
      [r_s, r_t, index = std::move(index), u = std::move(u), v = std::move(v), su = std::move(su),
       sv = std::move(sv), du = std::move(du), dv = std::move(dv)](Tape& t, const DenseMatrix& g) {
        // through x/‖x‖: (d − x̂(x̂·d)) / ‖x‖
        auto unnormalize = [&](const DenseMatrix& unit, const Eigen::VectorXd& norm, const DenseMatrix& d,
                               Eigen::Index rows) {
          DenseMatrix out = DenseMatrix::Zero(rows, unit.cols());
          for (Eigen::Index p = 0; p < unit.rows(); ++p) {
            Eigen::RowVectorXd dp = g(0, 0) * d.row(p);
            out.row(index[p]) += (dp - unit.row(p) * unit.row(p).dot(dp)) / norm(p);
          }
          return out;
        };
        if (r_s.requires_grad()) t.accumulate(r_s, unnormalize(u, su, du, r_s.rows()));
        if (r_t.requires_grad()) t.accumulate(r_t, unnormalize(v, sv, dv, r_t.rows()));
      });
}

// --- squared distance ----------------------------------------------------

Var l2_mid_distill(const Var& r_s, const Var& r_t) {
  require_same_shape("l2_mid_distill", r_s.value(), r_t.value());
  const Eigen::Index n = r_s.rows();
  if (n == 0) throw DimensionError("l2_mid_distill: no rows");
  DenseMatrix diff = r_s.value() - r_t.value();
  const double loss = diff.squaredNorm() / static_cast<double>(n);
  return r_s.tape().record(scalar(loss), {r_s, r_t}, [r_s, r_t, n, diff = std::move(diff)](Tape& t, const DenseMatrix& g) {
    const double c = 2.0 * g(0, 0) / static_cast<double>(n);
    if (r_s.requires_grad()) t.accumulate(r_s, c * diff);
    if (r_t.requires_grad()) t.accumulate(r_t, -c * diff);
  });
}

// --- combinations --------------------------------------------------------

Var dual_loss(const Var& z_s, const Var& r_s, const TeacherSignal& teacher, const DistillConfig& cfg,
              const NegativeSet& negatives) {
  std::optional<Var> total;
  auto accumulate = [&](const Var& term, double weight) {
    Var w = weight == 1.0 ? term : scale(term, weight);
    total = total ? add(*total, w) : w;
  };
  if (cfg.use_logit) accumulate(logit_distill(z_s, teacher.logits, cfg.rho), cfg.logit_weight);
  if (cfg.use_mid) {
    accumulate(cfg.l2_mode ? l2_mid_distill(r_s, teacher.intermediate)
                           : contrastive_mid_distill(r_s, teacher.intermediate, cfg.rho_prime, negatives,
                                                     teacher.nodes),
               cfg.mid_weight);
  }
  if (!total) return z_s.tape().constant(scalar(0.0));
  return *total;
}

Var student_loss(const Var& ce, const std::optional<Var>& dual_fea, const std::optional<Var>& dual_str,
                 double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("student_loss: lambda must lie in [0, 1]");
  Var total = ce;
  if (dual_fea && lambda > 0.0) total = add(total, scale(*dual_fea, lambda));
  if (dual_str && lambda < 1.0) total = add(total, scale(*dual_str, 1.0 - lambda));
  return total;
}

// --- projection ----------------------------------------------------------

namespace {

DenseMatrix uniform_matrix(Eigen::Index rows, Eigen::Index cols, double limit, Rng& rng) {
  DenseMatrix m(rows, cols);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = rng.uniform(-limit, limit);
  return m;
}

}  // namespace

ProjectionHead::ProjectionHead(std::string name, Eigen::Index in, Eigen::Index out, Rng& rng) {
  const double limit = 1.0 / std::sqrt(static_cast<double>(std::max<Eigen::Index>(in, 1)));
  weight_ = Parameter(name + ".w", uniform_matrix(in, out, limit, rng));
  // nonzero bias keeps projected rows away from the origin
  bias_ = Parameter(name + ".b", uniform_matrix(1, out, limit, rng));
}

Var ProjectionHead::apply(Tape& tape, const Var& r) {
  return add_bias(matmul(r, tape.param(weight_)), tape.param(bias_));
}

}  // namespace t2gnn
