#pragma once

#include "t2gnn/autodiff.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace t2gnn {

struct NegativePolicy {
  enum class Kind { Auto, All, Sampled };
  Kind kind = Kind::Auto;
  int count = 256;             // per node, Sampled (and Auto above the threshold)
  int auto_threshold = 5000;   // Auto uses all negatives up to this many nodes

  /// "auto", "all", or a positive count.
  static NegativePolicy parse(const std::string& text);
  std::string to_string() const;
};

struct DistillConfig {
  double rho = 2.0;          // logit temperature
  double rho_prime = 0.5;    // contrastive temperature
  double lambda = 0.5;       // feature-teacher weight
  NegativePolicy negatives;
  bool l2_mode = false;      // squared-distance alignment instead of the contrastive loss
  bool use_logit = true;     // false drops L_log from every dual loss
  bool use_mid = true;       // false drops L_mid from every dual loss
  double logit_weight = 1.0; // multiplier on L_log when present
  double mid_weight = 1.0;   // multiplier on L_mid when present

  void validate() const;
};

/// Negatives for each anchor position p in [0, m): every other position, or a
/// sampled list of distinct other positions.
class NegativeSet {
 public:
  static NegativeSet all();
  /// Draws min(count, m − 1) distinct negatives per anchor; count ≥ m − 1 gives all().
  static NegativeSet sample(Eigen::Index m, int count, Rng& rng);
  /// Applies the policy to m anchors (Auto: all when m ≤ threshold).
  static NegativeSet from_policy(const NegativePolicy& policy, Eigen::Index m, Rng& rng);

  bool is_all() const { return all_; }
  const std::vector<Eigen::Index>& of(Eigen::Index anchor) const { return lists_[anchor]; }
  /// Anchor count of a sampled set (0 for all()).
  Eigen::Index anchors() const { return static_cast<Eigen::Index>(lists_.size()); }

 private:
  bool all_ = true;
  std::vector<std::vector<Eigen::Index>> lists_;
};

/// Mean over rows of KL(softmax(z_s/ρ) ‖ softmax(z_t/ρ)). Gradient reaches
/// z_t only if it is not a constant (online training).
Var logit_distill(const Var& z_s, const Var& z_t, double rho);

/// Mean over anchors of −log(e^{s_ii} / (e^{s_ii} + Σ_{j∈neg(i)} e^{s_ij})),
/// s_ij = cos(r_s_i, r_t_j)/ρ′. `nodes` restricts anchors and negatives to a
/// subset of rows (empty = all rows); negative lists index into that subset.
/// Throws NumericError naming the node if a used row has zero norm.
Var contrastive_mid_distill(const Var& r_s, const Var& r_t, double rho_prime, const NegativeSet& negatives,
                            std::span<const int> nodes = {});

/// ‖R_s − R_t‖²_F / n.
Var l2_mid_distill(const Var& r_s, const Var& r_t);

/// Teacher-side operands for one dual loss.
struct TeacherSignal {
  Var logits;
  Var intermediate;
  std::span<const int> nodes;  // anchors for the intermediate term (empty = all)
};

/// L_log + L_mid against one teacher; r_s must already match the teacher width.
/// Dropped components (cfg.use_logit / use_mid) are absent from the tape.
Var dual_loss(const Var& z_s, const Var& r_s, const TeacherSignal& teacher, const DistillConfig& cfg,
              const NegativeSet& negatives);

/// J_c + λ·dual_fea + (1−λ)·dual_str. A term with zero weight or no value is
/// left off the tape entirely.
Var student_loss(const Var& ce, const std::optional<Var>& dual_fea, const std::optional<Var>& dual_str,
                 double lambda);

/// Learnable affine map from the student representation to a teacher's width,
/// used only inside the intermediate-alignment loss.
class ProjectionHead {
 public:
  ProjectionHead(std::string name, Eigen::Index in, Eigen::Index out, Rng& rng);
  Var apply(Tape& tape, const Var& r);
  std::vector<Parameter*> parameters() { return {&weight_, &bias_}; }

 private:
  Parameter weight_;
  Parameter bias_;
};

}  // namespace t2gnn
