#pragma once

#include "t2gnn/matrix.hpp"
#include "t2gnn/rng.hpp"

#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace t2gnn {

/// Trainable matrix with its gradient accumulator and Adam state.
class Parameter {
 public:
  Parameter() = default;
  Parameter(std::string name, DenseMatrix value);

  const std::string& name() const { return name_; }
  DenseMatrix& value() { return value_; }
  const DenseMatrix& value() const { return value_; }
  DenseMatrix& grad() { return grad_; }
  const DenseMatrix& grad() const { return grad_; }

  DenseMatrix& first_moment() { return m_; }
  DenseMatrix& second_moment() { return v_; }
  std::int64_t step() const { return step_; }
  void advance_step() { ++step_; }

  void zero_grad() { grad_.setZero(); }

 private:
  std::string name_;
  DenseMatrix value_;
  DenseMatrix grad_;
  DenseMatrix m_;
  DenseMatrix v_;
  std::int64_t step_ = 0;
};

class Tape;

/// Handle to a value recorded on a tape.
class Var {
 public:
  Var() = default;

  const DenseMatrix& value() const;
  /// Gradient after Tape::backward; zero-shaped if no gradient reached it.
  const DenseMatrix& grad() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  bool requires_grad() const;
  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Ordered record of differentiable operations. backward() replays adjoints in
// exact reverse order. Parameters bound with param() receive their gradient
// (accumulated) when backward() finishes. Data operands (SparseRowMatrix,
// observation masks) are held by reference and must outlive backward().
class Tape {
 public:
  using Backward = std::function<void(Tape&, const DenseMatrix& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(DenseMatrix value);
  Var param(Parameter& p);
  /// Free leaf that requires a gradient (used for gradient checks).
  Var variable(DenseMatrix value);

  Var record(DenseMatrix value, std::initializer_list<Var> inputs, Backward backward);
  Var record(DenseMatrix value, std::span<const Var> inputs, Backward backward);

  void backward(const Var& loss);
  void reset();

  std::size_t size() const { return nodes_.size(); }
  bool backward_done() const { return backward_done_; }

  const DenseMatrix& value_of(std::size_t id) const { return nodes_[id].value; }
  const DenseMatrix& grad_of(std::size_t id) const { return nodes_[id].grad; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  /// Adds g into the adjoint of v if v takes part in differentiation.
  void accumulate(const Var& v, const DenseMatrix& g);
  /// Mutable adjoint of v, zero-initialized on first access.
  DenseMatrix& adjoint(const Var& v);

  /// Hash of the branch pattern taken by piecewise ops (ReLU signs etc.).
  /// Finite-difference checks compare it to detect kink crossings.
  std::uint64_t branch_signature() const { return branch_signature_; }
  void mix_branch_signature(std::uint64_t h);

 private:
  struct Node {
    DenseMatrix value;
    DenseMatrix grad;
    bool requires_grad = false;
    Parameter* param = nullptr;
    Backward backward;
  };
  Var push(Node node);

  std::deque<Node> nodes_;
  bool backward_done_ = false;
  std::uint64_t branch_signature_ = 0;
};

// --- dense ops ---------------------------------------------------------------

Var matmul(const Var& a, const Var& b);
/// s · d with s constant; no gradient flows to s.
Var sparse_matmul(const SparseRowMatrix& s, const Var& d);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var scale(const Var& x, double c);
/// x + b broadcast over rows; b is 1×cols.
Var add_bias(const Var& x, const Var& b);
Var relu(const Var& x);
Var leaky_relu(const Var& x, double slope);
Var elu(const Var& x, double alpha = 1.0);
Var log_softmax_rows(const Var& x);
/// Inverted dropout; identity when !training or p == 0.
Var dropout(const Var& x, double p, bool training, Rng& rng);
Var sum(const Var& x);
Var concat_cols(std::span<const Var> parts);
Var slice_cols(const Var& x, Eigen::Index start, Eigen::Index width);
/// Entries of x where observed, entries of theta elsewhere. x is data.
Var select_observed(const DenseMatrix& x, const BoolMatrix& observed, const Var& theta);

/// Mean of −log_probs(i, labels[i]) over the index set.
Var cross_entropy(const Var& log_probs, std::span<const int> labels, std::span<const int> index);

/// out_i = Σ_{j ∈ pattern row i} α_ij h_j with
/// α_ij = softmax_j(LeakyReLU(a_selfᵀh_i + a_neighᵀh_j)). pattern should contain self-loops.
Var graph_attention(const SparseRowMatrix& pattern, const Var& h, const Var& a_self, const Var& a_neigh,
                    double negative_slope = 0.2);

/// Attention coefficients of graph_attention as a sparse matrix (no tape).
SparseRowMatrix attention_coefficients(const SparseRowMatrix& pattern, const DenseMatrix& h,
                                       const DenseMatrix& a_self, const DenseMatrix& a_neigh,
                                       double negative_slope = 0.2);

}  // namespace t2gnn
