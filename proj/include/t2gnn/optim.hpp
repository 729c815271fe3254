#pragma once

#include "t2gnn/autodiff.hpp"

#include <span>

namespace t2gnn {

struct AdamConfig {
  double lr = 0.001;
  double weight_decay = 0.0005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Decoupled weight decay (w -= lr·wd·w) followed by the bias-corrected Adam update.
void adam_step(std::span<Parameter* const> params, const AdamConfig& cfg);
void zero_grads(std::span<Parameter* const> params);

}  // namespace t2gnn
