#include "t2gnn/optim.hpp"

#include <cmath>

namespace t2gnn {

void adam_step(std::span<Parameter* const> params, const AdamConfig& cfg) {
  for (Parameter* p : params) {
    p->advance_step();
    const double t = static_cast<double>(p->step());
    const double bc1 = 1.0 - std::pow(cfg.beta1, t);
    const double bc2 = 1.0 - std::pow(cfg.beta2, t);
    DenseMatrix& w = p->value();
    const DenseMatrix& g = p->grad();
    if (cfg.weight_decay != 0.0) w *= (1.0 - cfg.lr * cfg.weight_decay);
    DenseMatrix& m = p->first_moment();
    DenseMatrix& v = p->second_moment();
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
    w.array() -= cfg.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + cfg.eps);
  }
}

void zero_grads(std::span<Parameter* const> params) {
  for (Parameter* p : params) p->zero_grad();
}

}  // namespace t2gnn
