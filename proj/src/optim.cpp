#include "pga/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace pga {

Adam::Adam(std::vector<Parameter*> params, AdamConfig config) : params_(std::move(params)), config_(config) {
  if (!(config_.lr > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (!(config_.weight_decay >= 0.0)) throw std::invalid_argument("weight decay must be >= 0");
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (Parameter* p : params_) {
    m_.emplace_back(p->value.shape());
    v_.emplace_back(p->value.shape());
  }
}

double Adam::learning_rate_at(std::size_t step) const {
  if (config_.warmup_iters == 0 || step >= config_.warmup_iters) return config_.lr;
  const double frac = static_cast<double>(step) / static_cast<double>(config_.warmup_iters);
  return config_.lr * (0.1 + 0.9 * frac);
}

void Adam::step() {
  for (Parameter* p : params_) {
    if (!p->has_grad) throw std::logic_error("adam step: parameter '" + p->name + "' has no gradient");
  }
  const double lr = learning_rate_at(steps_);
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double bc1 = 1.0 - std::pow(config_.beta1, t);
  const double bc2 = 1.0 - std::pow(config_.beta2, t);
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Parameter& p = *params_[k];
    Tensor& m = m_[k];
    Tensor& v = v_[k];
    for (std::size_t i = 0; i < p.value.numel(); ++i) {
      const double g = p.grad[i];
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g;
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g * g;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p.value[i] -= lr * (mhat / (std::sqrt(vhat) + config_.eps) + config_.weight_decay * p.value[i]);
    }
    p.zero_grad();
  }
}

}  // namespace pga
