#pragma once

#include <cstddef>
#include <vector>

#include "pga/autograd.hpp"

namespace pga {

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// Decoupled: applied as p -= lr_t * weight_decay * p, outside the moment estimates.
  double weight_decay = 5e-4;
  /// Learning rate ramps linearly from lr/10 to lr over this many steps.
  std::size_t warmup_iters = 500;
};

/// Adam with decoupled weight decay and linear warm-up.
class Adam {
 public:
  Adam(std::vector<Parameter*> params, AdamConfig config);

  /// Applies one update and zeroes the gradients. Throws std::logic_error if
  /// any parameter was not reached by a backward pass since the last step.
  void step();

  /// Learning rate used by the update with 0-based index `step`.
  double learning_rate_at(std::size_t step) const;
  std::size_t steps() const { return steps_; }
  const AdamConfig& config() const { return config_; }

 private:
  std::vector<Parameter*> params_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  AdamConfig config_;
  std::size_t steps_ = 0;
};

}  // namespace pga
