#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pga/autograd.hpp"

namespace pga {

/// Builds a scalar loss on a fresh tape from the current parameter values.
using LossBuilder = std::function<Var(Tape&)>;

/// Reverse-mode gradients of the built loss for each parameter (grads are
/// zeroed first and left populated).
std::vector<Tensor> analytic_gradients(const LossBuilder& build, const std::vector<Parameter*>& params);

/// Central differences (f(p+h) - f(p-h)) / 2h, one coordinate at a time.
/// Throws std::runtime_error if the loss is not finite at a probe point.
std::vector<Tensor> numeric_gradients(const LossBuilder& build, const std::vector<Parameter*>& params, double step);

/// max over coordinates of |a - n| / max(1e-12, |a| + |n|).
double max_relative_error(const std::vector<Tensor>& analytic, const std::vector<Tensor>& numeric);

struct GradCheckResult {
  double max_rel_error = 0.0;
  /// "<param name>[<flat index>]" of the worst coordinate.
  std::string worst;
};

GradCheckResult finite_diff_check(const LossBuilder& build, const std::vector<Parameter*>& params, double step = 1e-5);

}  // namespace pga
