#include "pga/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pga {

namespace {

double evaluate(const LossBuilder& build) {
  Tape tape;
  const double v = build(tape).value().item();
  if (!std::isfinite(v)) throw std::runtime_error("loss is not finite at a finite-difference probe");
  return v;
}

double rel_err(double a, double n) { return std::abs(a - n) / std::max(1e-12, std::abs(a) + std::abs(n)); }

}  // namespace

std::vector<Tensor> analytic_gradients(const LossBuilder& build, const std::vector<Parameter*>& params) {
  zero_grads(params);
  Tape tape;
  Var loss = build(tape);
  tape.backward(loss);
  std::vector<Tensor> out;
  out.reserve(params.size());
  for (Parameter* p : params) out.push_back(p->grad);
  return out;
}

std::vector<Tensor> numeric_gradients(const LossBuilder& build, const std::vector<Parameter*>& params, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
  std::vector<Tensor> out;
  out.reserve(params.size());
  for (Parameter* p : params) {
    Tensor g(p->value.shape());
    for (std::size_t i = 0; i < p->value.numel(); ++i) {
      const double orig = p->value[i];
      p->value[i] = orig + step;
      const double up = evaluate(build);
      p->value[i] = orig - step;
      const double down = evaluate(build);
      p->value[i] = orig;
      g[i] = (up - down) / (2.0 * step);
    }
    out.push_back(std::move(g));
  }
  return out;
}

double max_relative_error(const std::vector<Tensor>& analytic, const std::vector<Tensor>& numeric) {
  if (analytic.size() != numeric.size()) throw std::invalid_argument("gradient lists differ in length");
  double worst = 0.0;
  for (std::size_t k = 0; k < analytic.size(); ++k) {
    if (analytic[k].shape() != numeric[k].shape()) throw ShapeError("gradient shapes differ");
    for (std::size_t i = 0; i < analytic[k].numel(); ++i) worst = std::max(worst, rel_err(analytic[k][i], numeric[k][i]));
  }
  return worst;
}

GradCheckResult finite_diff_check(const LossBuilder& build, const std::vector<Parameter*>& params, double step) {
  const auto analytic = analytic_gradients(build, params);
  const auto numeric = numeric_gradients(build, params, step);
  GradCheckResult result;
  for (std::size_t k = 0; k < params.size(); ++k) {
    for (std::size_t i = 0; i < analytic[k].numel(); ++i) {
      const double e = rel_err(analytic[k][i], numeric[k][i]);
      if (e > result.max_rel_error || result.worst.empty()) {
        result.max_rel_error = e;
        result.worst = params[k]->name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return result;
}

}  // namespace pga
