#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "pga/gradcheck.hpp"
#include "pga/ops.hpp"

using namespace pga;

namespace {

// x -> x^2 elementwise with a backward rule that is off by `error` (0 = exact).
Var square(Var x, double error) {
  Tape& t = *x.tape;
  Tensor out = t.value(x);
  for (double& v : out.data()) v = v * v;
  const std::size_t ix = x.id;
  return t.record("square", {ix}, std::move(out), [ix, error](Tape& tape, const Tensor& g) {
    Tensor d = tape.value(ix);
    for (std::size_t i = 0; i < d.numel(); ++i) d[i] = (2.0 + error) * d[i] * g[i];
    tape.accumulate(ix, d);
  });
}

}  // namespace

TEST(FiniteDiff, QuadraticIsExact) {
  std::mt19937_64 rng(1);
  Parameter p("p", Tensor::normal({6}, rng));
  auto r = finite_diff_check([&](Tape& t) { return scale(sum(square(t.parameter(p), 0.0)), 0.5); }, {&p});
  EXPECT_LT(r.max_rel_error, 1e-9);
  const auto analytic = analytic_gradients([&](Tape& t) { return scale(sum(square(t.parameter(p), 0.0)), 0.5); }, {&p});
  EXPECT_EQ(analytic[0], p.value);
}

TEST(FiniteDiff, ReluAwayFromKink) {
  Parameter p("p", Tensor::vector({-0.7, 0.4, 1.3, -2.0, 0.05}));
  auto r = finite_diff_check([&](Tape& t) { return sum(relu(t.parameter(p))); }, {&p});
  EXPECT_LT(r.max_rel_error, 1e-6);
}

TEST(FiniteDiff, CorruptedGradientIsDetected) {
  std::mt19937_64 rng(2);
  Parameter p("p", Tensor::normal({6}, rng));
  auto r = finite_diff_check([&](Tape& t) { return sum(square(t.parameter(p), 0.1)); }, {&p});
  EXPECT_GT(r.max_rel_error, 1e-2);
  EXPECT_EQ(r.worst.rfind("p[", 0), 0u);
}

TEST(FiniteDiff, NumericGradientsLeaveParametersUnchanged) {
  std::mt19937_64 rng(3);
  Parameter p("p", Tensor::normal({4}, rng));
  const Tensor before = p.value;
  numeric_gradients([&](Tape& t) { return sum(square(t.parameter(p), 0.0)); }, {&p}, 1e-5);
  EXPECT_EQ(p.value, before);
}

TEST(FiniteDiff, RelativeErrorMetric) {
  const std::vector<Tensor> a{Tensor::vector({1.0, 0.0, 2.0})};
  const std::vector<Tensor> n{Tensor::vector({1.0, 0.0, 1.0})};
  EXPECT_DOUBLE_EQ(max_relative_error(a, n), 1.0 / 3.0);
  EXPECT_EQ(max_relative_error(n, n), 0.0);
}

TEST(FiniteDiff, Errors) {
  Parameter p("p", Tensor::vector({1.0}));
  auto build = [&](Tape& t) { return sum(t.parameter(p)); };
  EXPECT_THROW(finite_diff_check(build, {&p}, 0.0), std::invalid_argument);
  Parameter q("q", Tensor::vector({std::numeric_limits<double>::infinity()}));
  EXPECT_THROW(finite_diff_check([&](Tape& t) { return sum(t.parameter(q)); }, {&q}), std::runtime_error);
}
