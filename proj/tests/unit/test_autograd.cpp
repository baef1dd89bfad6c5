#include <gtest/gtest.h>

#include <random>

#include "pga/autograd.hpp"
#include "pga/ops.hpp"

using namespace pga;

TEST(Tape, SumGradientIsAllOnes) {
  Parameter x("x", Tensor::matrix({{1, -2}, {3, 4}}));
  Tape tape;
  tape.backward(sum(tape.parameter(x)));
  EXPECT_TRUE(x.has_grad);
  EXPECT_EQ(x.grad, Tensor({2, 2}, 1.0));
}

TEST(Tape, ProductOfScalars) {
  Parameter x("x", Tensor::scalar(3.0)), y("y", Tensor::scalar(-5.0));
  Tape tape;
  auto prod = matmul(reshape(tape.parameter(x), {1, 1}), reshape(tape.parameter(y), {1, 1}));
  tape.backward(prod);
  EXPECT_EQ(x.grad.item(), -5.0);
  EXPECT_EQ(y.grad.item(), 3.0);
}

TEST(Tape, RepeatedBackwardAccumulates) {
  Parameter x("x", Tensor::vector({1, 2, 3}));
  Tape tape;
  auto loss = weighted_sum(tape.parameter(x), Tensor::vector({2, 3, 4}));
  tape.backward(loss);
  tape.backward(loss);
  EXPECT_EQ(x.grad, Tensor::vector({4, 6, 8}));
  x.zero_grad();
  EXPECT_EQ(x.grad, Tensor({3}, 0.0));
  EXPECT_FALSE(x.has_grad);
}

TEST(Tape, SharedInputAccumulatesBothPaths) {
  Parameter x("x", Tensor::vector({1.5, -0.5}));
  Tape tape;
  auto v = tape.parameter(x);
  tape.backward(sum(add(v, scale(v, 3.0))));
  EXPECT_EQ(x.grad, Tensor::vector({4, 4}));
}

TEST(Tape, NonScalarLossThrows) {
  Parameter x("x", Tensor::vector({1, 2}));
  Tape tape;
  EXPECT_THROW(tape.backward(tape.parameter(x)), ShapeError);
}

TEST(Tape, LossFromAnotherTapeThrows) {
  Tape a, b;
  auto loss = sum(a.constant(Tensor::vector({1, 2})));
  EXPECT_THROW(b.backward(loss), std::invalid_argument);
}

TEST(Tape, ConstantsGetNoGradientButIntermediatesDo) {
  Parameter x("x", Tensor::vector({1, 2}));
  Tape tape;
  auto c = tape.constant(Tensor::vector({5, 7}));
  auto s = add(tape.parameter(x), c);
  tape.backward(sum(scale(s, 2.0)));
  EXPECT_FALSE(tape.requires_grad(c.id));
  EXPECT_EQ(tape.grad(s), Tensor::vector({2, 2}));
  EXPECT_EQ(tape.grad(c), Tensor({2}, 0.0));
}

TEST(Tape, NodesAreTopologicallyOrdered) {
  Tape tape;
  auto a = tape.constant(Tensor::vector({1}));
  auto b = scale(a, 2.0);
  auto c = add(a, b);
  EXPECT_LT(a.id, b.id);
  EXPECT_LT(b.id, c.id);
  EXPECT_EQ(tape.op(c.id), "add");
  EXPECT_EQ(tape.size(), 3u);
}

TEST(Tape, BackwardIsLinearInTheLoss) {
  std::mt19937_64 rng(9);
  Parameter w("w", Tensor::normal({3, 4}, rng));
  const Tensor x = Tensor::normal({4, 2}, rng);
  auto grad_for = [&](double factor) {
    w.zero_grad();
    Tape tape;
    auto y = relu(matmul(tape.parameter(w), tape.constant(x)));
    tape.backward(scale(sum(y), factor));
    return w.grad;
  };
  const Tensor g1 = grad_for(1.0);
  const Tensor g3 = grad_for(-2.75);
  for (std::size_t i = 0; i < g1.numel(); ++i) EXPECT_NEAR(g3[i], -2.75 * g1[i], 1e-12);
}

TEST(Parameter, ZeroGradsResetsAll) {
  Parameter a("a", Tensor::vector({1})), b("b", Tensor::vector({2, 3}));
  Tape tape;
  tape.backward(add(sum(tape.parameter(a)), sum(tape.parameter(b))));
  zero_grads({&a, &b});
  EXPECT_EQ(a.grad[0], 0.0);
  EXPECT_EQ(b.grad[1], 0.0);
}
