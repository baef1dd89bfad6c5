#include <gtest/gtest.h>

#include <random>

#include "pga/tensor.hpp"

using pga::Shape;
using pga::ShapeError;
using pga::Tensor;

TEST(Tensor, BufferLengthMatchesExtents) {
  Tensor t({2, 3, 4}, 1.5);
  EXPECT_EQ(t.numel(), 24u);
  EXPECT_EQ(t.rank(), 3u);
  for (double v : t.data()) EXPECT_EQ(v, 1.5);
}

TEST(Tensor, RejectsZeroExtentAndLengthMismatch) {
  EXPECT_THROW(Tensor({2, 0}), ShapeError);
  EXPECT_THROW(Tensor({2, 2}, std::vector<double>{1, 2, 3}), ShapeError);
}

TEST(Tensor, RowMajorIndexing) {
  Tensor t({2, 3, 4});
  for (std::size_t i = 0; i < t.numel(); ++i) t[i] = static_cast<double>(i);
  EXPECT_EQ(t.at(1, 2, 3), 23.0);
  EXPECT_EQ(t.at(0, 1, 0), 4.0);
  Tensor m = Tensor::matrix({{1, 2, 3}, {4, 5, 6}});
  EXPECT_EQ(m.at(1, 0), 4.0);
  EXPECT_EQ(m.dim(1), 3u);
}

TEST(Tensor, ReshapeKeepsOrderAndChecksCount) {
  Tensor m = Tensor::matrix({{1, 2, 3}, {4, 5, 6}});
  Tensor r = m.reshaped({3, 2});
  EXPECT_EQ(r.shape(), (Shape{3, 2}));
  EXPECT_EQ(r.at(1, 0), 3.0);
  EXPECT_THROW(m.reshaped({4, 2}), ShapeError);
}

TEST(Tensor, TransposeIsInvolution) {
  std::mt19937_64 rng(3);
  Tensor m = Tensor::normal({5, 7}, rng);
  Tensor t = m.transposed();
  EXPECT_EQ(t.shape(), (Shape{7, 5}));
  EXPECT_EQ(t.at(6, 4), m.at(4, 6));
  EXPECT_EQ(t.transposed(), m);
}

TEST(Tensor, ItemRequiresSingleElement) {
  EXPECT_EQ(Tensor::scalar(2.5).item(), 2.5);
  EXPECT_THROW(Tensor::vector({1, 2}).item(), ShapeError);
}

TEST(Tensor, SeededFactoriesAreDeterministic) {
  std::mt19937_64 a(11), b(11);
  EXPECT_EQ(Tensor::normal({4, 4}, a), Tensor::normal({4, 4}, b));
  Tensor u = Tensor::uniform({100}, a, -1.0, 2.0);
  for (double v : u.data()) {
    EXPECT_GE(v, -1.0);
    EXPECT_LT(v, 2.0);
  }
}

TEST(Tensor, MaxAbsDiff) {
  EXPECT_EQ(pga::max_abs_diff(Tensor::vector({1, 2, 3}), Tensor::vector({1, 2.5, 2})), 1.0);
  EXPECT_THROW(pga::max_abs_diff(Tensor::vector({1}), Tensor::vector({1, 2})), ShapeError);
}

TEST(Tensor, ShapeStr) { EXPECT_EQ(pga::shape_str({16, 8, 3}), "(16,8,3)"); }
