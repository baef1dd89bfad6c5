#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "pga/gradcheck.hpp"
#include "pga/pga.hpp"
#include "pga/verify.hpp"

using namespace pga;

namespace {

PGAConfig pixel_config(std::size_t c, std::size_t h, std::size_t w) {
  PGAConfig cfg;
  cfg.channels = c;
  cfg.height = h;
  cfg.width = w;
  return cfg;
}

// Evaluation mode with seeded statistics: every op becomes pixel-wise, so
// relabeling pixels commutes with the layer.
void freeze(std::vector<BatchNormState*> bns, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> mean(-0.3, 0.3), var(0.5, 2.0);
  for (BatchNormState* bn : bns) {
    std::vector<double> m(bn->channels()), v(bn->channels());
    for (std::size_t i = 0; i < m.size(); ++i) {
      m[i] = mean(rng);
      v[i] = var(rng);
    }
    bn->seed_running_stats(m, v);
    bn->mode = BNMode::Evaluation;
  }
}

std::shared_ptr<const Adjacency> share(Adjacency a) { return std::make_shared<const Adjacency>(std::move(a)); }

}  // namespace

TEST(Correlation, OrthonormalRowsGiveIdentity) {
  Tape t;
  auto e = t.constant(Tensor::matrix({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}));
  EXPECT_EQ(t.value(correlation(e, e)), Tensor::matrix({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}));
}

TEST(Correlation, OuterProduct) {
  Tape t;
  auto v = t.constant(Tensor::matrix({{1}, {2}}));
  EXPECT_EQ(t.value(correlation(v, v)), Tensor::matrix({{1, 2}, {2, 4}}));
}

TEST(Correlation, EntriesAreRowDots) {
  std::mt19937_64 rng(1);
  const Tensor th = Tensor::normal({6, 3}, rng), ph = Tensor::normal({6, 3}, rng);
  Tape t;
  const Tensor& r = t.value(correlation(t.constant(th), t.constant(ph)));
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      double d = 0.0;
      for (std::size_t k = 0; k < 3; ++k) d += th.at(i, k) * ph.at(j, k);
      EXPECT_NEAR(r.at(i, j), d, 1e-12);
    }
  }
}

TEST(MaskedAttention, ZeroScoresOnTwoByTwo) {
  Tape t;
  const Adjacency g = generate_grid_graph({2, 2, 1}, NeighborMode::Four);
  const Tensor& a = t.value(masked_attention(g, t.constant(Tensor({4, 4}))));
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(a.at(i, j), g.has_edge(i, j) ? 0.5 : 0.0);
  }
}

TEST(MaskedAttention, LiteralReadingLeaksOffSupport) {
  std::mt19937_64 rng(2);
  const Adjacency g = generate_grid_graph({3, 3, 1}, NeighborMode::Four);
  Tape t;
  auto r = t.constant(Tensor::normal({9, 9}, rng));
  const Tensor& masked = t.value(masked_attention(g, r, SoftmaxMode::Masked));
  const Tensor& literal = t.value(masked_attention(g, r, SoftmaxMode::Literal));
  std::size_t leaked = 0;
  for (std::size_t i = 0; i < 9; ++i) {
    for (std::size_t j = 0; j < 9; ++j) {
      if (g.has_edge(i, j)) continue;
      EXPECT_EQ(masked.at(i, j), 0.0);
      leaked += literal.at(i, j) > 0.0 ? 1 : 0;
    }
  }
  EXPECT_EQ(leaked, 81u - g.num_edges());
  EXPECT_GT(max_abs_diff(masked, literal), 0.01);
}

TEST(Propagate, PermutationAndClip) {
  Tape t;
  auto swap = t.constant(Tensor::matrix({{0, 1}, {1, 0}}));
  EXPECT_EQ(t.value(propagate(swap, t.constant(Tensor::matrix({{1, 2}, {3, 4}})))), Tensor::matrix({{3, 4}, {1, 2}}));
  EXPECT_EQ(t.value(propagate(swap, t.constant(Tensor::matrix({{-1}, {2}})))), Tensor::matrix({{2}, {0}}));
}

TEST(Propagate, ConvexCombinationOfNeighborRows) {
  std::mt19937_64 rng(3);
  const Adjacency g = generate_grid_graph({3, 4, 1}, NeighborMode::Eight);
  for (int trial = 0; trial < 5; ++trial) {
    Tape t;
    auto a = masked_attention(g, t.constant(Tensor::normal({12, 12}, rng)));
    const Tensor v = Tensor::uniform({12, 3}, rng, 0.0, 2.0);
    const Tensor& out = t.value(propagate(a, t.constant(v)));
    for (std::size_t i = 0; i < 12; ++i) {
      for (std::size_t c = 0; c < 3; ++c) {
        double expect = 0.0, lo = 1e300, hi = -1e300;
        for (NodeId j : g.neighbors(i)) {
          expect += t.value(a).at(i, j) * v.at(j, c);
          lo = std::min(lo, v.at(j, c));
          hi = std::max(hi, v.at(j, c));
        }
        EXPECT_NEAR(out.at(i, c), expect, 1e-12);
        EXPECT_GE(out.at(i, c), lo - 1e-12);
        EXPECT_LE(out.at(i, c), hi + 1e-12);
      }
    }
  }
}

TEST(PGALayer, ShapePreservedAndMismatchRejected) {
  std::mt19937_64 rng(4);
  const PGAConfig cfg = pixel_config(4, 3, 2);
  PGALayer layer("l", cfg, make_layer_graph(cfg, NeighborMode::Four), rng);
  EXPECT_EQ(layer.config().resolved_reduced_dim(), 2u);
  Tape t;
  auto out = layer.pga_forward(t, t.constant(Tensor::normal({4, 3, 2}, rng)));
  EXPECT_EQ(t.value(out).shape(), (Shape{4, 3, 2}));
  EXPECT_THROW(layer.pga_forward(t, t.constant(Tensor({4, 2, 3}))), ShapeError);
  EXPECT_THROW(layer.set_adjacency(share(generate_grid_graph({2, 2, 1}, NeighborMode::Four))), std::invalid_argument);
}

TEST(PGALayer, IsolatedNodesPropagateZero) {
  std::mt19937_64 rng(5);
  const PGAConfig cfg = pixel_config(3, 2, 3);
  PGALayer layer("l", cfg, share(adjacency_from_pairs({}, 6)), rng);
  const Tensor f = Tensor::normal({3, 2, 3}, rng);
  Tape t;
  for (double v : t.value(layer.pga_forward(t, t.constant(f))).data()) EXPECT_EQ(v, 0.0);
  const Tensor& mixed = t.value(layer.residual_forward(t, t.constant(f)));
  for (std::size_t i = 0; i < f.numel(); ++i) EXPECT_DOUBLE_EQ(mixed[i], layer.alpha() * f[i]);
}

TEST(PGALayer, ResidualMixAtInitAndLimit) {
  std::mt19937_64 rng(6);
  const PGAConfig cfg = pixel_config(3, 3, 3);
  PGALayer layer("l", cfg, make_layer_graph(cfg, NeighborMode::Eight), rng);
  EXPECT_EQ(layer.alpha(), 0.5);
  const Tensor f = Tensor::normal({3, 3, 3}, rng);
  freeze(layer.batchnorms(), rng);
  Tape t;
  const Tensor& p = t.value(layer.pga_forward(t, t.constant(f)));
  const Tensor& mid = t.value(layer.residual_forward(t, t.constant(f)));
  for (std::size_t i = 0; i < f.numel(); ++i) EXPECT_DOUBLE_EQ(mid[i], 0.5 * f[i] + 0.5 * p[i]);
  layer.alpha_raw.value[0] = 60.0;
  const Tensor& hi = t.value(layer.residual_forward(t, t.constant(f)));
  EXPECT_LT(max_abs_diff(hi, f), 1e-20 + 1e-15 * 10);
}

TEST(PGALayer, PermutationEquivariance) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(seed);
    const std::size_t h = 3, w = 4, n = h * w, c = 3;
    const PGAConfig cfg = pixel_config(c, h, w);
    const Adjacency g = generate_grid_graph({h, w, 1}, NeighborMode::Four);
    PGALayer layer("l", cfg, share(g), rng);
    freeze(layer.batchnorms(), rng);
    const Tensor f = Tensor::normal({c, h, w}, rng);

    std::vector<NodeId> pi(n);
    std::iota(pi.begin(), pi.end(), NodeId{0});
    std::shuffle(pi.begin(), pi.end(), rng);
    EdgeList relabeled;
    for (std::size_t i = 0; i < n; ++i) {
      for (NodeId j : g.neighbors(i)) relabeled.push(pi[i], pi[j]);
    }
    Tensor fp({c, h, w});
    for (std::size_t ch = 0; ch < c; ++ch) {
      for (std::size_t i = 0; i < n; ++i) fp[ch * n + pi[i]] = f[ch * n + i];
    }

    Tape t;
    const Tensor out = t.value(layer.residual_forward(t, t.constant(f)));
    layer.set_adjacency(share(adjacency_from_pairs(relabeled, n)));
    const Tensor outp = t.value(layer.residual_forward(t, t.constant(fp)));
    for (std::size_t ch = 0; ch < c; ++ch) {
      for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(outp[ch * n + pi[i]], out[ch * n + i], 1e-10);
    }
  }
}

TEST(PGALayer, AttentionIsSparseAndRowStochastic) {
  std::mt19937_64 rng(7);
  const PGAConfig cfg = pixel_config(4, 4, 3);
  PGALayer layer("l", cfg, make_layer_graph(cfg, NeighborMode::Eight), rng);
  Tape t;
  const Tensor& a = t.value(layer.attention(t, t.constant(Tensor::normal({4, 4, 3}, rng))));
  for (std::size_t i = 0; i < 12; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < 12; ++j) {
      if (!layer.adjacency().has_edge(i, j)) {
        EXPECT_EQ(a.at(i, j), 0.0);
      }
      s += a.at(i, j);
    }
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
}

TEST(PGALayer, ChannelNodes) {
  std::mt19937_64 rng(8);
  PGAConfig cfg = pixel_config(6, 2, 3);
  cfg.axis = NodeAxis::Channels;
  EXPECT_EQ(cfg.node_count(), 6u);
  EXPECT_EQ(cfg.feature_dim(), 6u);
  auto graph = make_layer_graph(cfg, NeighborMode::TwoChannel);
  EXPECT_EQ(graph->num_edges(), 10u);
  EXPECT_THROW(make_layer_graph(cfg, NeighborMode::Four), std::invalid_argument);
  PGALayer layer("l", cfg, graph, rng);
  Tape t;
  const Tensor f = Tensor::normal({6, 2, 3}, rng);
  EXPECT_EQ(t.value(layer.residual_forward(t, t.constant(f))).shape(), (Shape{6, 2, 3}));
  const Tensor& a = t.value(layer.attention(t, t.constant(f)));
  EXPECT_EQ(a.shape(), (Shape{6, 6}));
  EXPECT_EQ(a.at(0, 2), 0.0);
  EXPECT_DOUBLE_EQ(a.at(0, 1), 1.0);
}

TEST(PGALayer, ValueProjectionStartsAsIdentity) {
  std::mt19937_64 a_rng(9), b_rng(9);
  PGAConfig plain = pixel_config(3, 2, 2), projected = plain;
  projected.value_projection = true;
  auto g = make_layer_graph(plain, NeighborMode::Four);
  PGALayer a("l", plain, g, a_rng), b("l", projected, g, b_rng);
  std::mt19937_64 rng(10);
  const Tensor f = Tensor::normal({3, 2, 2}, rng);
  Tape t;
  EXPECT_EQ(t.value(a.pga_forward(t, t.constant(f))), t.value(b.pga_forward(t, t.constant(f))));
  EXPECT_EQ(b.parameters().size(), a.parameters().size() + 2);
}

TEST(PGALayer, BatchedMatchesPerSampleInEvaluation) {
  std::mt19937_64 rng(11);
  const PGAConfig cfg = pixel_config(3, 3, 2);
  PGALayer layer("l", cfg, make_layer_graph(cfg, NeighborMode::Four), rng);
  freeze(layer.batchnorms(), rng);
  const Tensor f0 = Tensor::normal({3, 3, 2}, rng), f1 = Tensor::normal({3, 3, 2}, rng);
  Tape t;
  const Var maps[] = {t.constant(f0), t.constant(f1)};
  std::vector<Var> attn;
  const auto batched = layer.residual_forward(t, maps, &attn);
  ASSERT_EQ(attn.size(), 2u);
  EXPECT_LT(max_abs_diff(t.value(batched[0]), t.value(layer.residual_forward(t, t.constant(f0)))), 1e-14);
  EXPECT_LT(max_abs_diff(t.value(batched[1]), t.value(layer.residual_forward(t, t.constant(f1)))), 1e-14);
}

TEST(PGALayer, FullLayerGradcheck) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(seed);
    const PGAConfig cfg = pixel_config(2, 2, 2);
    PGALayer layer("l", cfg, make_layer_graph(cfg, NeighborMode::Four), rng);
    freeze(layer.batchnorms(), rng);
    layer.alpha_raw.value[0] = 0.4;
    Parameter f("f", Tensor::normal({2, 2, 2}, rng));
    const Tensor wts = Tensor::uniform({2, 2, 2}, rng, 0.5, 1.5);
    std::vector<Parameter*> params{&f, &layer.theta.weight, &layer.theta.bias, &layer.phi.weight,
                                   &layer.phi.bias, &layer.alpha_raw};
    auto r = finite_diff_check(
        [&](Tape& t) { return weighted_sum(layer.residual_forward(t, t.parameter(f)), wts); }, params);
    EXPECT_LT(r.max_rel_error, 1e-4) << r.worst;
  }
}

TEST(PGAStack, DepthZeroIsIdentity) {
  std::mt19937_64 rng(12);
  const PGAConfig cfg = pixel_config(3, 2, 2);
  PGAStack stack("s", cfg, make_layer_graph(cfg, NeighborMode::Four), 0, rng);
  const Tensor f = Tensor::normal({3, 2, 2}, rng);
  Tape t;
  EXPECT_EQ(t.value(stack.forward(t, t.constant(f))), f);
  EXPECT_TRUE(stack.parameters().empty());
}

TEST(PGAStack, DepthTwoIsComposition) {
  std::mt19937_64 rng(13);
  const PGAConfig cfg = pixel_config(3, 3, 2);
  PGAStack stack("s", cfg, make_layer_graph(cfg, NeighborMode::Eight), 2, rng);
  freeze(stack.batchnorms(), rng);
  stack.layers()[1].alpha_raw.value[0] = -0.7;
  const Tensor f = Tensor::normal({3, 3, 2}, rng);
  Tape t;
  std::vector<Var> attn;
  auto out = stack.forward(t, t.constant(f), &attn);
  auto manual = stack.layers()[1].residual_forward(t, stack.layers()[0].residual_forward(t, t.constant(f)));
  EXPECT_EQ(t.value(out), t.value(manual));
  EXPECT_EQ(attn.size(), 2u);
}

TEST(PGAStack, LayersOwnIndependentParameters) {
  std::mt19937_64 rng(14);
  const PGAConfig cfg = pixel_config(3, 2, 2);
  PGAStack stack("s", cfg, make_layer_graph(cfg, NeighborMode::Four), 3, rng);
  auto params = stack.parameters();
  std::vector<std::string> names;
  for (auto* p : params) names.push_back(p->name);
  std::sort(names.begin(), names.end());
  EXPECT_EQ(std::adjacent_find(names.begin(), names.end()), names.end());
  EXPECT_NE(stack.layers()[0].theta.weight.value, stack.layers()[1].theta.weight.value);
}

TEST(PGAStack, DepthThreeGradientReachesFirstLayer) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(seed);
    const PGAConfig cfg = pixel_config(2, 3, 2);
    PGAStack stack("s", cfg, make_layer_graph(cfg, NeighborMode::Four), 3, rng);
    freeze(stack.batchnorms(), rng);
    Parameter f("f", Tensor::normal({2, 3, 2}, rng));
    const Tensor wts = Tensor::uniform({2, 3, 2}, rng, 0.5, 1.5);
    auto& first = stack.layers()[0];
    std::vector<Parameter*> params{&f, &first.theta.weight, &first.phi.weight, &first.alpha_raw,
                                   &stack.layers()[2].alpha_raw};
    auto build = [&](Tape& t) { return weighted_sum(stack.forward(t, t.parameter(f)), wts); };
    auto r = finite_diff_check(build, params);
    EXPECT_LT(r.max_rel_error, 1e-4) << r.worst;
    double mass = 0.0;
    for (double g : analytic_gradients(build, params)[1].data()) mass += std::abs(g);
    EXPECT_GT(mass, 0.0);
  }
}

TEST(Locality, InfluenceRadiusEqualsDepth) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const CheckResult r = verify_locality(seed, 3);
    EXPECT_TRUE(r.passed) << r.detail;
  }
}

TEST(Locality, ResidualPathStillLocal) {
  std::mt19937_64 rng(15);
  const PGAConfig cfg = pixel_config(3, 4, 4);
  PGALayer layer("l", cfg, make_layer_graph(cfg, NeighborMode::Four), rng);
  freeze(layer.batchnorms(), rng);
  const Tensor f = Tensor::uniform({3, 4, 4}, rng, 0.5, 1.5);
  Tensor g = f;
  g[5] += 1.0;  // pixel (1,1), channel 0
  Tape t;
  const Tensor& a = t.value(layer.residual_forward(t, t.constant(f)));
  const Tensor& b = t.value(layer.residual_forward(t, t.constant(g)));
  for (std::size_t q = 0; q < 16; ++q) {
    const long dist = std::abs(static_cast<long>(q / 4) - 1) + std::abs(static_cast<long>(q % 4) - 1);
    bool changed = false;
    for (std::size_t c = 0; c < 3; ++c) changed = changed || a[c * 16 + q] != b[c * 16 + q];
    EXPECT_EQ(changed, dist <= 1) << "node " << q;
  }
}
