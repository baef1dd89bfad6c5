#include "pga/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <ostream>
#include <random>
#include <sstream>

#include "pga/gradcheck.hpp"
#include "pga/losses.hpp"
#include "pga/ops.hpp"
#include "pga/pga.hpp"

namespace pga {

std::string grid_label(std::size_t h, std::size_t w, NeighborMode mode) {
  return std::to_string(h) + "x" + std::to_string(w) + ":" + std::string(to_string(mode));
}

namespace {

std::size_t expected_entries(std::size_t h, std::size_t w, std::size_t c, NeighborMode mode) {
  switch (mode) {
    case NeighborMode::Four: return 2 * (h * (w - 1) + w * (h - 1));
    case NeighborMode::Eight: return 2 * (h * (w - 1) + w * (h - 1)) + 4 * (h - 1) * (w - 1);
    case NeighborMode::TwoChannel: return 2 * (c - 1);
  }
  return 0;
}

CheckResult check_grid(std::size_t h, std::size_t w, NeighborMode mode, const GraphSweepOptions& options) {
  const GridSpec spec{h, w, h * w};
  CheckResult r;
  r.name = "graph " + grid_label(h, w, mode);
  Adjacency fast = generate_grid_graph(spec, mode);
  if (options.corrupt && *options.corrupt == grid_label(h, w, mode) && fast.num_edges() > 0) {
    EdgeList e = fast.edges();
    e.node.pop_back();
    e.neighbor.pop_back();
    // rebuild without symmetrizing so exactly one directed entry is missing
    std::vector<std::size_t> offsets(fast.n() + 1, 0);
    for (NodeId a : e.node) ++offsets[a + 1];
    for (std::size_t i = 0; i < fast.n(); ++i) offsets[i + 1] += offsets[i];
    fast = Adjacency::from_csr(fast.n(), std::move(offsets), std::move(e.neighbor));
  }
  const Adjacency oracle = oracle_adjacency(spec, mode);
  const std::size_t expected = expected_entries(h, w, spec.c, mode);
  std::ostringstream detail;
  if (!(fast == oracle)) {
    detail << "generator differs from oracle (" << fast.num_edges() << " vs " << oracle.num_edges() << " entries)";
  } else if (!fast.is_symmetric() || !fast.has_zero_diagonal()) {
    detail << "graph is not symmetric with an empty diagonal";
  } else if (fast.num_edges() != expected) {
    detail << fast.num_edges() << " entries, closed form gives " << expected;
  } else {
    r.passed = true;
    detail << fast.n() << " nodes, " << fast.num_edges() << " entries";
  }
  r.detail = detail.str();
  return r;
}

}  // namespace

std::vector<CheckResult> verify_graph_generation(const GraphSweepOptions& options) {
  std::vector<std::pair<std::size_t, std::size_t>> sizes;
  for (std::size_t h = 1; h <= options.max_side; ++h) {
    for (std::size_t w = 1; w <= options.max_side; ++w) sizes.emplace_back(h, w);
  }
  sizes.insert(sizes.end(), options.spot_sizes.begin(), options.spot_sizes.end());
  std::vector<CheckResult> out;
  for (NeighborMode mode : {NeighborMode::Four, NeighborMode::Eight, NeighborMode::TwoChannel}) {
    for (const auto& [h, w] : sizes) out.push_back(check_grid(h, w, mode, options));
  }
  return out;
}

CheckResult verify_attention_invariants(std::uint64_t seed, std::size_t instances, double tolerance) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> side(1, 6);
  std::uniform_int_distribution<int> kind(0, 3);
  std::uniform_real_distribution<double> scale(0.1, 20.0);
  double worst_sum = 0.0;
  std::size_t empty_rows = 0;
  for (std::size_t inst = 0; inst < instances; ++inst) {
    const std::size_t h = side(rng), w = side(rng);
    Adjacency adj;
    switch (kind(rng)) {
      case 0: adj = generate_grid_graph({h, w, 1}, NeighborMode::Four); break;
      case 1: adj = generate_grid_graph({h, w, 1}, NeighborMode::Eight); break;
      case 2: adj = generate_grid_graph({1, 1, h * w}, NeighborMode::TwoChannel); break;
      default: {
        // sparse random pairs leave some nodes isolated
        const std::size_t n = h * w;
        std::uniform_int_distribution<NodeId> node(0, static_cast<NodeId>(n - 1));
        EdgeList e;
        for (std::size_t k = 0; k < n / 2; ++k) {
          const NodeId a = node(rng), b = node(rng);
          if (a != b) e.push(a, b);
        }
        adj = adjacency_from_pairs(e, n);
      }
    }
    const std::size_t n = adj.n();
    Tape tape;
    Var scores = tape.constant(Tensor::normal({n, n}, rng, scale(rng)));
    const Tensor& a = masked_row_softmax(scores, adj, SoftmaxMode::Masked).value();
    const auto dense = adj.dense();
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double v = a.at(i, j);
        if (!dense[i * n + j] && v != 0.0) {
          return {"attention invariants", false,
                  "instance " + std::to_string(inst) + ": off-support entry (" + std::to_string(i) + "," +
                      std::to_string(j) + ") is nonzero"};
        }
        if (!(v >= 0.0)) {
          return {"attention invariants", false, "instance " + std::to_string(inst) + ": negative or NaN weight"};
        }
        s += v;
      }
      if (adj.degree(i) == 0) {
        ++empty_rows;
        if (s != 0.0) {
          return {"attention invariants", false,
                  "instance " + std::to_string(inst) + ": empty row " + std::to_string(i) + " is not all zero"};
        }
      } else {
        worst_sum = std::max(worst_sum, std::abs(s - 1.0));
      }
    }
  }
  std::ostringstream detail;
  detail << instances << " instances, worst |row sum - 1| = " << worst_sum << ", " << empty_rows << " empty rows";
  return {"attention invariants", worst_sum <= tolerance, detail.str()};
}

namespace {

using Rng = std::mt19937_64;

Tensor away_from_zero(Shape shape, Rng& rng, double gap = 0.1) {
  Tensor t = Tensor::normal(std::move(shape), rng);
  std::uniform_real_distribution<double> pick(gap, 1.5);
  std::bernoulli_distribution sign(0.5);
  for (auto& v : t.data()) {
    if (std::abs(v) < gap) v = sign(rng) ? pick(rng) : -pick(rng);
  }
  return t;
}

// Random positive weights keep every output coordinate in play with an O(1) gradient.
Tensor fixed_weights(const Shape& shape, Rng& rng) { return Tensor::uniform(shape, rng, 0.5, 1.5); }

struct GradCase {
  std::string name;
  std::function<GradCheckResult(Rng&)> run;
};

GradCheckResult check(std::vector<Parameter*> params, const std::function<Var(Tape&)>& build) {
  return finite_diff_check(build, params);
}

// Loss weights must stay fixed across probes, so they are drawn before the builder.
GradCheckResult unary(Rng& rng, Tensor input, const std::function<Var(Var)>& op) {
  Parameter x("x", std::move(input));
  Tape shape_tape;
  const Shape out_shape = op(shape_tape.parameter(x)).shape();
  const Tensor wts = fixed_weights(out_shape, rng);
  return check({&x}, [&](Tape& t) { return weighted_sum(op(t.parameter(x)), wts); });
}

std::shared_ptr<const Adjacency> isolated_node_graph() {
  // 3x2 Four grid plus one isolated node
  const Adjacency base = generate_grid_graph({3, 2, 1}, NeighborMode::Four);
  return std::make_shared<const Adjacency>(adjacency_from_pairs(base.edges(), base.n() + 1));
}

PGAConfig small_config(std::size_t c, std::size_t h, std::size_t w) {
  PGAConfig cfg;
  cfg.channels = c;
  cfg.height = h;
  cfg.width = w;
  return cfg;
}

void seed_stats(BatchNormState& bn, Rng& rng) {
  std::uniform_real_distribution<double> mean(-0.5, 0.5), var(0.5, 2.0);
  std::vector<double> m(bn.channels()), v(bn.channels());
  for (auto& x : m) x = mean(rng);
  for (auto& x : v) x = var(rng);
  bn.seed_running_stats(m, v);
}

void randomize_affine(BatchNormState& bn, Rng& rng) {
  bn.gamma.value = Tensor::uniform(bn.gamma.value.shape(), rng, 0.5, 1.5);
  bn.beta.value = Tensor::normal(bn.beta.value.shape(), rng, 0.3);
}

GradCheckResult layer_case(Rng& rng, PGAConfig cfg, std::shared_ptr<const Adjacency> adj, BNMode mode, bool residual) {
  PGALayer layer("layer", cfg, adj, rng);
  for (BatchNormState* bn : layer.batchnorms()) {
    randomize_affine(*bn, rng);
    if (mode == BNMode::Evaluation) seed_stats(*bn, rng);
  }
  layer.set_mode(mode);
  layer.alpha_raw.value[0] = 0.3;
  Parameter f("input", Tensor::normal({cfg.channels, cfg.height, cfg.width}, rng));
  std::vector<Parameter*> params{&f};
  for (Parameter* p : layer.parameters()) {
    // a bias feeding a training-mode batchnorm cancels exactly; its gradient is identically zero
    const bool cancels = mode == BNMode::Training && p->name.ends_with(".bias") && !p->name.starts_with("layer.value");
    if (!cancels && p != &layer.phi.bn.beta && (residual || p != &layer.alpha_raw)) params.push_back(p);
  }
  const Tensor wts = fixed_weights(f.value.shape(), rng);
  const auto build = [&](Tape& t) {
    Var x = t.parameter(f);
    return weighted_sum(residual ? layer.residual_forward(t, x) : layer.pga_forward(t, x), wts);
  };
  GradCheckResult r = check(params, build);

  // Shifting every phi row by one vector adds a per-row constant to R, which the
  // row softmax ignores. That gradient is exactly zero unless the relu clips,
  // so a relative error would only measure rounding; compare absolutely instead.
  const std::vector<Parameter*> shift{&layer.phi.bn.beta};
  const auto a = analytic_gradients(build, shift);
  const auto n = numeric_gradients(build, shift, 1e-5);
  for (std::size_t i = 0; i < a[0].numel(); ++i) {
    if (std::abs(a[0][i] - n[0][i]) > 1e-8) {
      r.max_rel_error = std::max(r.max_rel_error, 1.0);
      r.worst = "layer.phi.bn.beta[" + std::to_string(i) + "] (absolute)";
    }
  }
  return r;
}

std::vector<GradCase> gradient_cases() {
  std::vector<GradCase> cases;
  auto add_case = [&](std::string name, std::function<GradCheckResult(Rng&)> run) {
    cases.push_back({std::move(name), std::move(run)});
  };

  add_case("matmul", [](Rng& rng) {
    Parameter a("a", Tensor::normal({4, 3}, rng)), b("b", Tensor::normal({3, 2}, rng));
    const Tensor wts = fixed_weights({4, 2}, rng);
    return check({&a, &b}, [&](Tape& t) { return weighted_sum(matmul(t.parameter(a), t.parameter(b)), wts); });
  });
  add_case("transpose", [](Rng& rng) { return unary(rng, Tensor::normal({3, 4}, rng), [](Var x) { return transpose(x); }); });
  add_case("reshape", [](Rng& rng) { return unary(rng, Tensor::normal({2, 6}, rng), [](Var x) { return reshape(x, {3, 4}); }); });
  add_case("add", [](Rng& rng) {
    Parameter a("a", Tensor::normal({3, 4}, rng)), b("b", Tensor::normal({3, 4}, rng));
    const Tensor wts = fixed_weights({3, 4}, rng);
    return check({&a, &b}, [&](Tape& t) { return weighted_sum(add(t.parameter(a), t.parameter(b)), wts); });
  });
  add_case("scale", [](Rng& rng) { return unary(rng, Tensor::normal({5}, rng), [](Var x) { return scale(x, -1.7); }); });
  add_case("sum", [](Rng& rng) {
    Parameter a("a", Tensor::normal({2, 3}, rng));
    return check({&a}, [&](Tape& t) { return sum(scale(t.parameter(a), 0.5)); });
  });
  add_case("weighted_sum", [](Rng& rng) { return unary(rng, Tensor::normal({3, 3}, rng), [](Var x) { return x; }); });
  add_case("relu", [](Rng& rng) { return unary(rng, away_from_zero({4, 5}, rng), [](Var x) { return relu(x); }); });
  add_case("masked_row_softmax", [](Rng& rng) {
    auto adj = isolated_node_graph();
    return unary(rng, Tensor::normal({adj->n(), adj->n()}, rng),
                 [adj](Var x) { return masked_row_softmax(x, *adj, SoftmaxMode::Masked); });
  });
  add_case("masked_row_softmax literal", [](Rng& rng) {
    auto adj = isolated_node_graph();
    return unary(rng, Tensor::normal({adj->n(), adj->n()}, rng),
                 [adj](Var x) { return masked_row_softmax(x, *adj, SoftmaxMode::Literal); });
  });
  add_case("to_nodes", [](Rng& rng) { return unary(rng, Tensor::normal({3, 2, 2}, rng), [](Var x) { return to_nodes(x); }); });
  add_case("to_feature_map",
           [](Rng& rng) { return unary(rng, Tensor::normal({6, 3}, rng), [](Var x) { return to_feature_map(x, 2, 3); }); });
  add_case("linear", [](Rng& rng) {
    Parameter x("x", Tensor::normal({4, 5}, rng)), w("w", Tensor::normal({3, 5}, rng)), b("b", Tensor::normal({3}, rng));
    const Tensor wts = fixed_weights({4, 3}, rng);
    return check({&x, &w, &b},
                 [&](Tape& t) { return weighted_sum(linear(t.parameter(x), t.parameter(w), t.parameter(b)), wts); });
  });
  add_case("conv1x1", [](Rng& rng) {
    Parameter f("f", Tensor::normal({3, 2, 2}, rng)), w("w", Tensor::normal({2, 3}, rng)), b("b", Tensor::normal({2}, rng));
    const Tensor wts = fixed_weights({2, 2, 2}, rng);
    return check({&f, &w, &b},
                 [&](Tape& t) { return weighted_sum(conv1x1(t.parameter(f), t.parameter(w), t.parameter(b)), wts); });
  });
  auto bn_case = [](Shape shape, std::size_t channels, BNMode mode) {
    return [shape, channels, mode](Rng& rng) {
      BatchNormState bn("bn", channels);
      randomize_affine(bn, rng);
      if (mode == BNMode::Evaluation) seed_stats(bn, rng);
      bn.mode = mode;
      Parameter x("x", Tensor::normal(shape, rng, 2.0));
      const Tensor wts = fixed_weights(shape, rng);
      return check({&x, &bn.gamma, &bn.beta}, [&](Tape& t) { return weighted_sum(batchnorm(t.parameter(x), bn), wts); });
    };
  };
  add_case("batchnorm map training", bn_case({2, 2, 3}, 2, BNMode::Training));
  add_case("batchnorm rows training", bn_case({5, 3}, 3, BNMode::Training));
  add_case("batchnorm map evaluation", bn_case({2, 2, 3}, 2, BNMode::Evaluation));
  add_case("scalar_mix", [](Rng& rng) {
    Parameter a("a", Tensor::scalar(0.4)), x("x", Tensor::normal({2, 3}, rng)), y("y", Tensor::normal({2, 3}, rng));
    const Tensor wts = fixed_weights({2, 3}, rng);
    return check({&a, &x, &y},
                 [&](Tape& t) { return weighted_sum(scalar_mix(t.parameter(a), t.parameter(x), t.parameter(y)), wts); });
  });
  add_case("global_avg_pool",
           [](Rng& rng) { return unary(rng, Tensor::normal({3, 2, 2}, rng), [](Var x) { return global_avg_pool(x); }); });
  add_case("stack_rows", [](Rng& rng) {
    Parameter a("a", Tensor::normal({3}, rng)), b("b", Tensor::normal({3}, rng));
    const Tensor wts = fixed_weights({3, 3}, rng);
    return check({&a, &b}, [&](Tape& t) {
      const Var rows[] = {t.parameter(a), t.parameter(b), t.parameter(a)};
      return weighted_sum(stack_rows(rows), wts);
    });
  });
  add_case("concat_maps", [](Rng& rng) {
    Parameter a("a", Tensor::normal({2, 2, 3}, rng)), b("b", Tensor::normal({2, 1, 3}, rng));
    const Tensor wts = fixed_weights({2, 3, 3}, rng);
    return check({&a, &b}, [&](Tape& t) {
      const Var maps[] = {t.parameter(a), t.parameter(b)};
      return weighted_sum(concat_maps(maps), wts);
    });
  });
  add_case("slice_map", [](Rng& rng) {
    return unary(rng, Tensor::normal({2, 4, 3}, rng), [](Var x) { return slice_map(x, 1, 2); });
  });
  add_case("slice_rows", [](Rng& rng) {
    return unary(rng, Tensor::normal({5, 3}, rng), [](Var x) { return slice_rows(x, 2, 3); });
  });

  add_case("pga layer pixels training", [](Rng& rng) {
    const PGAConfig cfg = small_config(4, 3, 3);
    return layer_case(rng, cfg, make_layer_graph(cfg, NeighborMode::Four), BNMode::Training, true);
  });
  add_case("pga layer pixels evaluation", [](Rng& rng) {
    const PGAConfig cfg = small_config(4, 3, 3);
    return layer_case(rng, cfg, make_layer_graph(cfg, NeighborMode::Eight), BNMode::Evaluation, true);
  });
  add_case("pga layer non-residual", [](Rng& rng) {
    const PGAConfig cfg = small_config(3, 2, 3);
    return layer_case(rng, cfg, make_layer_graph(cfg, NeighborMode::Four), BNMode::Training, false);
  });
  add_case("pga layer value projection", [](Rng& rng) {
    PGAConfig cfg = small_config(3, 3, 2);
    cfg.value_projection = true;
    return layer_case(rng, cfg, make_layer_graph(cfg, NeighborMode::Four), BNMode::Training, true);
  });
  add_case("pga layer channels", [](Rng& rng) {
    PGAConfig cfg = small_config(4, 2, 2);
    cfg.axis = NodeAxis::Channels;
    return layer_case(rng, cfg, make_layer_graph(cfg, NeighborMode::TwoChannel), BNMode::Training, true);
  });
  add_case("pga layer literal softmax", [](Rng& rng) {
    PGAConfig cfg = small_config(3, 2, 3);
    cfg.softmax = SoftmaxMode::Literal;
    return layer_case(rng, cfg, make_layer_graph(cfg, NeighborMode::Four), BNMode::Training, true);
  });
  add_case("pga batched layer", [](Rng& rng) {
    const PGAConfig cfg = small_config(3, 2, 3);
    PGALayer layer("layer", cfg, make_layer_graph(cfg, NeighborMode::Four), rng);
    for (BatchNormState* bn : layer.batchnorms()) randomize_affine(*bn, rng);
    layer.alpha_raw.value[0] = -0.2;
    Parameter f0("f0", Tensor::normal({3, 2, 3}, rng)), f1("f1", Tensor::normal({3, 2, 3}, rng));
    std::vector<Parameter*> params{&f0, &f1, &layer.theta.weight, &layer.phi.weight, &layer.alpha_raw};
    const Tensor w0 = fixed_weights({3, 2, 3}, rng), w1 = fixed_weights({3, 2, 3}, rng);
    return check(params, [&](Tape& t) {
      const Var maps[] = {t.parameter(f0), t.parameter(f1)};
      auto out = layer.residual_forward(t, maps);
      return add(weighted_sum(out[0], w0), weighted_sum(out[1], w1));
    });
  });
  add_case("pga stack depth 3", [](Rng& rng) {
    const PGAConfig cfg = small_config(3, 3, 2);
    PGAStack stack("stack", cfg, make_layer_graph(cfg, NeighborMode::Four), 3, rng);
    for (BatchNormState* bn : stack.batchnorms()) randomize_affine(*bn, rng);
    std::uniform_real_distribution<double> raw(-1.0, 1.0);
    for (auto& layer : stack.layers()) layer.alpha_raw.value[0] = raw(rng);
    Parameter f("input", Tensor::normal({3, 3, 2}, rng));
    std::vector<Parameter*> params{&f};
    for (Parameter* p : stack.parameters()) {
      if (!p->name.ends_with(".bias") && !p->name.ends_with(".phi.bn.beta")) params.push_back(p);
    }
    const Tensor wts = fixed_weights({3, 3, 2}, rng);
    return check(params, [&](Tape& t) { return weighted_sum(stack.forward(t, t.parameter(f)), wts); });
  });
  add_case("total_loss", [](Rng& rng) {
    const std::vector<int> labels{0, 0, 1, 1, 2, 2};
    Parameter logits("logits", Tensor::normal({6, 3}, rng)), emb("emb", Tensor::normal({6, 4}, rng)),
        centers("centers", Tensor::normal({3, 4}, rng));
    LossConfig cfg;
    // a heavier center weight makes that term visible next to the others
    cfg.beta = 0.5;
    return check({&logits, &emb, &centers}, [&](Tape& t) {
      return total_loss(t.parameter(logits), t.parameter(emb), t.parameter(centers), labels, cfg).total;
    });
  });
  return cases;
}

}  // namespace

CheckResult verify_locality(std::uint64_t seed, std::size_t max_depth) {
  constexpr std::size_t side = 4, channels = 4, n = side * side;
  std::ostringstream detail;
  for (std::size_t depth = 1; depth <= max_depth; ++depth) {
    std::mt19937_64 rng(seed * 1000 + depth);
    PGAConfig cfg;
    cfg.channels = channels;
    cfg.height = side;
    cfg.width = side;
    cfg.residual = false;
    PGAStack stack("locality", cfg, make_layer_graph(cfg, NeighborMode::Four), depth, rng);
    // evaluation-mode BN acts per pixel; batch statistics would couple every node
    std::uniform_real_distribution<double> mean(-0.2, 0.2), var(0.5, 1.5);
    for (BatchNormState* bn : stack.batchnorms()) {
      std::vector<double> m(bn->channels()), v(bn->channels());
      for (std::size_t c = 0; c < m.size(); ++c) {
        m[c] = mean(rng);
        v[c] = var(rng);
      }
      bn->seed_running_stats(std::move(m), std::move(v));
    }
    stack.set_mode(BNMode::Evaluation);
    // positive inputs keep every propagated value positive, so no change is clipped away
    const Tensor f = Tensor::uniform({channels, side, side}, rng, 0.5, 1.5);
    auto run = [&](const Tensor& input) {
      Tape tape;
      return stack.forward(tape, tape.constant(input)).value();
    };
    const Tensor base = run(f);
    std::size_t radius_min = n, radius_max = 0;
    for (std::size_t p = 0; p < n; ++p) {
      Tensor g = f;
      for (std::size_t c = 0; c < channels; ++c) g[c * n + p] += 0.5;
      const Tensor out = run(g);
      std::size_t radius = 0;
      for (std::size_t q = 0; q < n; ++q) {
        bool changed = false;
        for (std::size_t c = 0; c < channels; ++c) changed = changed || out[c * n + q] != base[c * n + q];
        if (!changed) continue;
        const std::size_t dist = static_cast<std::size_t>(
            std::abs(static_cast<long>(p / side) - static_cast<long>(q / side)) +
            std::abs(static_cast<long>(p % side) - static_cast<long>(q % side)));
        if (dist > depth) {
          return {"locality", false,
                  "L=" + std::to_string(depth) + ": perturbing pixel " + std::to_string(p) + " changed node " +
                      std::to_string(q) + " at distance " + std::to_string(dist)};
        }
        radius = std::max(radius, dist);
      }
      radius_min = std::min(radius_min, radius);
      radius_max = std::max(radius_max, radius);
    }
    if (radius_max != depth) {
      return {"locality", false,
              "L=" + std::to_string(depth) + ": influence never reached distance " + std::to_string(depth)};
    }
    detail << (depth > 1 ? "; " : "") << "L=" << depth << " radius " << radius_min << ".." << radius_max;
  }
  return {"locality", true, detail.str()};
}

std::vector<CheckResult> verify_gradients(std::uint64_t seed, std::size_t seeds, double tolerance) {
  std::vector<CheckResult> out;
  for (const GradCase& c : gradient_cases()) {
    double worst = 0.0;
    std::string where;
    for (std::size_t s = 0; s < seeds; ++s) {
      Rng rng(seed + s);
      const GradCheckResult r = c.run(rng);
      if (r.max_rel_error >= worst) {
        worst = r.max_rel_error;
        where = r.worst + " (seed " + std::to_string(seed + s) + ")";
      }
    }
    std::ostringstream detail;
    detail << "max rel err " << worst << " at " << where;
    out.push_back({"gradient " + c.name, worst <= tolerance, detail.str()});
  }
  return out;
}

void write_checks_csv(std::ostream& os, const std::vector<CheckResult>& results) {
  os << "check,status,detail\n";
  for (const auto& r : results) os << r.name << ',' << (r.passed ? "pass" : "FAIL") << ",\"" << r.detail << "\"\n";
}

}  // namespace pga
