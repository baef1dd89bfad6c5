#include "pga/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pga/simd/kernels.hpp"

namespace pga {

namespace {

Tape& tape_of(Var a) {
  if (!a.tape) throw std::invalid_argument("variable is not attached to a tape");
  return *a.tape;
}

Tape& common_tape(Var a, Var b) {
  if (a.tape != b.tape) throw std::invalid_argument("operands live on different tapes");
  return tape_of(a);
}

void require_rank(const Tensor& t, std::size_t rank, const char* what) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(what) + " expects rank " + std::to_string(rank) + ", got " + shape_str(t.shape()));
  }
}

Tensor gemm(const Tensor& a, const Tensor& b) {
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor c({m, n});
  simd::active_kernels().gemm(m, n, k, a.raw(), b.raw(), c.raw());
  return c;
}

// Channel-major view helpers for batchnorm: (C, M) with rows contiguous.
Tensor channel_major(const Tensor& x) {
  if (x.rank() == 3) return x.reshaped({x.dim(0), x.dim(1) * x.dim(2)});
  return x.transposed();
}

Tensor from_channel_major(const Tensor& xc, const Shape& shape) {
  if (shape.size() == 3) return xc.reshaped(shape);
  return xc.transposed();
}

}  // namespace

std::string_view to_string(SoftmaxMode mode) { return mode == SoftmaxMode::Masked ? "masked" : "literal"; }

SoftmaxMode parse_softmax_mode(std::string_view text) {
  if (text == "masked") return SoftmaxMode::Masked;
  if (text == "literal") return SoftmaxMode::Literal;
  throw std::invalid_argument("unknown softmax mode '" + std::string(text) + "'");
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

BatchNormState::BatchNormState(const std::string& bn_name, std::size_t channels, double mom, double eps)
    : name(bn_name),
      gamma(bn_name + ".gamma", Tensor({channels}, 1.0)),
      beta(bn_name + ".beta", Tensor({channels}, 0.0)),
      running_mean(channels, 0.0),
      running_var(channels, 1.0),
      momentum(mom),
      epsilon(eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("batchnorm epsilon must be positive");
}

void BatchNormState::seed_running_stats(std::vector<double> mean, std::vector<double> var) {
  if (mean.size() != channels() || var.size() != channels()) {
    throw ShapeError("running statistics must have " + std::to_string(channels()) + " channels");
  }
  for (double v : var) {
    if (!(v >= 0.0)) throw std::invalid_argument("running variance must be >= 0");
  }
  running_mean = std::move(mean);
  running_var = std::move(var);
  initialized = true;
}

Var matmul(Var a, Var b) {
  Tape& t = common_tape(a, b);
  const Tensor& av = t.value(a);
  const Tensor& bv = t.value(b);
  if (av.rank() != 2 || bv.rank() != 2 || av.dim(1) != bv.dim(0)) {
    throw ShapeError("matmul: cannot multiply " + shape_str(av.shape()) + " by " + shape_str(bv.shape()));
  }
  const std::size_t ia = a.id, ib = b.id;
  return t.record("matmul", {ia, ib}, gemm(av, bv), [ia, ib](Tape& tape, const Tensor& g) {
    const Tensor& A = tape.value(ia);
    const Tensor& B = tape.value(ib);
    if (tape.requires_grad(ia)) tape.accumulate(ia, gemm(g, B.transposed()));
    if (tape.requires_grad(ib)) tape.accumulate(ib, gemm(A.transposed(), g));
  });
}

Var transpose(Var a) {
  Tape& t = tape_of(a);
  require_rank(t.value(a), 2, "transpose");
  const std::size_t ia = a.id;
  return t.record("transpose", {ia}, t.value(a).transposed(),
                  [ia](Tape& tape, const Tensor& g) { tape.accumulate(ia, g.transposed()); });
}

Var reshape(Var a, Shape shape) {
  Tape& t = tape_of(a);
  const std::size_t ia = a.id;
  Shape original = t.value(a).shape();
  return t.record("reshape", {ia}, t.value(a).reshaped(std::move(shape)),
                  [ia, original](Tape& tape, const Tensor& g) { tape.accumulate(ia, g.reshaped(original)); });
}

Var add(Var a, Var b) {
  Tape& t = common_tape(a, b);
  const Tensor& av = t.value(a);
  const Tensor& bv = t.value(b);
  if (av.shape() != bv.shape()) {
    throw ShapeError("add: shapes " + shape_str(av.shape()) + " and " + shape_str(bv.shape()) + " differ");
  }
  Tensor out = av;
  simd::active_kernels().axpy(out.numel(), 1.0, bv.raw(), out.raw());
  const std::size_t ia = a.id, ib = b.id;
  return t.record("add", {ia, ib}, std::move(out), [ia, ib](Tape& tape, const Tensor& g) {
    tape.accumulate(ia, g);
    tape.accumulate(ib, g);
  });
}

Var scale(Var a, double factor) {
  Tape& t = tape_of(a);
  Tensor out = t.value(a);
  for (auto& v : out.data()) v *= factor;
  const std::size_t ia = a.id;
  return t.record("scale", {ia}, std::move(out), [ia, factor](Tape& tape, const Tensor& g) {
    Tensor& buf = tape.grad_buffer(ia);
    simd::active_kernels().axpy(g.numel(), factor, g.raw(), buf.raw());
  });
}

Var sum(Var a) {
  Tape& t = tape_of(a);
  double s = 0.0;
  for (double v : t.value(a).data()) s += v;
  const std::size_t ia = a.id;
  return t.record("sum", {ia}, Tensor::scalar(s), [ia](Tape& tape, const Tensor& g) {
    Tensor& buf = tape.grad_buffer(ia);
    for (auto& v : buf.data()) v += g[0];
  });
}

Var weighted_sum(Var a, const Tensor& weights) {
  Tape& t = tape_of(a);
  const Tensor& av = t.value(a);
  if (weights.shape() != av.shape()) {
    throw ShapeError("weighted_sum: weights " + shape_str(weights.shape()) + " vs input " + shape_str(av.shape()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < av.numel(); ++i) s += weights[i] * av[i];
  const std::size_t ia = a.id;
  return t.record("weighted_sum", {ia}, Tensor::scalar(s), [ia, weights](Tape& tape, const Tensor& g) {
    Tensor& buf = tape.grad_buffer(ia);
    simd::active_kernels().axpy(weights.numel(), g[0], weights.raw(), buf.raw());
  });
}

Var relu(Var x) {
  Tape& t = tape_of(x);
  const Tensor& xv = t.value(x);
  Tensor out(xv.shape());
  simd::active_kernels().relu(xv.numel(), xv.raw(), out.raw());
  const std::size_t ix = x.id;
  return t.record("relu", {ix}, std::move(out), [ix](Tape& tape, const Tensor& g) {
    const Tensor& in = tape.value(ix);
    Tensor& buf = tape.grad_buffer(ix);
    for (std::size_t i = 0; i < g.numel(); ++i) {
      if (in[i] > 0.0) buf[i] += g[i];
    }
  });
}

Var masked_row_softmax(Var scores, const Adjacency& mask, SoftmaxMode mode) {
  Tape& t = tape_of(scores);
  const Tensor& s = t.value(scores);
  if (s.rank() != 2 || s.dim(0) != s.dim(1)) {
    throw ShapeError("masked_row_softmax expects square scores, got " + shape_str(s.shape()));
  }
  const std::size_t n = s.dim(0);
  if (mask.n() != n) {
    throw ShapeError("masked_row_softmax: scores " + shape_str(s.shape()) + " but mask has " +
                     std::to_string(mask.n()) + " nodes");
  }

  Tensor out({n, n});
  if (mode == SoftmaxMode::Masked) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto cols = mask.neighbors(i);
      if (cols.empty()) continue;
      const double* row = s.raw() + i * n;
      double* orow = out.raw() + i * n;
      double mx = -std::numeric_limits<double>::infinity();
      for (NodeId j : cols) mx = std::max(mx, row[j]);
      double z = 0.0;
      for (NodeId j : cols) {
        orow[j] = std::exp(row[j] - mx);
        z += orow[j];
      }
      for (NodeId j : cols) orow[j] /= z;
    }
  } else {
    std::vector<double> logits(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::fill(logits.begin(), logits.end(), 0.0);
      for (NodeId j : mask.neighbors(i)) logits[j] = s.at(i, j);
      const double mx = *std::max_element(logits.begin(), logits.end());
      double z = 0.0;
      double* orow = out.raw() + i * n;
      for (std::size_t j = 0; j < n; ++j) {
        orow[j] = std::exp(logits[j] - mx);
        z += orow[j];
      }
      for (std::size_t j = 0; j < n; ++j) orow[j] /= z;
    }
  }

  const std::size_t is = scores.id;
  // The Adjacency must outlive the tape's backward pass.
  const Adjacency* support = &mask;
  Tensor saved = out;
  return t.record("masked_row_softmax", {is}, std::move(out),
                  [is, support, mode, n, y = std::move(saved)](Tape& tape, const Tensor& g) {
    Tensor& buf = tape.grad_buffer(is);
    for (std::size_t i = 0; i < n; ++i) {
      const auto cols = support->neighbors(i);
      if (cols.empty()) continue;
      const double* yr = y.raw() + i * n;
      const double* gr = g.raw() + i * n;
      double* br = buf.raw() + i * n;
      double dotp = 0.0;
      if (mode == SoftmaxMode::Masked) {
        for (NodeId j : cols) dotp += yr[j] * gr[j];
      } else {
        for (std::size_t j = 0; j < n; ++j) dotp += yr[j] * gr[j];
      }
      // only masked logits depend on the scores
      for (NodeId j : cols) br[j] += yr[j] * (gr[j] - dotp);
    }
  });
}

Var to_nodes(Var feature_map) {
  Tape& t = tape_of(feature_map);
  const Tensor& f = t.value(feature_map);
  require_rank(f, 3, "to_nodes");
  const std::size_t c = f.dim(0), h = f.dim(1), w = f.dim(2);
  const std::size_t iff = feature_map.id;
  return t.record("to_nodes", {iff}, f.reshaped({c, h * w}).transposed(), [iff, c, h, w](Tape& tape, const Tensor& g) {
    tape.accumulate(iff, g.transposed().reshaped({c, h, w}));
  });
}

Var to_feature_map(Var nodes, std::size_t h, std::size_t w) {
  Tape& t = tape_of(nodes);
  const Tensor& v = t.value(nodes);
  require_rank(v, 2, "to_feature_map");
  if (h * w != v.dim(0)) {
    throw ShapeError("to_feature_map: " + shape_str(v.shape()) + " has " + std::to_string(v.dim(0)) +
                     " nodes, which is not " + std::to_string(h) + "x" + std::to_string(w));
  }
  const std::size_t c = v.dim(1);
  const std::size_t in = nodes.id;
  return t.record("to_feature_map", {in}, v.transposed().reshaped({c, h, w}), [in, c, h, w](Tape& tape, const Tensor& g) {
    tape.accumulate(in, g.reshaped({c, h * w}).transposed());
  });
}

Var linear(Var x, Var weight, Var bias) {
  Tape& t = common_tape(x, weight);
  common_tape(x, bias);
  const Tensor& xv = t.value(x);
  const Tensor& wv = t.value(weight);
  const Tensor& bv = t.value(bias);
  if (xv.rank() != 2 || wv.rank() != 2 || xv.dim(1) != wv.dim(1) || bv.numel() != wv.dim(0)) {
    throw ShapeError("linear: input " + shape_str(xv.shape()) + ", weight " + shape_str(wv.shape()) + ", bias " +
                     shape_str(bv.shape()));
  }
  Tensor out = gemm(xv, wv.transposed());
  const std::size_t rows = out.dim(0), k = out.dim(1);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < k; ++j) out.at(r, j) = out.at(r, j) + bv[j];
  }
  const std::size_t ix = x.id, iw = weight.id, ib = bias.id;
  return t.record("linear", {ix, iw, ib}, std::move(out), [ix, iw, ib](Tape& tape, const Tensor& g) {
    if (tape.requires_grad(ix)) tape.accumulate(ix, gemm(g, tape.value(iw)));
    if (tape.requires_grad(iw)) tape.accumulate(iw, gemm(g.transposed(), tape.value(ix)));
    if (tape.requires_grad(ib)) {
      Tensor& buf = tape.grad_buffer(ib);
      for (std::size_t r = 0; r < g.dim(0); ++r) {
        for (std::size_t j = 0; j < g.dim(1); ++j) buf[j] += g.at(r, j);
      }
    }
  });
}

Var conv1x1(Var feature_map, Var weight, Var bias) {
  Tape& t = common_tape(feature_map, weight);
  common_tape(feature_map, bias);
  const Tensor& f = t.value(feature_map);
  const Tensor& wv = t.value(weight);
  const Tensor& bv = t.value(bias);
  require_rank(f, 3, "conv1x1");
  if (wv.rank() != 2 || wv.dim(1) != f.dim(0) || bv.numel() != wv.dim(0)) {
    throw ShapeError("conv1x1: input " + shape_str(f.shape()) + ", weight " + shape_str(wv.shape()) + ", bias " +
                     shape_str(bv.shape()));
  }
  const std::size_t c = f.dim(0), h = f.dim(1), w = f.dim(2), co = wv.dim(0), npix = h * w;
  Tensor out = gemm(wv, f.reshaped({c, npix}));
  for (std::size_t o = 0; o < co; ++o) {
    double* row = out.raw() + o * npix;
    for (std::size_t p = 0; p < npix; ++p) row[p] = row[p] + bv[o];
  }
  const std::size_t iff = feature_map.id, iw = weight.id, ib = bias.id;
  return t.record("conv1x1", {iff, iw, ib}, out.reshaped({co, h, w}),
                  [iff, iw, ib, c, h, w, co, npix](Tape& tape, const Tensor& g) {
                    const Tensor g2 = g.reshaped({co, npix});
                    if (tape.requires_grad(iff)) {
                      tape.accumulate(iff, gemm(tape.value(iw).transposed(), g2).reshaped({c, h, w}));
                    }
                    if (tape.requires_grad(iw)) {
                      tape.accumulate(iw, gemm(g2, tape.value(iff).reshaped({c, npix}).transposed()));
                    }
                    if (tape.requires_grad(ib)) {
                      Tensor& buf = tape.grad_buffer(ib);
                      for (std::size_t o = 0; o < co; ++o) {
                        double s = 0.0;
                        for (std::size_t p = 0; p < npix; ++p) s += g2.at(o, p);
                        buf[o] += s;
                      }
                    }
                  });
}

Var batchnorm(Var x, BatchNormState& state) {
  Tape& t = tape_of(x);
  const Tensor& xv = t.value(x);
  if (xv.rank() != 3 && xv.rank() != 2) {
    throw ShapeError("batchnorm expects (C,H,W) or (B,C), got " + shape_str(xv.shape()));
  }
  const std::size_t channels = xv.rank() == 3 ? xv.dim(0) : xv.dim(1);
  if (channels != state.channels()) {
    throw ShapeError("batchnorm: input " + shape_str(xv.shape()) + " has " + std::to_string(channels) +
                     " channels, state has " + std::to_string(state.channels()));
  }
  const bool training = state.mode == BNMode::Training;
  if (!training && !state.initialized) {
    throw std::logic_error("batchnorm '" + state.name + "': uninitialized running statistics");
  }

  const Tensor xc = channel_major(xv);
  const std::size_t m = xc.dim(1);
  Tensor xhat({channels, m});
  std::vector<double> inv_std(channels);
  for (std::size_t c = 0; c < channels; ++c) {
    const double* row = xc.raw() + c * m;
    double mean, var;
    if (training) {
      mean = 0.0;
      for (std::size_t i = 0; i < m; ++i) mean += row[i];
      mean /= static_cast<double>(m);
      var = 0.0;
      for (std::size_t i = 0; i < m; ++i) var += (row[i] - mean) * (row[i] - mean);
      var /= static_cast<double>(m);
      const double unbiased = m > 1 ? var * static_cast<double>(m) / static_cast<double>(m - 1) : var;
      state.running_mean[c] = (1.0 - state.momentum) * state.running_mean[c] + state.momentum * mean;
      state.running_var[c] = (1.0 - state.momentum) * state.running_var[c] + state.momentum * unbiased;
    } else {
      mean = state.running_mean[c];
      var = state.running_var[c];
    }
    inv_std[c] = 1.0 / std::sqrt(var + state.epsilon);
    for (std::size_t i = 0; i < m; ++i) xhat.at(c, i) = (row[i] - mean) * inv_std[c];
  }
  if (training) state.initialized = true;

  Var gamma = t.parameter(state.gamma);
  Var beta = t.parameter(state.beta);
  const Tensor& gv = t.value(gamma);
  const Tensor& bv = t.value(beta);
  Tensor yc({channels, m});
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t i = 0; i < m; ++i) yc.at(c, i) = gv[c] * xhat.at(c, i) + bv[c];
  }

  const std::size_t ix = x.id, ig = gamma.id, ib = beta.id;
  Shape shape = xv.shape();
  return t.record("batchnorm", {ix, ig, ib}, from_channel_major(yc, shape),
                  [ix, ig, ib, shape, xhat = std::move(xhat), inv_std = std::move(inv_std), training, channels,
                   m](Tape& tape, const Tensor& g) {
                    const Tensor gc = channel_major(g);
                    const Tensor& gamma_v = tape.value(ig);
                    Tensor dgamma({channels}), dbeta({channels});
                    Tensor dx({channels, m});
                    const double mm = static_cast<double>(m);
                    for (std::size_t c = 0; c < channels; ++c) {
                      double sg = 0.0, sgx = 0.0;
                      for (std::size_t i = 0; i < m; ++i) {
                        sg += gc.at(c, i);
                        sgx += gc.at(c, i) * xhat.at(c, i);
                      }
                      dgamma[c] = sgx;
                      dbeta[c] = sg;
                      const double k = gamma_v[c] * inv_std[c];
                      for (std::size_t i = 0; i < m; ++i) {
                        dx.at(c, i) = training ? k * (gc.at(c, i) - sg / mm - xhat.at(c, i) * sgx / mm) : k * gc.at(c, i);
                      }
                    }
                    tape.accumulate(ig, dgamma);
                    tape.accumulate(ib, dbeta);
                    if (tape.requires_grad(ix)) tape.accumulate(ix, from_channel_major(dx, shape));
                  });
}

Var scalar_mix(Var a, Var x, Var y) {
  Tape& t = common_tape(x, y);
  common_tape(a, x);
  const Tensor& av = t.value(a);
  const Tensor& xv = t.value(x);
  const Tensor& yv = t.value(y);
  if (av.numel() != 1) throw ShapeError("scalar_mix: mixing parameter must be scalar, got " + shape_str(av.shape()));
  if (xv.shape() != yv.shape()) {
    throw ShapeError("scalar_mix: shapes " + shape_str(xv.shape()) + " and " + shape_str(yv.shape()) + " differ");
  }
  const double alpha = sigmoid(av[0]);
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = alpha * xv[i] + (1.0 - alpha) * yv[i];
  const std::size_t ia = a.id, ix = x.id, iy = y.id;
  return t.record("scalar_mix", {ia, ix, iy}, std::move(out), [ia, ix, iy, alpha](Tape& tape, const Tensor& g) {
    if (tape.requires_grad(ia)) {
      const Tensor& xv = tape.value(ix);
      const Tensor& yv = tape.value(iy);
      double s = 0.0;
      for (std::size_t i = 0; i < g.numel(); ++i) s += g[i] * (xv[i] - yv[i]);
      tape.grad_buffer(ia)[0] += s * alpha * (1.0 - alpha);
    }
    if (tape.requires_grad(ix)) simd::active_kernels().axpy(g.numel(), alpha, g.raw(), tape.grad_buffer(ix).raw());
    if (tape.requires_grad(iy)) {
      simd::active_kernels().axpy(g.numel(), 1.0 - alpha, g.raw(), tape.grad_buffer(iy).raw());
    }
  });
}

Var global_avg_pool(Var feature_map) {
  Tape& t = tape_of(feature_map);
  const Tensor& f = t.value(feature_map);
  if (f.rank() < 2) throw ShapeError("global_avg_pool expects (C, ...), got " + shape_str(f.shape()));
  const std::size_t c = f.dim(0), m = f.numel() / c;
  Tensor out({c});
  for (std::size_t ch = 0; ch < c; ++ch) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += f[ch * m + i];
    out[ch] = s / static_cast<double>(m);
  }
  const std::size_t iff = feature_map.id;
  return t.record("global_avg_pool", {iff}, std::move(out), [iff, c, m](Tape& tape, const Tensor& g) {
    Tensor& buf = tape.grad_buffer(iff);
    for (std::size_t ch = 0; ch < c; ++ch) {
      const double share = g[ch] / static_cast<double>(m);
      for (std::size_t i = 0; i < m; ++i) buf[ch * m + i] += share;
    }
  });
}

Var stack_rows(std::span<const Var> rows) {
  if (rows.empty()) throw ShapeError("stack_rows needs at least one row");
  Tape& t = tape_of(rows[0]);
  const std::size_t width = t.value(rows[0]).numel();
  std::vector<std::size_t> ids;
  Tensor out({rows.size(), width});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].tape != &t) throw std::invalid_argument("stack_rows: rows live on different tapes");
    const Tensor& v = t.value(rows[r]);
    if (v.rank() != 1 || v.numel() != width) {
      throw ShapeError("stack_rows: row " + std::to_string(r) + " has shape " + shape_str(v.shape()));
    }
    std::copy(v.data().begin(), v.data().end(), out.raw() + r * width);
    ids.push_back(rows[r].id);
  }
  return t.record("stack_rows", ids, std::move(out), [ids, width](Tape& tape, const Tensor& g) {
    for (std::size_t r = 0; r < ids.size(); ++r) {
      if (!tape.requires_grad(ids[r])) continue;
      Tensor& buf = tape.grad_buffer(ids[r]);
      for (std::size_t j = 0; j < width; ++j) buf[j] += g[r * width + j];
    }
  });
}

Var concat_maps(std::span<const Var> maps) {
  if (maps.empty()) throw ShapeError("concat_maps needs at least one map");
  Tape& t = tape_of(maps[0]);
  const Tensor& first = t.value(maps[0]);
  require_rank(first, 3, "concat_maps");
  const std::size_t c = first.dim(0), w = first.dim(2);
  std::vector<std::size_t> ids, heights;
  std::size_t total = 0;
  for (const Var& m : maps) {
    if (m.tape != &t) throw std::invalid_argument("concat_maps: maps live on different tapes");
    const Tensor& v = t.value(m);
    if (v.rank() != 3 || v.dim(0) != c || v.dim(2) != w) {
      throw ShapeError("concat_maps: " + shape_str(v.shape()) + " does not stack with " + shape_str(first.shape()));
    }
    ids.push_back(m.id);
    heights.push_back(v.dim(1));
    total += v.dim(1);
  }
  Tensor out({c, total, w});
  std::size_t offset = 0;
  for (std::size_t b = 0; b < maps.size(); ++b) {
    const Tensor& v = t.value(maps[b]);
    for (std::size_t ch = 0; ch < c; ++ch) {
      std::copy_n(v.raw() + ch * heights[b] * w, heights[b] * w, out.raw() + (ch * total + offset) * w);
    }
    offset += heights[b];
  }
  return t.record("concat_maps", ids, std::move(out), [ids, heights, c, w, total](Tape& tape, const Tensor& g) {
    std::size_t offset = 0;
    for (std::size_t b = 0; b < ids.size(); ++b) {
      if (tape.requires_grad(ids[b])) {
        Tensor& buf = tape.grad_buffer(ids[b]);
        for (std::size_t ch = 0; ch < c; ++ch) {
          const double* src = g.raw() + (ch * total + offset) * w;
          double* dst = buf.raw() + ch * heights[b] * w;
          for (std::size_t i = 0; i < heights[b] * w; ++i) dst[i] += src[i];
        }
      }
      offset += heights[b];
    }
  });
}

Var slice_map(Var map, std::size_t start, std::size_t count) {
  Tape& t = tape_of(map);
  const Tensor& v = t.value(map);
  require_rank(v, 3, "slice_map");
  const std::size_t c = v.dim(0), h = v.dim(1), w = v.dim(2);
  if (count == 0 || start + count > h) {
    throw ShapeError("slice_map: rows [" + std::to_string(start) + ", " + std::to_string(start + count) +
                     ") out of " + shape_str(v.shape()));
  }
  Tensor out({c, count, w});
  for (std::size_t ch = 0; ch < c; ++ch) {
    std::copy_n(v.raw() + (ch * h + start) * w, count * w, out.raw() + ch * count * w);
  }
  const std::size_t im = map.id;
  return t.record("slice_map", {im}, std::move(out), [im, c, h, w, start, count](Tape& tape, const Tensor& g) {
    if (!tape.requires_grad(im)) return;
    Tensor& buf = tape.grad_buffer(im);
    for (std::size_t ch = 0; ch < c; ++ch) {
      const double* src = g.raw() + ch * count * w;
      double* dst = buf.raw() + (ch * h + start) * w;
      for (std::size_t i = 0; i < count * w; ++i) dst[i] += src[i];
    }
  });
}

Var slice_rows(Var matrix, std::size_t start, std::size_t count) {
  Tape& t = tape_of(matrix);
  const Tensor& v = t.value(matrix);
  require_rank(v, 2, "slice_rows");
  const std::size_t rows = v.dim(0), cols = v.dim(1);
  if (count == 0 || start + count > rows) {
    throw ShapeError("slice_rows: rows [" + std::to_string(start) + ", " + std::to_string(start + count) +
                     ") out of " + shape_str(v.shape()));
  }
  Tensor out({count, cols});
  std::copy_n(v.raw() + start * cols, count * cols, out.raw());
  const std::size_t im = matrix.id;
  return t.record("slice_rows", {im}, std::move(out), [im, cols, start, count](Tape& tape, const Tensor& g) {
    if (!tape.requires_grad(im)) return;
    double* dst = tape.grad_buffer(im).raw() + start * cols;
    for (std::size_t i = 0; i < count * cols; ++i) dst[i] += g[i];
  });
}

}  // namespace pga
