#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pga/autograd.hpp"
#include "pga/grid_graph.hpp"
#include "pga/tensor.hpp"

// Differentiable operations over a Tape. Each op validates shapes, computes
// its value eagerly and records the backward rule. All inputs of one call
// must live on the same tape.

namespace pga {

enum class SoftmaxMode {
  /// Non-edges get weight exactly 0 (their logits are treated as -inf).
  Masked,
  /// softmax over the whole row of (A ⊙ R): non-edges enter with logit 0.
  Literal,
};

std::string_view to_string(SoftmaxMode mode);
SoftmaxMode parse_softmax_mode(std::string_view text);

enum class BNMode { Training, Evaluation };

/// Per-channel batch normalization parameters and running statistics.
struct BatchNormState {
  std::string name;
  Parameter gamma;
  Parameter beta;
  std::vector<double> running_mean;
  std::vector<double> running_var;
  double momentum = 0.1;
  double epsilon = 1e-5;
  BNMode mode = BNMode::Training;
  /// False until a training-mode pass or seed_running_stats() fills the running stats.
  bool initialized = false;

  BatchNormState() = default;
  BatchNormState(const std::string& name, std::size_t channels, double momentum = 0.1, double epsilon = 1e-5);

  std::size_t channels() const { return running_mean.size(); }
  void seed_running_stats(std::vector<double> mean, std::vector<double> var);
};

double sigmoid(double x);

Var matmul(Var a, Var b);
Var transpose(Var a);
Var reshape(Var a, Shape shape);
Var add(Var a, Var b);
Var scale(Var a, double factor);
Var sum(Var a);
/// sum(w ⊙ a) with a constant weight tensor of a's shape.
Var weighted_sum(Var a, const Tensor& weights);

/// max(0, x); the subgradient at exactly 0 is 0.
Var relu(Var x);

/// Row-wise softmax of an N x N score matrix restricted to the adjacency.
/// Masked mode: off-support entries are exactly 0 and a row without
/// neighbors is all zeros.
Var masked_row_softmax(Var scores, const Adjacency& mask, SoftmaxMode mode = SoftmaxMode::Masked);

/// (C, H, W) -> (H*W, C); node id = row * W + col.
Var to_nodes(Var feature_map);
/// (H*W, C) -> (C, H, W); inverse of to_nodes.
Var to_feature_map(Var nodes, std::size_t h, std::size_t w);

/// (B, D) x (K, D)^T + b -> (B, K)
Var linear(Var x, Var weight, Var bias);

/// Per-pixel affine map: (C, H, W), weight (C', C), bias (C') -> (C', H, W).
Var conv1x1(Var feature_map, Var weight, Var bias);

/// (C, H, W): normalizes each channel over its H*W values.
/// (B, C): normalizes each column over the B rows.
/// Training mode uses batch statistics and updates the running ones;
/// evaluation mode uses the running statistics and throws if they were
/// never initialized.
Var batchnorm(Var x, BatchNormState& state);

/// sigmoid(a) * x + (1 - sigmoid(a)) * y for a scalar a.
Var scalar_mix(Var a, Var x, Var y);

/// (C, ...) -> (C): mean over every axis but the first.
Var global_avg_pool(Var feature_map);

/// Rank-1 vectors of equal length -> (B, C).
Var stack_rows(std::span<const Var> rows);

/// (C, H_i, W) maps -> (C, sum H_i, W). Stacking a batch along the height axis
/// lets pixel-wise ops and batchnorm see every sample at once.
Var concat_maps(std::span<const Var> maps);
/// Rows [start, start + count) of the height axis of a (C, H, W) map.
Var slice_map(Var map, std::size_t start, std::size_t count);
/// Rows [start, start + count) of a matrix.
Var slice_rows(Var matrix, std::size_t start, std::size_t count);

}  // namespace pga
