#pragma once

#include <cstddef>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pga/autograd.hpp"
#include "pga/grid_graph.hpp"
#include "pga/ops.hpp"

namespace pga {

/// What a graph node stands for.
enum class NodeAxis {
  /// One node per pixel (N = H*W), features are the C channel values.
  Pixels,
  /// One node per channel (N = C), features are the flattened H*W map.
  Channels,
};

struct PGAConfig {
  std::size_t channels = 16;
  std::size_t height = 16;
  std::size_t width = 8;
  /// Transfer-function output width C'. 0 picks max(1, D/2) for node feature width D.
  std::size_t reduced_dim = 0;
  NodeAxis axis = NodeAxis::Pixels;
  SoftmaxMode softmax = SoftmaxMode::Masked;
  /// Adds a learned 1x1 projection on the propagated values. Off by default.
  bool value_projection = false;
  /// Stack layers apply alpha*F + (1-alpha)*PGA(F) when set, plain PGA(F) otherwise.
  bool residual = true;

  std::size_t node_count() const { return axis == NodeAxis::Pixels ? height * width : channels; }
  std::size_t feature_dim() const { return axis == NodeAxis::Pixels ? channels : height * width; }
  std::size_t resolved_reduced_dim() const;
  void validate() const;
};

/// 1x1 conv -> batchnorm -> relu -> reshape to an (N, C') node matrix.
class TransferFunction {
 public:
  TransferFunction() = default;
  TransferFunction(const std::string& name, std::size_t in_dim, std::size_t out_dim, std::mt19937_64& rng);

  /// (D, H', W') map -> (H'*W', C') node matrix.
  Var forward(Tape& tape, Var map);

  std::size_t out_dim() const { return weight.value.dim(0); }
  void collect(std::vector<Parameter*>& params);

  Parameter weight;
  Parameter bias;
  BatchNormState bn;
};

/// R = theta_nodes * phi_nodes^T, an (N, N) score matrix.
Var correlation(Var theta_nodes, Var phi_nodes);

/// Row softmax of R restricted to the adjacency support.
Var masked_attention(const Adjacency& adjacency, Var r, SoftmaxMode mode = SoftmaxMode::Masked);

/// relu(a_tilde * v)
Var propagate(Var a_tilde, Var v);

/// One pixel-wise graph attention layer with its own theta, phi and mixing weight.
class PGALayer {
 public:
  PGALayer(const std::string& name, const PGAConfig& config, std::shared_ptr<const Adjacency> adjacency,
           std::mt19937_64& rng);

  const PGAConfig& config() const { return config_; }
  const Adjacency& adjacency() const { return *adjacency_; }
  const std::shared_ptr<const Adjacency>& shared_adjacency() const { return adjacency_; }
  void set_adjacency(std::shared_ptr<const Adjacency> adjacency);

  /// sigmoid(alpha_raw)
  double alpha() const;

  /// (C, H, W) -> attention matrix (N, N).
  Var attention(Tape& tape, Var f);
  /// PGA(F): attention-weighted propagation of transf(F), reshaped back to F's shape.
  /// When `attention_out` is given it receives the attention node.
  Var pga_forward(Tape& tape, Var f, Var* attention_out = nullptr);
  /// alpha*F + (1-alpha)*PGA(F).
  Var residual_forward(Tape& tape, Var f, Var* attention_out = nullptr);

  /// Batched forms: theta/phi batchnorm statistics are shared by all maps,
  /// attention and propagation stay per map. Attentions are appended in map order.
  std::vector<Var> pga_forward(Tape& tape, std::span<const Var> maps, std::vector<Var>* attentions = nullptr);
  std::vector<Var> residual_forward(Tape& tape, std::span<const Var> maps, std::vector<Var>* attentions = nullptr);

  std::vector<Parameter*> parameters();
  std::vector<BatchNormState*> batchnorms();
  void set_mode(BNMode mode);

  TransferFunction theta;
  TransferFunction phi;
  Parameter alpha_raw;
  Parameter value_weight;
  Parameter value_bias;

 private:
  Var to_node_map(Var f) const;
  Var from_node_map(Var m) const;
  void check_input(const Tensor& f) const;

  PGAConfig config_;
  std::shared_ptr<const Adjacency> adjacency_;
};

/// Sequence of PGA layers over one shared graph. Depth 0 is the identity.
class PGAStack {
 public:
  PGAStack() = default;
  PGAStack(const std::string& prefix, const PGAConfig& config, std::shared_ptr<const Adjacency> adjacency,
           std::size_t depth, std::mt19937_64& rng);

  /// When `attentions` is given, one attention node per layer is appended.
  Var forward(Tape& tape, Var f, std::vector<Var>* attentions = nullptr);
  /// Batched form; attentions are appended layer-major, then map order.
  std::vector<Var> forward(Tape& tape, std::span<const Var> maps, std::vector<Var>* attentions = nullptr);

  std::size_t depth() const { return layers_.size(); }
  std::vector<PGALayer>& layers() { return layers_; }
  const std::vector<PGALayer>& layers() const { return layers_; }

  std::vector<Parameter*> parameters();
  std::vector<BatchNormState*> batchnorms();
  void set_mode(BNMode mode);
  void set_adjacency(std::shared_ptr<const Adjacency> adjacency);

 private:
  std::vector<PGALayer> layers_;
};

/// Graph for a layer configuration: pixel modes build an h x w grid, TwoChannel a chain over channels.
std::shared_ptr<const Adjacency> make_layer_graph(const PGAConfig& config, NeighborMode mode);

}  // namespace pga
