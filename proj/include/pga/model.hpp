#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pga/autograd.hpp"
#include "pga/ops.hpp"
#include "pga/pga.hpp"

namespace pga {

/// Graph used by every PGA layer of a model.
enum class GraphKind { Four, Eight, TwoChannel, FullyConnected };

std::string_view to_string(GraphKind kind);
GraphKind parse_graph_kind(std::string_view text);

struct ModelConfig {
  std::size_t in_channels = 3;
  std::size_t height = 16;
  std::size_t width = 8;
  /// Embedding width C (stem output channels).
  std::size_t embed_dim = 16;
  /// C' of the transfer functions; 0 = automatic.
  std::size_t reduced_dim = 0;
  std::size_t depth = 2;
  std::size_t num_classes = 8;
  GraphKind graph = GraphKind::Four;
  SoftmaxMode softmax = SoftmaxMode::Masked;
  bool self_loops = false;
  bool value_projection = false;
  std::uint64_t seed = 0;

  void validate() const;
  PGAConfig pga_config() const;
};

/// Builds the adjacency a model configuration calls for.
std::shared_ptr<const Adjacency> make_model_graph(const ModelConfig& config);

/// 1x1-conv stem -> PGA stack -> global average pool -> BN neck -> linear classifier.
class ToyModel {
 public:
  explicit ToyModel(const ModelConfig& config);

  struct Output {
    /// (B, K)
    Var logits;
    /// (B, C), after the neck and before the classifier.
    Var embeddings;
    /// Attention matrices, layer-major then sample-major, when requested.
    std::vector<Var> attentions;
  };

  Output forward(Tape& tape, std::span<const Tensor> batch, bool keep_attention = false);

  void set_mode(BNMode mode);
  BNMode mode() const { return mode_; }

  const ModelConfig& config() const { return config_; }
  PGAStack& stack() { return stack_; }
  const PGAStack& stack() const { return stack_; }

  /// Center-loss centers (K, C), trained alongside the network.
  Parameter centers;

  /// All learnable tensors including the centers, in a fixed order with unique names.
  std::vector<Parameter*> parameters();
  std::vector<BatchNormState*> batchnorms();

 private:
  ModelConfig config_;
  BNMode mode_ = BNMode::Training;
  Parameter stem_weight_;
  Parameter stem_bias_;
  BatchNormState stem_bn_;
  PGAStack stack_;
  BatchNormState neck_;
  Parameter classifier_weight_;
  Parameter classifier_bias_;
};

}  // namespace pga
