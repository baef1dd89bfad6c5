#include "pga/model.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace pga {

std::string_view to_string(GraphKind kind) {
  switch (kind) {
    case GraphKind::Four: return "four";
    case GraphKind::Eight: return "eight";
    case GraphKind::TwoChannel: return "two_channel";
    case GraphKind::FullyConnected: return "fully_connected";
  }
  return "?";
}

GraphKind parse_graph_kind(std::string_view text) {
  if (text == "four" || text == "4") return GraphKind::Four;
  if (text == "eight" || text == "8") return GraphKind::Eight;
  if (text == "two_channel" || text == "2" || text == "channel") return GraphKind::TwoChannel;
  if (text == "fully_connected" || text == "full") return GraphKind::FullyConnected;
  throw std::invalid_argument("unknown graph kind '" + std::string(text) + "'");
}

void ModelConfig::validate() const {
  if (in_channels == 0 || height == 0 || width == 0) throw std::invalid_argument("input extents must be positive");
  if (embed_dim == 0) throw std::invalid_argument("embed_dim must be positive");
  if (num_classes < 2) throw std::invalid_argument("num_classes must be at least 2");
  if (depth > 16) throw std::invalid_argument("depth above 16 is not supported");
}

PGAConfig ModelConfig::pga_config() const {
  PGAConfig c;
  c.channels = embed_dim;
  c.height = height;
  c.width = width;
  c.reduced_dim = reduced_dim;
  c.axis = graph == GraphKind::TwoChannel ? NodeAxis::Channels : NodeAxis::Pixels;
  c.softmax = softmax;
  c.value_projection = value_projection;
  c.residual = true;
  return c;
}

std::shared_ptr<const Adjacency> make_model_graph(const ModelConfig& config) {
  Adjacency a;
  const PGAConfig pc = config.pga_config();
  switch (config.graph) {
    case GraphKind::Four: a = generate_grid_graph({config.height, config.width, config.embed_dim}, NeighborMode::Four); break;
    case GraphKind::Eight: a = generate_grid_graph({config.height, config.width, config.embed_dim}, NeighborMode::Eight); break;
    case GraphKind::TwoChannel: a = generate_grid_graph({config.height, config.width, config.embed_dim}, NeighborMode::TwoChannel); break;
    case GraphKind::FullyConnected: a = fully_connected(pc.node_count()); break;
  }
  if (config.self_loops) a = with_self_loops(a);
  return std::make_shared<const Adjacency>(std::move(a));
}

ToyModel::ToyModel(const ModelConfig& config) : config_(config) {
  config_.validate();
  std::mt19937_64 rng(config_.seed);
  const std::size_t c = config_.embed_dim, k = config_.num_classes;
  stem_weight_ = Parameter("stem.weight", Tensor::normal({c, config_.in_channels}, rng,
                                                         std::sqrt(2.0 / static_cast<double>(config_.in_channels))));
  stem_bias_ = Parameter("stem.bias", Tensor({c}));
  stem_bn_ = BatchNormState("stem.bn", c);
  stack_ = PGAStack("pga", config_.pga_config(), make_model_graph(config_), config_.depth, rng);
  neck_ = BatchNormState("neck.bn", c);
  classifier_weight_ = Parameter("classifier.weight", Tensor::normal({k, c}, rng, 0.01));
  classifier_bias_ = Parameter("classifier.bias", Tensor({k}));
  centers = Parameter("center_loss.centers", Tensor::normal({k, c}, rng, 1.0));
}

ToyModel::Output ToyModel::forward(Tape& tape, std::span<const Tensor> batch, bool keep_attention) {
  if (batch.empty()) throw std::invalid_argument("forward needs at least one sample");
  const Shape expected{config_.in_channels, config_.height, config_.width};
  std::vector<Var> inputs;
  inputs.reserve(batch.size());
  for (const Tensor& x : batch) {
    if (x.shape() != expected) {
      throw ShapeError("model expects input " + shape_str(expected) + ", got " + shape_str(x.shape()));
    }
    inputs.push_back(tape.constant(x));
  }
  // samples stacked along the height axis so the stem batchnorm sees the whole batch
  Var joined = inputs.size() == 1 ? inputs.front() : concat_maps(inputs);
  Var stem = relu(batchnorm(conv1x1(joined, tape.parameter(stem_weight_), tape.parameter(stem_bias_)), stem_bn_));
  std::vector<Var> maps;
  maps.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    maps.push_back(batch.size() == 1 ? stem : slice_map(stem, i * config_.height, config_.height));
  }

  Output out;
  maps = stack_.forward(tape, maps, keep_attention ? &out.attentions : nullptr);
  std::vector<Var> pooled;
  pooled.reserve(maps.size());
  for (Var m : maps) pooled.push_back(global_avg_pool(m));
  out.embeddings = batchnorm(stack_rows(pooled), neck_);
  out.logits = linear(out.embeddings, tape.parameter(classifier_weight_), tape.parameter(classifier_bias_));
  return out;
}

void ToyModel::set_mode(BNMode mode) {
  mode_ = mode;
  stem_bn_.mode = mode;
  neck_.mode = mode;
  stack_.set_mode(mode);
}

std::vector<Parameter*> ToyModel::parameters() {
  std::vector<Parameter*> params{&stem_weight_, &stem_bias_, &stem_bn_.gamma, &stem_bn_.beta};
  auto sp = stack_.parameters();
  params.insert(params.end(), sp.begin(), sp.end());
  params.insert(params.end(), {&neck_.gamma, &neck_.beta, &classifier_weight_, &classifier_bias_, &centers});
  return params;
}

std::vector<BatchNormState*> ToyModel::batchnorms() {
  std::vector<BatchNormState*> out{&stem_bn_};
  auto sb = stack_.batchnorms();
  out.insert(out.end(), sb.begin(), sb.end());
  out.push_back(&neck_);
  return out;
}

}  // namespace pga
