#include "pga/pga.hpp"

#include <cmath>
#include <stdexcept>

namespace pga {

std::size_t PGAConfig::resolved_reduced_dim() const {
  if (reduced_dim > 0) return reduced_dim;
  return std::max<std::size_t>(1, feature_dim() / 2);
}

void PGAConfig::validate() const {
  if (channels == 0 || height == 0 || width == 0) {
    throw std::invalid_argument("PGA layer extents must be positive");
  }
}

TransferFunction::TransferFunction(const std::string& name, std::size_t in_dim, std::size_t out_dim,
                                   std::mt19937_64& rng)
    : weight(name + ".weight", Tensor::normal({out_dim, in_dim}, rng, std::sqrt(2.0 / static_cast<double>(in_dim)))),
      bias(name + ".bias", Tensor({out_dim})),
      bn(name + ".bn", out_dim) {}

Var TransferFunction::forward(Tape& tape, Var map) {
  Var h = conv1x1(map, tape.parameter(weight), tape.parameter(bias));
  h = relu(batchnorm(h, bn));
  return to_nodes(h);
}

void TransferFunction::collect(std::vector<Parameter*>& params) {
  params.push_back(&weight);
  params.push_back(&bias);
  params.push_back(&bn.gamma);
  params.push_back(&bn.beta);
}

Var correlation(Var theta_nodes, Var phi_nodes) { return matmul(theta_nodes, transpose(phi_nodes)); }

Var masked_attention(const Adjacency& adjacency, Var r, SoftmaxMode mode) {
  return masked_row_softmax(r, adjacency, mode);
}

Var propagate(Var a_tilde, Var v) { return relu(matmul(a_tilde, v)); }

PGALayer::PGALayer(const std::string& name, const PGAConfig& config, std::shared_ptr<const Adjacency> adjacency,
                   std::mt19937_64& rng)
    : config_(config) {
  config_.validate();
  const std::size_t d = config_.feature_dim();
  const std::size_t reduced = config_.resolved_reduced_dim();
  theta = TransferFunction(name + ".theta", d, reduced, rng);
  phi = TransferFunction(name + ".phi", d, reduced, rng);
  alpha_raw = Parameter(name + ".alpha_raw", Tensor::scalar(0.0));
  if (config_.value_projection) {
    // starts as the identity so the default behavior is recovered at init
    Tensor eye({d, d});
    for (std::size_t i = 0; i < d; ++i) eye.at(i, i) = 1.0;
    value_weight = Parameter(name + ".value.weight", std::move(eye));
    value_bias = Parameter(name + ".value.bias", Tensor({d}));
  }
  set_adjacency(std::move(adjacency));
}

void PGALayer::set_adjacency(std::shared_ptr<const Adjacency> adjacency) {
  if (!adjacency) throw std::invalid_argument("PGA layer needs an adjacency");
  if (adjacency->n() != config_.node_count()) {
    throw std::invalid_argument("adjacency has " + std::to_string(adjacency->n()) + " nodes but the layer expects " +
                                std::to_string(config_.node_count()));
  }
  adjacency_ = std::move(adjacency);
}

double PGALayer::alpha() const { return sigmoid(alpha_raw.value[0]); }

void PGALayer::check_input(const Tensor& f) const {
  const Shape expected{config_.channels, config_.height, config_.width};
  if (f.shape() != expected) {
    throw ShapeError("PGA layer expects input " + shape_str(expected) + ", got " + shape_str(f.shape()));
  }
}

// Channel mode presents the map as (H*W, C, 1): channels become the "pixels"
// of a one-column map so the pixel-mode machinery applies unchanged.
Var PGALayer::to_node_map(Var f) const {
  if (config_.axis == NodeAxis::Pixels) return f;
  const std::size_t c = config_.channels, hw = config_.height * config_.width;
  return reshape(transpose(reshape(f, {c, hw})), {hw, c, 1});
}

Var PGALayer::from_node_map(Var m) const {
  if (config_.axis == NodeAxis::Pixels) return m;
  const std::size_t c = config_.channels, hw = config_.height * config_.width;
  return reshape(transpose(reshape(m, {hw, c})), {c, config_.height, config_.width});
}

Var PGALayer::attention(Tape& tape, Var f) {
  std::vector<Var> attentions;
  const Var maps[] = {f};
  pga_forward(tape, maps, &attentions);
  return attentions.front();
}

std::vector<Var> PGALayer::pga_forward(Tape& tape, std::span<const Var> maps, std::vector<Var>* attentions) {
  if (maps.empty()) throw std::invalid_argument("PGA layer needs at least one feature map");
  std::vector<Var> node_maps;
  node_maps.reserve(maps.size());
  for (Var f : maps) {
    check_input(tape.value(f));
    node_maps.push_back(to_node_map(f));
  }
  // theta/phi batchnorm statistics span the whole batch
  Var joined = node_maps.size() == 1 ? node_maps.front() : concat_maps(node_maps);
  Var theta_all = theta.forward(tape, joined);
  Var phi_all = phi.forward(tape, joined);

  const std::size_t n = config_.node_count();
  const Shape ms = tape.value(node_maps.front()).shape();
  std::vector<Var> out;
  out.reserve(maps.size());
  for (std::size_t b = 0; b < maps.size(); ++b) {
    Var th = maps.size() == 1 ? theta_all : slice_rows(theta_all, b * n, n);
    Var ph = maps.size() == 1 ? phi_all : slice_rows(phi_all, b * n, n);
    Var a_tilde = masked_attention(*adjacency_, correlation(th, ph), config_.softmax);
    if (attentions) attentions->push_back(a_tilde);
    Var values = node_maps[b];
    if (config_.value_projection) values = conv1x1(values, tape.parameter(value_weight), tape.parameter(value_bias));
    Var propagated = propagate(a_tilde, to_nodes(values));
    out.push_back(from_node_map(to_feature_map(propagated, ms[1], ms[2])));
  }
  return out;
}

std::vector<Var> PGALayer::residual_forward(Tape& tape, std::span<const Var> maps, std::vector<Var>* attentions) {
  std::vector<Var> p = pga_forward(tape, maps, attentions);
  Var a = tape.parameter(alpha_raw);
  for (std::size_t b = 0; b < p.size(); ++b) p[b] = scalar_mix(a, maps[b], p[b]);
  return p;
}

Var PGALayer::pga_forward(Tape& tape, Var f, Var* attention_out) {
  std::vector<Var> attentions;
  const Var maps[] = {f};
  Var out = pga_forward(tape, maps, &attentions).front();
  if (attention_out) *attention_out = attentions.front();
  return out;
}

Var PGALayer::residual_forward(Tape& tape, Var f, Var* attention_out) {
  std::vector<Var> attentions;
  const Var maps[] = {f};
  Var out = residual_forward(tape, maps, &attentions).front();
  if (attention_out) *attention_out = attentions.front();
  return out;
}

std::vector<Parameter*> PGALayer::parameters() {
  std::vector<Parameter*> params;
  theta.collect(params);
  phi.collect(params);
  params.push_back(&alpha_raw);
  if (config_.value_projection) {
    params.push_back(&value_weight);
    params.push_back(&value_bias);
  }
  return params;
}

std::vector<BatchNormState*> PGALayer::batchnorms() { return {&theta.bn, &phi.bn}; }

void PGALayer::set_mode(BNMode mode) {
  theta.bn.mode = mode;
  phi.bn.mode = mode;
}

PGAStack::PGAStack(const std::string& prefix, const PGAConfig& config, std::shared_ptr<const Adjacency> adjacency,
                   std::size_t depth, std::mt19937_64& rng) {
  layers_.reserve(depth);
  for (std::size_t l = 0; l < depth; ++l) {
    layers_.emplace_back(prefix + "." + std::to_string(l), config, adjacency, rng);
  }
}

std::vector<Var> PGAStack::forward(Tape& tape, std::span<const Var> maps, std::vector<Var>* attentions) {
  std::vector<Var> f(maps.begin(), maps.end());
  for (auto& layer : layers_) {
    f = layer.config().residual ? layer.residual_forward(tape, f, attentions) : layer.pga_forward(tape, f, attentions);
  }
  return f;
}

Var PGAStack::forward(Tape& tape, Var f, std::vector<Var>* attentions) {
  const Var maps[] = {f};
  return forward(tape, maps, attentions).front();
}

std::vector<Parameter*> PGAStack::parameters() {
  std::vector<Parameter*> params;
  for (auto& layer : layers_) {
    auto p = layer.parameters();
    params.insert(params.end(), p.begin(), p.end());
  }
  return params;
}

std::vector<BatchNormState*> PGAStack::batchnorms() {
  std::vector<BatchNormState*> out;
  for (auto& layer : layers_) {
    auto b = layer.batchnorms();
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

void PGAStack::set_mode(BNMode mode) {
  for (auto& layer : layers_) layer.set_mode(mode);
}

void PGAStack::set_adjacency(std::shared_ptr<const Adjacency> adjacency) {
  for (auto& layer : layers_) layer.set_adjacency(adjacency);
}

std::shared_ptr<const Adjacency> make_layer_graph(const PGAConfig& config, NeighborMode mode) {
  if ((mode == NeighborMode::TwoChannel) != (config.axis == NodeAxis::Channels)) {
    throw std::invalid_argument("TwoChannel graphs go with channel nodes, pixel graphs with pixel nodes");
  }
  GridSpec spec{config.height, config.width, config.channels};
  return std::make_shared<const Adjacency>(generate_grid_graph(spec, mode));
}

}  // namespace pga
