#include "pga/train.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <ostream>
#include <random>
#include <stdexcept>

namespace pga {

std::vector<std::vector<std::size_t>> pk_batches(const SynthDataset& data, std::size_t p, std::size_t k,
                                                 std::mt19937_64& rng) {
  if (p < 2 || k < 2) throw std::invalid_argument("PK sampling needs P >= 2 and K >= 2 for valid triplets");
  std::map<int, std::vector<std::size_t>> by_id;
  for (std::size_t i : data.indices(Split::Train)) by_id[data.samples[i].identity].push_back(i);
  std::vector<int> ids;
  for (const auto& [id, members] : by_id) ids.push_back(id);
  if (ids.size() < p) throw std::invalid_argument("training split has fewer identities than P");

  std::size_t n_train = 0;
  for (const auto& [id, members] : by_id) n_train += members.size();
  const std::size_t per_batch = p * k;
  const std::size_t count = (n_train + per_batch - 1) / per_batch;

  std::vector<std::vector<std::size_t>> batches;
  batches.reserve(count);
  for (std::size_t b = 0; b < count; ++b) {
    std::shuffle(ids.begin(), ids.end(), rng);
    std::vector<std::size_t> batch;
    batch.reserve(per_batch);
    for (std::size_t pi = 0; pi < p; ++pi) {
      std::vector<std::size_t> members = by_id[ids[pi]];
      std::shuffle(members.begin(), members.end(), rng);
      for (std::size_t ki = 0; ki < k; ++ki) {
        if (ki < members.size()) {
          batch.push_back(members[ki]);
        } else {
          std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
          batch.push_back(members[pick(rng)]);
        }
      }
    }
    batches.push_back(std::move(batch));
  }
  return batches;
}

namespace {

struct BatchStats {
  double loss = 0, id = 0, triplet = 0, center = 0;
  std::size_t correct = 0, seen = 0;
};

void accumulate_stats(BatchStats& s, const LossTerms& terms, const ToyModel::Output& out, std::span<const int> labels) {
  s.loss += terms.total.value().item();
  s.id += terms.id.value().item();
  s.triplet += terms.triplet.value().item();
  s.center += terms.center.value().item();
  const Tensor& logits = out.logits.value();
  const std::size_t k = logits.dim(1);
  for (std::size_t r = 0; r < labels.size(); ++r) {
    const double* row = logits.raw() + r * k;
    const auto pred = static_cast<int>(std::max_element(row, row + k) - row);
    s.correct += pred == labels[r] ? 1 : 0;
    ++s.seen;
  }
}

EpochLog finish(std::size_t epoch, const BatchStats& s, std::size_t batches, ToyModel& model) {
  EpochLog log;
  log.epoch = epoch;
  const double nb = static_cast<double>(batches);
  log.loss = s.loss / nb;
  log.id_loss = s.id / nb;
  log.triplet_loss = s.triplet / nb;
  log.center_loss = s.center / nb;
  log.train_acc = static_cast<double>(s.correct) / static_cast<double>(s.seen);
  for (const auto& layer : model.stack().layers()) log.alphas.push_back(layer.alpha());
  return log;
}

void gather(const SynthDataset& data, const std::vector<std::size_t>& batch, std::vector<Tensor>& images,
            std::vector<int>& labels) {
  images.clear();
  labels.clear();
  for (std::size_t i : batch) {
    images.push_back(data.samples[i].image);
    labels.push_back(data.samples[i].identity);
  }
}

}  // namespace

TrainLog train(ToyModel& model, const SynthDataset& data, const TrainConfig& config) {
  config.loss.validate();
  const ModelConfig& mc = model.config();
  const DatasetConfig& dc = data.config;
  if (mc.in_channels != dc.channels || mc.height != dc.height || mc.width != dc.width) {
    throw ShapeError("dataset images (" + std::to_string(dc.channels) + "," + std::to_string(dc.height) + "," +
                     std::to_string(dc.width) + ") do not match the model input");
  }
  if (mc.num_classes < dc.identities) throw std::invalid_argument("model has fewer classes than dataset identities");

  std::mt19937_64 rng(config.seed);
  model.set_mode(BNMode::Training);
  auto params = model.parameters();
  Adam optimizer(params, config.adam);
  TrainLog log;
  std::vector<Tensor> images;
  std::vector<int> labels;

  {
    // initial state: forward only, same batch construction as training
    std::mt19937_64 probe = rng;
    const auto batches = pk_batches(data, config.batch_p, config.batch_k, probe);
    BatchStats stats;
    for (const auto& batch : batches) {
      gather(data, batch, images, labels);
      Tape tape;
      auto out = model.forward(tape, images);
      auto terms = total_loss(out.logits, out.embeddings, tape.parameter(model.centers), labels, config.loss);
      accumulate_stats(stats, terms, out, labels);
    }
    log.epochs.push_back(finish(0, stats, batches.size(), model));
  }

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto batches = pk_batches(data, config.batch_p, config.batch_k, rng);
    BatchStats stats;
    for (const auto& batch : batches) {
      gather(data, batch, images, labels);
      zero_grads(params);
      Tape tape;
      auto out = model.forward(tape, images);
      auto terms = total_loss(out.logits, out.embeddings, tape.parameter(model.centers), labels, config.loss);
      tape.backward(terms.total);
      optimizer.step();
      accumulate_stats(stats, terms, out, labels);
    }
    log.epochs.push_back(finish(epoch, stats, batches.size(), model));
    if (config.target_accuracy > 0.0 && log.epochs.back().train_acc >= config.target_accuracy) break;
  }
  return log;
}

void write_train_log_csv(std::ostream& os, const TrainLog& log, std::size_t depth) {
  os << "epoch,loss,id_loss,triplet_loss,center_loss,train_acc";
  for (std::size_t l = 0; l < depth; ++l) os << ",alpha_" << l;
  os << '\n' << std::setprecision(10);
  for (const auto& e : log.epochs) {
    os << e.epoch << ',' << e.loss << ',' << e.id_loss << ',' << e.triplet_loss << ',' << e.center_loss << ','
       << e.train_acc;
    for (double a : e.alphas) os << ',' << a;
    os << '\n';
  }
}

EmbeddingSet extract_embeddings(ToyModel& model, const SynthDataset& data, std::span<const std::size_t> indices,
                                Role role) {
  const BNMode previous = model.mode();
  model.set_mode(BNMode::Evaluation);
  EmbeddingSet set;
  set.role = role;
  const std::size_t c = model.config().embed_dim;
  set.vectors = Tensor({std::max<std::size_t>(indices.size(), 1), c});
  constexpr std::size_t chunk = 32;
  std::vector<Tensor> images;
  for (std::size_t start = 0; start < indices.size(); start += chunk) {
    images.clear();
    const std::size_t stop = std::min(indices.size(), start + chunk);
    for (std::size_t i = start; i < stop; ++i) images.push_back(data.samples[indices[i]].image);
    Tape tape;
    auto out = model.forward(tape, images);
    const Tensor& e = out.embeddings.value();
    std::copy(e.data().begin(), e.data().end(), set.vectors.raw() + start * c);
  }
  for (std::size_t i : indices) {
    set.identities.push_back(data.samples[i].identity);
    set.cameras.push_back(data.samples[i].camera);
  }
  model.set_mode(previous);
  return set;
}

}  // namespace pga
