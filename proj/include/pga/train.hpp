#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "pga/dataset.hpp"
#include "pga/losses.hpp"
#include "pga/model.hpp"
#include "pga/optim.hpp"
#include "pga/retrieval.hpp"

namespace pga {

struct TrainConfig {
  std::size_t epochs = 200;
  /// PK sampling: P identities x K instances per batch.
  std::size_t batch_p = 4;
  std::size_t batch_k = 4;
  LossConfig loss;
  /// The toy network trains for ~1200 steps; 3e-4 leaves it short of converged.
  AdamConfig adam{.lr = 1e-3};
  std::uint64_t seed = 0;
  /// Stop after the first epoch whose train accuracy reaches this value; 0 disables.
  double target_accuracy = 0.0;
};

struct EpochLog {
  std::size_t epoch = 0;
  double loss = 0.0;
  double id_loss = 0.0;
  double triplet_loss = 0.0;
  double center_loss = 0.0;
  double train_acc = 0.0;
  std::vector<double> alphas;
};

/// Row 0 holds the losses of the untrained model on one pass of batches.
struct TrainLog {
  std::vector<EpochLog> epochs;
};

/// PK batches covering the training split about once per epoch.
std::vector<std::vector<std::size_t>> pk_batches(const SynthDataset& data, std::size_t p, std::size_t k,
                                                 std::mt19937_64& rng);

TrainLog train(ToyModel& model, const SynthDataset& data, const TrainConfig& config);

/// Header `epoch,loss,id_loss,triplet_loss,center_loss,train_acc,alpha_0..alpha_{L-1}`.
void write_train_log_csv(std::ostream& os, const TrainLog& log, std::size_t depth);

/// Evaluation-mode embeddings (post-neck) of the chosen samples. The model's
/// previous BN mode is restored afterwards.
EmbeddingSet extract_embeddings(ToyModel& model, const SynthDataset& data, std::span<const std::size_t> indices,
                                Role role);

}  // namespace pga
