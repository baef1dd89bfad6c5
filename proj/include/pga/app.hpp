#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pga/dataset.hpp"
#include "pga/grid_graph.hpp"
#include "pga/model.hpp"
#include "pga/retrieval.hpp"
#include "pga/train.hpp"

namespace pga {

/// Bad configuration: unknown key, unparsable or out-of-range value. Maps to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitConfig = 2 };

/// Everything a command can be configured with. Loaded from `key=value`
/// lines (`#` starts a comment) and overridden by command-line flags.
struct RunConfig {
  std::uint64_t seed = 0;
  std::string out = "runs";

  // data
  std::size_t identities = 8;
  std::size_t per_id = 20;
  std::size_t in_channels = 3;
  std::size_t height = 16;
  std::size_t width = 8;
  std::size_t max_shift = 2;
  double noise_cam0 = 0.6;
  double noise_cam1 = 0.9;
  double occlusion_prob = 0.2;
  std::size_t occlusion_size = 4;

  // model
  std::size_t channels = 16;
  std::size_t reduced_dim = 0;
  std::size_t depth = 2;
  GraphKind neighbors = GraphKind::Four;
  SoftmaxMode softmax = SoftmaxMode::Masked;
  bool self_loops = false;
  bool value_projection = false;

  // training
  std::size_t epochs = 200;
  std::size_t batch_p = 4;
  std::size_t batch_k = 4;
  double target_accuracy = 0.0;
  LossConfig loss;
  AdamConfig adam = TrainConfig{}.adam;

  // evaluation
  DistanceMetric metric = DistanceMetric::Euclidean;

  // bench-graphgen
  std::vector<std::pair<std::size_t, std::size_t>> bench_grids{{16, 8}, {32, 16}, {64, 32}, {128, 64}};
  std::size_t bench_repeats = 5;

  // sweep
  std::vector<std::size_t> sweep_depths{0, 1, 2, 3};
  std::vector<GraphKind> sweep_neighbors{GraphKind::Four, GraphKind::Eight, GraphKind::TwoChannel,
                                         GraphKind::FullyConnected};
  std::size_t sweep_seeds = 3;

  // verify
  std::size_t verify_max_side = 8;
  std::size_t gradcheck_seeds = 10;
  /// Fault injection for verify, "<h>x<w>:<mode>"; empty disables.
  std::string corrupt_grid;

  /// Throws ConfigError for an unknown key or a bad value.
  void set(const std::string& key, const std::string& value);
  /// Canonical `key=value` lines in a fixed order; parses back to an equal config.
  std::vector<std::pair<std::string, std::string>> entries() const;
  /// Cross-field checks; throws ConfigError.
  void validate() const;

  DatasetConfig dataset_config(std::uint64_t run_seed) const;
  ModelConfig model_config(std::uint64_t run_seed) const;
  TrainConfig train_config(std::uint64_t run_seed) const;

  static std::vector<std::string> known_keys();
};

/// Applies `key=value` lines onto `config`. Blank lines and `#` comments are
/// ignored; errors name the line number.
void apply_config_text(RunConfig& config, const std::string& text, const std::string& origin = "config");
void apply_config_file(RunConfig& config, const std::filesystem::path& path);
void write_config(std::ostream& os, const RunConfig& config);

/// Creates `<out>/<command>-YYYYmmdd-HHMMSS` (with a numeric suffix if taken)
/// and writes the effective configuration to `config.txt` inside it.
std::filesystem::path make_run_dir(const RunConfig& config, const std::string& command);

struct RunOutcome {
  int exit_code = kExitOk;
  std::filesystem::path run_dir;
};

RunOutcome run_bench_graphgen(const RunConfig& config, std::ostream& log);
RunOutcome run_verify(const RunConfig& config, std::ostream& log);
RunOutcome run_train(const RunConfig& config, std::ostream& log);
/// `axis` is "layers" or "neighbors".
RunOutcome run_sweep(const RunConfig& config, const std::string& axis, std::ostream& log);
RunOutcome run_dump_attention(const RunConfig& config, const std::filesystem::path& checkpoint, std::size_t sample,
                              std::ostream& log);

/// One trained-and-evaluated configuration, shared by train and sweep.
struct TrainedRun {
  std::unique_ptr<ToyModel> model;
  TrainLog log;
  /// Empty when no epoch ran (the model has no running statistics yet).
  std::optional<RankingResult> ranking;
};

/// Trains on the synthetic data drawn with `seed` and evaluates query against gallery.
TrainedRun train_and_evaluate(const RunConfig& config, const ModelConfig& model_config, std::uint64_t seed);

}  // namespace pga
