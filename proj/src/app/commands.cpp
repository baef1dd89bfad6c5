#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>

#include "pga/app.hpp"
#include "pga/checkpoint.hpp"
#include "pga/verify.hpp"

namespace pga {

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

}  // namespace

RunOutcome run_bench_graphgen(const RunConfig& config, std::ostream& log) {
  config.validate();
  RunOutcome outcome;
  outcome.run_dir = make_run_dir(config, "bench-graphgen");
  std::vector<BenchRow> rows;
  for (NeighborMode mode : {NeighborMode::Four, NeighborMode::Eight, NeighborMode::TwoChannel}) {
    std::vector<GridSpec> specs;
    // the channel chain is timed at the same node count as the pixel grid
    for (const auto& [h, w] : config.bench_grids) {
      specs.push_back(mode == NeighborMode::TwoChannel ? GridSpec{1, 1, h * w} : GridSpec{h, w, 1});
    }
    const auto part = bench_generation(specs, mode, config.bench_repeats);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  std::stable_sort(rows.begin(), rows.end(), [](const BenchRow& a, const BenchRow& b) { return a.n < b.n; });
  auto os = open_output(outcome.run_dir / "bench_graphgen.csv");
  write_bench_csv(os, rows);
  write_bench_csv(log, rows);
  log << "wrote " << (outcome.run_dir / "bench_graphgen.csv").string() << '\n';
  return outcome;
}

RunOutcome run_verify(const RunConfig& config, std::ostream& log) {
  config.validate();
  RunOutcome outcome;
  outcome.run_dir = make_run_dir(config, "verify");
  GraphSweepOptions graph_options;
  graph_options.max_side = config.verify_max_side;
  if (!config.corrupt_grid.empty()) graph_options.corrupt = config.corrupt_grid;

  std::vector<CheckResult> results = verify_graph_generation(graph_options);
  results.push_back(verify_attention_invariants(config.seed, 100));
  results.push_back(verify_locality(config.seed));
  const auto grads = verify_gradients(config.seed, config.gradcheck_seeds);
  results.insert(results.end(), grads.begin(), grads.end());

  auto os = open_output(outcome.run_dir / "verify.csv");
  write_checks_csv(os, results);
  std::size_t failed = 0;
  for (const auto& r : results) {
    if (!r.passed) {
      ++failed;
      log << "FAIL " << r.name << ": " << r.detail << '\n';
    }
  }
  log << results.size() - failed << '/' << results.size() << " checks passed; details in "
      << (outcome.run_dir / "verify.csv").string() << '\n';
  outcome.exit_code = failed == 0 ? kExitOk : kExitFailure;
  return outcome;
}

TrainedRun train_and_evaluate(const RunConfig& config, const ModelConfig& model_config, std::uint64_t seed) {
  const SynthDataset data = make_synth_dataset(config.dataset_config(seed));
  TrainedRun run;
  run.model = std::make_unique<ToyModel>(model_config);
  run.log = train(*run.model, data, config.train_config(seed));
  if (run.log.epochs.size() > 1) {
    const auto q = data.indices(Split::Query);
    const auto g = data.indices(Split::Gallery);
    run.ranking = evaluate(extract_embeddings(*run.model, data, q, Role::Query),
                           extract_embeddings(*run.model, data, g, Role::Gallery), config.metric);
  }
  return run;
}

RunOutcome run_train(const RunConfig& config, std::ostream& log) {
  config.validate();
  RunOutcome outcome;
  outcome.run_dir = make_run_dir(config, "train");
  const TrainedRun run = train_and_evaluate(config, config.model_config(config.seed), config.seed);

  {
    auto os = open_output(outcome.run_dir / "train_log.csv");
    write_train_log_csv(os, run.log, config.depth);
  }
  save_checkpoint(outcome.run_dir / "checkpoint.txt", *run.model);
  const EpochLog& last = run.log.epochs.back();
  log << "epochs run: " << last.epoch << ", final loss " << last.loss << ", train accuracy " << last.train_acc << '\n';
  if (run.ranking) {
    auto os = open_output(outcome.run_dir / "results.csv");
    write_results_csv(os, *run.ranking);
    write_results_csv(log, *run.ranking);
    if (run.ranking->skipped_queries > 0) log << run.ranking->skipped_queries << " queries had no valid match\n";
  }
  log << "wrote " << outcome.run_dir.string() << '\n';
  return outcome;
}

RunOutcome run_sweep(const RunConfig& config, const std::string& axis, std::ostream& log) {
  if (axis != "layers" && axis != "neighbors") {
    throw ConfigError("--axis must be layers or neighbors, got '" + axis + "'");
  }
  config.validate();
  if (config.epochs == 0) throw ConfigError("a sweep needs epochs >= 1 to evaluate");
  const bool layers = axis == "layers";

  std::vector<std::pair<std::string, ModelConfig>> points;
  if (layers) {
    for (std::size_t d : config.sweep_depths) {
      ModelConfig m = config.model_config(0);
      m.depth = d;
      points.emplace_back(std::to_string(d), m);
    }
  } else {
    for (GraphKind g : config.sweep_neighbors) {
      ModelConfig m = config.model_config(0);
      m.graph = g;
      points.emplace_back(std::string(to_string(g)), m);
    }
  }
  for (auto& [label, m] : points) {
    try {
      m.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("sweep point " + label + ": " + e.what());
    }
  }

  RunOutcome outcome;
  outcome.run_dir = make_run_dir(config, "sweep-" + axis);
  auto detail = open_output(outcome.run_dir / "sweep.csv");
  auto summary = open_output(outcome.run_dir / "sweep_summary.csv");
  detail << "axis,value,seed,mAP,CMC@1,CMC@5,CMC@10,train_acc\n" << std::fixed << std::setprecision(6);
  summary << "axis,value,seeds,mean_mAP,mean_CMC@1,mean_CMC@5,mean_CMC@10,mean_train_acc\n"
          << std::fixed << std::setprecision(6);
  log << std::fixed << std::setprecision(4);

  for (auto& [label, m] : points) {
    double map = 0, c1 = 0, c5 = 0, c10 = 0, acc = 0;
    for (std::size_t s = 0; s < config.sweep_seeds; ++s) {
      const std::uint64_t seed = config.seed + s;
      m.seed = seed;
      const TrainedRun run = train_and_evaluate(config, m, seed);
      const RankingResult& r = *run.ranking;
      const double a = run.log.epochs.back().train_acc;
      detail << axis << ',' << label << ',' << seed << ',' << r.mean_ap << ',' << r.cmc_at(1) << ',' << r.cmc_at(5)
             << ',' << r.cmc_at(10) << ',' << a << '\n';
      map += r.mean_ap;
      c1 += r.cmc_at(1);
      c5 += r.cmc_at(5);
      c10 += r.cmc_at(10);
      acc += a;
    }
    const double n = static_cast<double>(config.sweep_seeds);
    summary << axis << ',' << label << ',' << config.sweep_seeds << ',' << map / n << ',' << c1 / n << ',' << c5 / n
            << ',' << c10 / n << ',' << acc / n << '\n';
    log << axis << '=' << label << "  mAP " << map / n << "  CMC@1 " << c1 / n << '\n';
  }
  log << "wrote " << outcome.run_dir.string() << '\n';
  return outcome;
}

RunOutcome run_dump_attention(const RunConfig& config, const std::filesystem::path& checkpoint, std::size_t sample,
                              std::ostream& log) {
  config.validate();
  ToyModel model = load_checkpoint(checkpoint);
  const ModelConfig& mc = model.config();
  if (mc.in_channels != config.in_channels || mc.height != config.height || mc.width != config.width) {
    throw ConfigError("checkpoint input shape differs from the configured data shape");
  }
  if (mc.depth == 0) throw ConfigError("checkpoint has no PGA layers to dump");
  const SynthDataset data = make_synth_dataset(config.dataset_config(config.seed));
  if (sample >= data.samples.size()) {
    throw ConfigError("--sample " + std::to_string(sample) + " is out of range (dataset has " +
                      std::to_string(data.samples.size()) + " samples)");
  }

  RunOutcome outcome;
  outcome.run_dir = make_run_dir(config, "dump-attention");
  model.set_mode(BNMode::Evaluation);
  Tape tape;
  const Tensor batch[] = {data.samples[sample].image};
  const auto out = model.forward(tape, batch, true);
  const Adjacency& adj = model.stack().layers().front().adjacency();
  for (std::size_t l = 0; l < out.attentions.size(); ++l) {
    const Tensor& a = out.attentions[l].value();
    const std::size_t n = a.dim(0);
    const auto path = outcome.run_dir / ("attention_layer" + std::to_string(l) + ".csv");
    auto os = open_output(path);
    os << "row,col,weight\n" << std::setprecision(17);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (adj.has_edge(i, j) || a.at(i, j) != 0.0) os << i << ',' << j << ',' << a.at(i, j) << '\n';
      }
    }
    log << "layer " << l << " (alpha " << model.stack().layers()[l].alpha() << "): " << path.string() << '\n';
  }
  return outcome;
}

}  // namespace pga
