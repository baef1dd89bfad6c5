#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "pga/app.hpp"

namespace {

struct SharedFlags {
  std::string config_path;
  std::string seed;
  std::string out;
  std::vector<std::string> overrides;
};

void add_shared(CLI::App* cmd, SharedFlags& flags) {
  cmd->add_option("--config", flags.config_path, "key=value config file");
  cmd->add_option("--seed", flags.seed, "run seed");
  cmd->add_option("--out", flags.out, "output directory for run folders");
  cmd->add_option("--set", flags.overrides, "override one key, as key=value (repeatable)");
}

// file first, then explicit flags, so flags win
pga::RunConfig resolve(const SharedFlags& flags) {
  pga::RunConfig config;
  if (!flags.config_path.empty()) pga::apply_config_file(config, flags.config_path);
  for (const auto& kv : flags.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw pga::ConfigError("--set expects key=value, got '" + kv + "'");
    config.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!flags.seed.empty()) config.set("seed", flags.seed);
  if (!flags.out.empty()) config.set("out", flags.out);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pixel-wise graph attention: graph generation, verification, toy training and ablations"};
  app.require_subcommand(1);

  SharedFlags flags;
  auto* bench = app.add_subcommand("bench-graphgen", "time the row-slice generator against the O(N^2) oracle");
  auto* verify = app.add_subcommand("verify", "graph oracle equivalence, attention invariants and gradient checks");
  auto* train = app.add_subcommand("train", "train the toy network and write log, checkpoint and results");
  auto* sweep = app.add_subcommand("sweep", "depth or neighbor-mode ablation over several seeds");
  auto* dump = app.add_subcommand("dump-attention", "write per-layer attention matrices for one sample");
  for (auto* cmd : {bench, verify, train, sweep, dump}) add_shared(cmd, flags);

  std::string axis;
  sweep->add_option("--axis", axis, "layers or neighbors")->required();
  std::string checkpoint;
  std::size_t sample = 0;
  dump->add_option("--checkpoint", checkpoint, "checkpoint.txt written by train")->required();
  dump->add_option("--sample", sample, "dataset sample index");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? pga::kExitOk : pga::kExitConfig;
  }

  try {
    const pga::RunConfig config = resolve(flags);
    pga::RunOutcome outcome;
    if (*bench) outcome = pga::run_bench_graphgen(config, std::cout);
    else if (*verify) outcome = pga::run_verify(config, std::cout);
    else if (*train) outcome = pga::run_train(config, std::cout);
    else if (*sweep) outcome = pga::run_sweep(config, axis, std::cout);
    else outcome = pga::run_dump_attention(config, checkpoint, sample, std::cout);
    return outcome.exit_code;
  } catch (const pga::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return pga::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return pga::kExitFailure;
  }
}
