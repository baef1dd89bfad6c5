#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "pga/app.hpp"

using namespace pga;

TEST(RunConfig, ParsesKeyValueLines) {
  RunConfig c;
  apply_config_text(c, "# comment line\n\ndepth = 3  # trailing comment\nneighbors=eight\nlr=0.002\n"
                       "self_loops=true\nbench_grids=4x4, 8x2\nsweep_neighbors=four,full\nmetric=cosine\n");
  EXPECT_EQ(c.depth, 3u);
  EXPECT_EQ(c.neighbors, GraphKind::Eight);
  EXPECT_EQ(c.adam.lr, 0.002);
  EXPECT_TRUE(c.self_loops);
  EXPECT_EQ(c.bench_grids, (std::vector<std::pair<std::size_t, std::size_t>>{{4, 4}, {8, 2}}));
  EXPECT_EQ(c.sweep_neighbors, (std::vector<GraphKind>{GraphKind::Four, GraphKind::FullyConnected}));
  EXPECT_EQ(c.metric, DistanceMetric::Cosine);
}

TEST(RunConfig, ErrorsNameKeyAndLine) {
  RunConfig c;
  try {
    apply_config_text(c, "depth=2\nlayers=3\n", "run.cfg");
    FAIL() << "unknown key accepted";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("run.cfg:2"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("layers"), std::string::npos) << e.what();
  }
  EXPECT_THROW(apply_config_text(c, "depth=two\n"), ConfigError);
  EXPECT_THROW(apply_config_text(c, "depth=-1\n"), ConfigError);
  EXPECT_THROW(apply_config_text(c, "depth=2.5\n"), ConfigError);
  EXPECT_THROW(apply_config_text(c, "lr=abc\n"), ConfigError);
  EXPECT_THROW(apply_config_text(c, "lr=inf\n"), ConfigError);
  EXPECT_THROW(apply_config_text(c, "self_loops=maybe\n"), ConfigError);
  EXPECT_THROW(apply_config_text(c, "neighbors=six\n"), ConfigError);
  EXPECT_THROW(apply_config_text(c, "bench_grids=4by4\n"), ConfigError);
  EXPECT_THROW(apply_config_text(c, "just words\n"), ConfigError);
  EXPECT_THROW(c.set("threads", "4"), ConfigError);
}

TEST(RunConfig, EntriesRoundTrip) {
  RunConfig c;
  c.seed = 42;
  c.depth = 1;
  c.adam.lr = 1.0 / 3.0;
  c.loss.beta = 0.1;
  c.sweep_depths = {0, 3};
  c.corrupt_grid = "3x3:eight";
  std::ostringstream os;
  write_config(os, c);
  RunConfig back;
  apply_config_text(back, os.str());
  EXPECT_EQ(back.entries(), c.entries());
  EXPECT_EQ(back.adam.lr, 1.0 / 3.0);

  std::set<std::string> keys;
  for (const auto& [k, v] : c.entries()) keys.insert(k);
  EXPECT_EQ(keys.size(), RunConfig::known_keys().size());
}

TEST(RunConfig, DefaultsValidate) {
  const RunConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.adam.lr, 1e-3);
  EXPECT_EQ(c.adam.weight_decay, 5e-4);
  EXPECT_EQ(c.loss.margin, 0.3);
  EXPECT_EQ(c.loss.smoothing, 0.1);
  EXPECT_EQ(c.loss.beta, 5e-4);
  EXPECT_EQ(c.model_config(0).num_classes, c.identities);
}

TEST(RunConfig, CrossFieldValidation) {
  auto invalid = [](const std::string& text) {
    RunConfig c;
    apply_config_text(c, text);
    EXPECT_THROW(c.validate(), ConfigError) << text;
  };
  invalid("batch_p=1");
  invalid("batch_p=9");
  invalid("lr=0");
  invalid("smoothing=1");
  invalid("margin=-1");
  invalid("identities=1");
  invalid("target_accuracy=1.5");
  invalid("bench_repeats=2");
  invalid("sweep_seeds=0");
  invalid("corrupt_grid=4x4");
  invalid("corrupt_grid=4x4:nine");
  invalid("channels=0");
}

TEST(RunConfig, FileAndRunDirectory) {
  const auto dir = std::filesystem::temp_directory_path() / "pga_config_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir / "a.cfg");
    os << "epochs=7\nout=" << (dir / "runs").string() << "\n";
  }
  RunConfig c;
  apply_config_file(c, dir / "a.cfg");
  EXPECT_EQ(c.epochs, 7u);
  EXPECT_THROW(apply_config_file(c, dir / "missing.cfg"), ConfigError);

  const auto first = make_run_dir(c, "train");
  const auto second = make_run_dir(c, "train");
  EXPECT_NE(first, second);
  EXPECT_EQ(first.filename().string().rfind("train-", 0), 0u);
  RunConfig echoed;
  apply_config_file(echoed, first / "config.txt");
  EXPECT_EQ(echoed.entries(), c.entries());
  std::filesystem::remove_all(dir);
}
