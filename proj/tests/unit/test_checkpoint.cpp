#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include "pga/checkpoint.hpp"

using namespace pga;

namespace {

ModelConfig config() {
  ModelConfig m;
  m.in_channels = 2;
  m.height = 4;
  m.width = 3;
  m.embed_dim = 5;
  m.depth = 2;
  m.num_classes = 3;
  m.graph = GraphKind::Eight;
  m.value_projection = true;
  m.seed = 11;
  return m;
}

// A model whose running statistics are populated.
ToyModel warmed() {
  ToyModel model(config());
  std::mt19937_64 rng(5);
  const Tensor batch[] = {Tensor::normal({2, 4, 3}, rng), Tensor::normal({2, 4, 3}, rng)};
  Tape t;
  model.forward(t, batch);
  for (Parameter* p : model.parameters()) p->value = Tensor::normal(p->value.shape(), rng, 1.0 / 3.0);
  return model;
}

std::string saved(ToyModel& model) {
  std::ostringstream os;
  save_checkpoint(os, model);
  return os.str();
}

}  // namespace

TEST(Checkpoint, RoundTripIsBitExact) {
  ToyModel model = warmed();
  std::istringstream is(saved(model));
  ToyModel back = load_checkpoint(is);
  EXPECT_EQ(model_config_line(back.config()), model_config_line(model.config()));
  auto pa = model.parameters(), pb = back.parameters();
  ASSERT_EQ(pa.size(), pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i]->value, pb[i]->value) << pa[i]->name;
  auto ba = model.batchnorms(), bb = back.batchnorms();
  for (std::size_t i = 0; i < ba.size(); ++i) {
    EXPECT_EQ(ba[i]->running_mean, bb[i]->running_mean);
    EXPECT_EQ(ba[i]->running_var, bb[i]->running_var);
  }
  model.set_mode(BNMode::Evaluation);
  back.set_mode(BNMode::Evaluation);
  std::mt19937_64 rng(9);
  const Tensor x[] = {Tensor::normal({2, 4, 3}, rng)};
  Tape t1, t2;
  EXPECT_EQ(model.forward(t1, x).embeddings.value(), back.forward(t2, x).embeddings.value());
  EXPECT_EQ(saved(back), saved(model));
}

TEST(Checkpoint, FileRoundTrip) {
  ToyModel model = warmed();
  const auto path = std::filesystem::temp_directory_path() / "pga_checkpoint_test.txt";
  save_checkpoint(path, model);
  ToyModel back = load_checkpoint(path);
  EXPECT_EQ(saved(back), saved(model));
  std::filesystem::remove(path);
  EXPECT_THROW(load_checkpoint(path), std::runtime_error);
}

TEST(Checkpoint, ConfigLineRoundTrip) {
  const ModelConfig m = config();
  const ModelConfig back = parse_model_config_line(model_config_line(m));
  EXPECT_EQ(model_config_line(back), model_config_line(m));
  EXPECT_EQ(back.graph, GraphKind::Eight);
  EXPECT_TRUE(back.value_projection);
  EXPECT_EQ(back.seed, 11u);
}

TEST(Checkpoint, RejectsDamagedInput) {
  ToyModel model = warmed();
  const std::string good = saved(model);
  auto load = [](std::string text) {
    std::istringstream is(text);
    return load_checkpoint(is);
  };
  auto replace = [&](const std::string& from, const std::string& to) {
    std::string s = good;
    const auto at = s.find(from);
    EXPECT_NE(at, std::string::npos) << from;
    return s.replace(at, from.size(), to);
  };
  EXPECT_THROW(load(replace("PGACHECKPOINT 1", "PGACHECKPOINT 2")), std::runtime_error);
  EXPECT_THROW(load(replace("param stem.weight", "param stem.weights")), std::runtime_error);
  EXPECT_THROW(load(replace("\nend", "\n")), std::runtime_error);
  EXPECT_THROW(load(good.substr(0, good.size() / 2)), std::runtime_error);
  EXPECT_THROW(load(""), std::runtime_error);
  // drop the first parameter block entirely
  const auto first = good.find("\nparam ");
  const auto second = good.find("\nparam ", first + 1);
  EXPECT_THROW(load(good.substr(0, first) + good.substr(second)), std::runtime_error);
}
