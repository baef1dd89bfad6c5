#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "pga/dataset.hpp"

using namespace pga;

TEST(SynthDataset, DeterministicPerSeed) {
  DatasetConfig cfg;
  cfg.seed = 7;
  const SynthDataset a = make_synth_dataset(cfg), b = make_synth_dataset(cfg);
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    EXPECT_EQ(a.samples[i].image, b.samples[i].image);
    EXPECT_EQ(a.samples[i].identity, b.samples[i].identity);
    EXPECT_EQ(a.samples[i].camera, b.samples[i].camera);
    EXPECT_EQ(a.samples[i].split, b.samples[i].split);
  }
  cfg.seed = 8;
  EXPECT_NE(make_synth_dataset(cfg).samples[0].image, a.samples[0].image);
}

TEST(SynthDataset, ShapesAndCounts) {
  const SynthDataset d = make_synth_dataset(DatasetConfig{});
  ASSERT_EQ(d.templates.size(), 8u);
  ASSERT_EQ(d.samples.size(), 160u);
  for (const Sample& s : d.samples) {
    EXPECT_EQ(s.image.shape(), (Shape{3, 16, 8}));
    EXPECT_GE(s.identity, 0);
    EXPECT_LT(s.identity, 8);
    EXPECT_TRUE(s.camera == 0 || s.camera == 1);
  }
}

TEST(SynthDataset, TemplatesAreDistinct) {
  const SynthDataset d = make_synth_dataset(DatasetConfig{});
  for (std::size_t i = 0; i < d.templates.size(); ++i) {
    for (std::size_t j = i + 1; j < d.templates.size(); ++j) {
      double sq = 0.0;
      for (std::size_t k = 0; k < d.templates[i].numel(); ++k) {
        const double diff = d.templates[i][k] - d.templates[j][k];
        sq += diff * diff;
      }
      EXPECT_GT(sq, 0.0) << i << " vs " << j;
    }
  }
}

TEST(SynthDataset, SplitSizesPerIdentity) {
  const SynthDataset d = make_synth_dataset(DatasetConfig{});
  std::map<int, std::map<Split, int>> counts;
  for (const Sample& s : d.samples) ++counts[s.identity][s.split];
  ASSERT_EQ(counts.size(), 8u);
  for (auto& [id, c] : counts) {
    EXPECT_EQ(c[Split::Train], 12) << id;
    EXPECT_EQ(c[Split::Query], 2) << id;
    EXPECT_EQ(c[Split::Gallery], 6) << id;
  }
  EXPECT_EQ(d.indices(Split::Train).size(), 96u);
  EXPECT_EQ(d.indices(Split::Query).size(), 16u);
  EXPECT_EQ(d.indices(Split::Gallery).size(), 48u);
}

TEST(SynthDataset, EveryQueryHasCrossCameraMatch) {
  for (std::size_t per_id : {4u, 5u, 20u, 33u}) {
    DatasetConfig cfg;
    cfg.per_id = per_id;
    cfg.seed = per_id;
    const SynthDataset d = make_synth_dataset(cfg);
    std::set<std::pair<int, int>> gallery;
    for (std::size_t g : d.indices(Split::Gallery)) gallery.insert({d.samples[g].identity, d.samples[g].camera});
    const auto queries = d.indices(Split::Query);
    EXPECT_EQ(queries.size(), cfg.identities * std::max<long>(1, std::lround(0.1 * static_cast<double>(per_id))));
    for (std::size_t q : queries) {
      const Sample& s = d.samples[q];
      EXPECT_TRUE(gallery.count({s.identity, 1 - s.camera})) << "per_id " << per_id << " sample " << q;
    }
  }
}

TEST(SynthDataset, NoiseLevelFollowsCamera) {
  DatasetConfig cfg;
  cfg.max_shift = 0;
  cfg.occlusion_prob = 0.0;
  cfg.noise_cam0 = 0.1;
  cfg.noise_cam1 = 1.0;
  const SynthDataset d = make_synth_dataset(cfg);
  double sq[2] = {0, 0};
  std::size_t n[2] = {0, 0};
  for (const Sample& s : d.samples) {
    const Tensor& t = d.templates[static_cast<std::size_t>(s.identity)];
    for (std::size_t k = 0; k < t.numel(); ++k) sq[s.camera] += (s.image[k] - t[k]) * (s.image[k] - t[k]);
    n[s.camera] += t.numel();
  }
  EXPECT_NEAR(std::sqrt(sq[0] / n[0]), 0.1, 0.01);
  EXPECT_NEAR(std::sqrt(sq[1] / n[1]), 1.0, 0.05);
}

TEST(SynthDataset, RejectsBadConfig) {
  DatasetConfig cfg;
  cfg.identities = 1;
  EXPECT_THROW(make_synth_dataset(cfg), std::invalid_argument);
  cfg = DatasetConfig{};
  cfg.per_id = 2;
  EXPECT_THROW(make_synth_dataset(cfg), std::invalid_argument);
  cfg = DatasetConfig{};
  cfg.occlusion_prob = 1.5;
  EXPECT_THROW(make_synth_dataset(cfg), std::invalid_argument);
}
