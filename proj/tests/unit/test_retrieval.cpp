#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "ap_oracle.hpp"
#include "pga/retrieval.hpp"

using namespace pga;

using oracle::Instance;
using oracle::random_instance;
using oracle::run;

TEST(Retrieval, HandAveragePrecision) {
  // relevance [1, 0, 1] -> (1/1 + 2/3) / 2
  Instance x{Tensor::matrix({{0.1, 0.2, 0.3}}), {0}, {0}, {0, 1, 0}, {1, 1, 1}};
  const RankingResult r = run(x);
  EXPECT_NEAR(r.mean_ap, 0.8333333333, 1e-9);
  EXPECT_NEAR(r.average_precision[0], 5.0 / 6.0, 1e-15);
  EXPECT_EQ(r.cmc_at(1), 1.0);
}

TEST(Retrieval, PerfectRanking) {
  Instance x{Tensor::matrix({{0.1, 0.2, 0.7, 0.9}, {0.8, 0.9, 0.1, 0.2}}), {0, 1}, {0, 0}, {0, 0, 1, 1},
             {1, 1, 1, 1}};
  const RankingResult r = run(x);
  EXPECT_EQ(r.mean_ap, 1.0);
  for (std::size_t k = 1; k <= 4; ++k) EXPECT_EQ(r.cmc_at(k), 1.0);
}

TEST(Retrieval, SameCameraMatchesAreExcluded) {
  // the nearest gallery entry is the query's own camera view and is dropped
  Instance x{Tensor::matrix({{0.1, 0.2, 0.3}}), {0}, {0}, {0, 1, 0}, {0, 1, 1}};
  const RankingResult r = run(x);
  ASSERT_EQ(r.rankings[0], (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(r.mean_ap, 0.5);
  EXPECT_EQ(r.cmc_at(1), 0.0);
  EXPECT_EQ(r.cmc_at(2), 1.0);
  EXPECT_EQ(r.cmc_at(10), 1.0);
}

TEST(Retrieval, QueriesWithoutMatchAreSkipped) {
  Instance x{Tensor::matrix({{0.1, 0.2}, {0.3, 0.1}}), {0, 5}, {0, 0}, {0, 1}, {1, 1}};
  const RankingResult r = run(x);
  EXPECT_EQ(r.valid_queries, 1u);
  EXPECT_EQ(r.skipped_queries, 1u);
  EXPECT_TRUE(std::isnan(r.average_precision[1]));
  EXPECT_EQ(r.mean_ap, 1.0);
  Instance none{Tensor::matrix({{0.1}}), {0}, {0}, {0}, {0}};
  EXPECT_THROW(run(none), std::invalid_argument);
}

TEST(Retrieval, TiesBreakToLowerGalleryIndex) {
  Instance x{Tensor::matrix({{0.5, 0.5, 0.5}}), {0}, {0}, {1, 0, 2}, {1, 1, 1}};
  const RankingResult r = run(x);
  EXPECT_EQ(r.rankings[0], (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(r.mean_ap, 0.5);
}

TEST(Retrieval, MatchesBruteForceOracle) {
  std::mt19937_64 rng(2024);
  for (int inst = 0; inst < 50; ++inst) {
    const Instance x = random_instance(rng, 20, 50, inst % 2 == 1);
    EXPECT_LE(oracle::max_deviation(x), 1e-12) << "instance " << inst;
  }
}

TEST(Retrieval, OracleAgreesWithHandExample) {
  const Instance x{Tensor::matrix({{0.1, 0.2, 0.3}}), {0}, {0}, {0, 1, 0}, {1, 1, 1}};
  EXPECT_NEAR(oracle::query(x, 0).ap, 5.0 / 6.0, 1e-15);
  EXPECT_EQ(oracle::query(x, 0).first_hit, 1u);
}

TEST(Retrieval, CmcIsMonotoneAndBounded) {
  std::mt19937_64 rng(7);
  for (int inst = 0; inst < 20; ++inst) {
    const RankingResult r = run(random_instance(rng, 10, 30, false));
    for (std::size_t k = 1; k < r.cmc.size(); ++k) EXPECT_LE(r.cmc[k - 1], r.cmc[k]);
    EXPECT_GE(r.cmc.front(), 0.0);
    EXPECT_LE(r.cmc.back(), 1.0);
  }
}

TEST(Retrieval, InvariantUnderMonotoneDistanceScaling) {
  std::mt19937_64 rng(8);
  Instance x = random_instance(rng, 10, 30, false);
  const RankingResult a = run(x);
  for (std::size_t i = 0; i < x.d.numel(); ++i) x.d[i] *= 2.0;
  const RankingResult b = run(x);
  EXPECT_EQ(a.rankings, b.rankings);
  EXPECT_EQ(a.mean_ap, b.mean_ap);
  EXPECT_EQ(a.cmc, b.cmc);
}

TEST(Retrieval, PairwiseDistances) {
  EmbeddingSet q{Tensor::matrix({{0, 0}, {1, 0}}), {0, 1}, {0, 0}, Role::Query};
  EmbeddingSet g{Tensor::matrix({{3, 4}, {0, 2}}), {0, 1}, {1, 1}, Role::Gallery};
  const Tensor e = pairwise_distances(q, g, DistanceMetric::Euclidean);
  EXPECT_NEAR(e.at(0, 0), 5.0, 1e-12);
  EXPECT_NEAR(e.at(1, 1), std::sqrt(5.0), 1e-12);
  const Tensor c = pairwise_distances(g, g, DistanceMetric::Cosine);
  EXPECT_NEAR(c.at(0, 0), 0.0, 1e-12);
  EXPECT_NEAR(c.at(0, 1), 1.0 - 4.0 / 5.0, 1e-12);
  // query 0 is the zero vector
  EXPECT_THROW(pairwise_distances(q, g, DistanceMetric::Cosine), std::invalid_argument);
  EXPECT_EQ(parse_distance_metric("cosine"), DistanceMetric::Cosine);
  EXPECT_THROW(parse_distance_metric("manhattan"), std::invalid_argument);
}

TEST(Retrieval, ResultsCsv) {
  Instance x{Tensor::matrix({{0.1, 0.2, 0.3}}), {0}, {0}, {0, 1, 0}, {1, 1, 1}};
  std::ostringstream os;
  write_results_csv(os, run(x));
  const std::string s = os.str();
  EXPECT_EQ(s.rfind("metric,value\n", 0), 0u);
  EXPECT_NE(s.find("mAP,"), std::string::npos);
  EXPECT_NE(s.find("CMC@1,"), std::string::npos);
  EXPECT_NE(s.find("CMC@5,"), std::string::npos);
  EXPECT_NE(s.find("CMC@10,"), std::string::npos);
}
