#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "pga/tensor.hpp"

namespace pga {

enum class Role { Query, Gallery };
enum class DistanceMetric { Euclidean, Cosine };

DistanceMetric parse_distance_metric(std::string_view text);

struct EmbeddingSet {
  /// (num samples, C)
  Tensor vectors;
  std::vector<int> identities;
  std::vector<int> cameras;
  Role role = Role::Query;

  std::size_t size() const { return identities.size(); }
  void validate() const;
};

struct RankingResult {
  /// Per query: gallery indices by ascending distance, excluded entries removed.
  std::vector<std::vector<std::size_t>> rankings;
  /// Per query; NaN for queries without any valid match.
  std::vector<double> average_precision;
  /// cmc[r - 1] = fraction of valid queries with a match within the top r.
  std::vector<double> cmc;
  double mean_ap = 0.0;
  std::size_t valid_queries = 0;
  std::size_t skipped_queries = 0;

  /// CMC at rank r (1-based), clamped to the last rank.
  double cmc_at(std::size_t rank) const;
};

/// (Q, G) distances. Cosine distance is 1 - cosine similarity and throws
/// std::invalid_argument naming a zero-norm sample.
Tensor pairwise_distances(const EmbeddingSet& query, const EmbeddingSet& gallery, DistanceMetric metric);

/// Ranks the gallery for each query by ascending distance (ties: lower
/// gallery index first). Gallery entries sharing both identity and camera
/// with the query are dropped. Queries without a remaining match are
/// skipped and counted; throws std::invalid_argument if every query is skipped.
RankingResult evaluate_distances(const Tensor& distances, std::span<const int> query_ids,
                                 std::span<const int> query_cams, std::span<const int> gallery_ids,
                                 std::span<const int> gallery_cams);

RankingResult evaluate(const EmbeddingSet& query, const EmbeddingSet& gallery, DistanceMetric metric);

/// `metric,value` rows for mAP and CMC at ranks 1, 5 and 10.
void write_results_csv(std::ostream& os, const RankingResult& result);

}  // namespace pga
