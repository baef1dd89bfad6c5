#include "pga/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

#include "pga/simd/kernels.hpp"

namespace pga {

DistanceMetric parse_distance_metric(std::string_view text) {
  if (text == "euclidean") return DistanceMetric::Euclidean;
  if (text == "cosine") return DistanceMetric::Cosine;
  throw std::invalid_argument("unknown distance metric '" + std::string(text) + "'");
}

void EmbeddingSet::validate() const {
  if (vectors.rank() != 2) throw ShapeError("embedding set vectors must be a matrix");
  if (vectors.dim(0) != identities.size() || identities.size() != cameras.size()) {
    throw ShapeError("embedding set arrays disagree in length");
  }
}

double RankingResult::cmc_at(std::size_t rank) const {
  if (cmc.empty() || rank == 0) return 0.0;
  return cmc[std::min(rank, cmc.size()) - 1];
}

Tensor pairwise_distances(const EmbeddingSet& query, const EmbeddingSet& gallery, DistanceMetric metric) {
  query.validate();
  gallery.validate();
  const std::size_t nq = query.size(), ng = gallery.size(), c = query.vectors.dim(1);
  if (gallery.vectors.dim(1) != c) {
    throw ShapeError("query dim " + std::to_string(c) + " vs gallery dim " + std::to_string(gallery.vectors.dim(1)));
  }
  const auto& k = simd::active_kernels();
  auto norms = [&](const EmbeddingSet& s, const char* what) {
    std::vector<double> out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double* v = s.vectors.raw() + i * c;
      out[i] = std::sqrt(k.dot(c, v, v));
      if (metric == DistanceMetric::Cosine && out[i] == 0.0) {
        throw std::invalid_argument(std::string("cosine distance undefined for zero vector: ") + what + " sample " +
                                    std::to_string(i));
      }
    }
    return out;
  };
  const auto qn = norms(query, "query");
  const auto gn = norms(gallery, "gallery");

  Tensor d({nq, ng});
  for (std::size_t i = 0; i < nq; ++i) {
    const double* a = query.vectors.raw() + i * c;
    for (std::size_t j = 0; j < ng; ++j) {
      const double* b = gallery.vectors.raw() + j * c;
      if (metric == DistanceMetric::Cosine) {
        d.at(i, j) = 1.0 - k.dot(c, a, b) / (qn[i] * gn[j]);
      } else {
        double s = 0.0;
        for (std::size_t t = 0; t < c; ++t) s += (a[t] - b[t]) * (a[t] - b[t]);
        d.at(i, j) = std::sqrt(s);
      }
    }
  }
  return d;
}

RankingResult evaluate_distances(const Tensor& distances, std::span<const int> query_ids,
                                 std::span<const int> query_cams, std::span<const int> gallery_ids,
                                 std::span<const int> gallery_cams) {
  if (distances.rank() != 2 || distances.dim(0) != query_ids.size() || distances.dim(1) != gallery_ids.size() ||
      query_cams.size() != query_ids.size() || gallery_cams.size() != gallery_ids.size()) {
    throw ShapeError("evaluate: distance matrix " + shape_str(distances.shape()) + " does not match the labels");
  }
  const std::size_t nq = query_ids.size(), ng = gallery_ids.size();
  RankingResult result;
  result.rankings.resize(nq);
  result.average_precision.assign(nq, std::numeric_limits<double>::quiet_NaN());
  std::vector<std::size_t> first_hit(ng + 1, 0);
  double ap_sum = 0.0;

  std::vector<std::size_t> order(ng);
  for (std::size_t q = 0; q < nq; ++q) {
    std::iota(order.begin(), order.end(), 0);
    const double* row = distances.raw() + q * ng;
    std::stable_sort(order.begin(), order.end(), [row](std::size_t a, std::size_t b) { return row[a] < row[b]; });

    auto& ranking = result.rankings[q];
    std::size_t hits = 0, position = 0, first = 0;
    double precision_sum = 0.0;
    for (std::size_t g : order) {
      const bool same_id = gallery_ids[g] == query_ids[q];
      if (same_id && gallery_cams[g] == query_cams[q]) continue;
      ranking.push_back(g);
      ++position;
      if (same_id) {
        ++hits;
        if (first == 0) first = position;
        precision_sum += static_cast<double>(hits) / static_cast<double>(position);
      }
    }
    if (hits == 0) {
      ++result.skipped_queries;
      continue;
    }
    ++result.valid_queries;
    result.average_precision[q] = precision_sum / static_cast<double>(hits);
    ap_sum += result.average_precision[q];
    ++first_hit[first];
  }
  if (result.valid_queries == 0) throw std::invalid_argument("evaluate: no query has a valid gallery match");

  result.mean_ap = ap_sum / static_cast<double>(result.valid_queries);
  result.cmc.assign(std::max<std::size_t>(ng, 1), 0.0);
  std::size_t cumulative = 0;
  for (std::size_t r = 1; r <= result.cmc.size(); ++r) {
    cumulative += r <= ng ? first_hit[r] : 0;
    result.cmc[r - 1] = static_cast<double>(cumulative) / static_cast<double>(result.valid_queries);
  }
  return result;
}

RankingResult evaluate(const EmbeddingSet& query, const EmbeddingSet& gallery, DistanceMetric metric) {
  const Tensor d = pairwise_distances(query, gallery, metric);
  return evaluate_distances(d, query.identities, query.cameras, gallery.identities, gallery.cameras);
}

void write_results_csv(std::ostream& os, const RankingResult& result) {
  os << "metric,value\n" << std::fixed << std::setprecision(6);
  os << "mAP," << result.mean_ap << '\n';
  for (std::size_t r : {1, 5, 10}) os << "CMC@" << r << ',' << result.cmc_at(r) << '\n';
  os.unsetf(std::ios::fixed);
}

}  // namespace pga
