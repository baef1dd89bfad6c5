#pragma once

#include <span>

#include "pga/autograd.hpp"

namespace pga {

struct LossConfig {
  /// Center-loss weight.
  double beta = 5e-4;
  /// Triplet hinge margin.
  double margin = 0.3;
  /// Label-smoothing mass spread uniformly over the classes.
  double smoothing = 0.1;

  void validate() const;
};

/// Mean cross-entropy of (B, K) logits (or a single (K) row) against
/// targets (1 - eps) * onehot + eps / K. Throws std::out_of_range on a bad label.
Var id_loss(Var logits, std::span<const int> labels, double smoothing);

/// Batch-hard triplet loss over (B, C) embeddings with Euclidean distances:
/// mean over anchors of max(0, margin + d(hardest positive) - d(hardest negative)).
/// Anchors lacking a positive or a negative are skipped; throws
/// std::invalid_argument when no anchor is usable.
Var triplet_loss(Var embeddings, std::span<const int> labels, double margin);

/// 0.5 * mean_i |e_i - c_{y_i}|^2 with centers (K, C).
Var center_loss(Var embeddings, Var centers, std::span<const int> labels);

struct LossTerms {
  Var total;
  Var id;
  Var triplet;
  Var center;
};

/// total = id + triplet + beta * center
LossTerms total_loss(Var logits, Var embeddings, Var centers, std::span<const int> labels, const LossConfig& cfg);

}  // namespace pga
