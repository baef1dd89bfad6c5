#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pga/grid_graph.hpp"

// Self-checks shared by the `verify` command and the acceptance suite.

namespace pga {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct GraphSweepOptions {
  /// Every h, w in [1, max_side] is checked in all three modes.
  std::size_t max_side = 8;
  std::vector<std::pair<std::size_t, std::size_t>> spot_sizes{{16, 8}, {32, 16}};
  /// Fault injection: "<h>x<w>:<mode>" drops one edge from the fast result of that grid.
  std::optional<std::string> corrupt;
};

/// TwoChannel grids use c = h * w so every (h, w) pair exercises a chain.
std::string grid_label(std::size_t h, std::size_t w, NeighborMode mode);

/// Fast generator against the brute-force oracle (exact CSR equality), plus
/// symmetry, empty diagonal and the closed-form edge count. One result per grid.
std::vector<CheckResult> verify_graph_generation(const GraphSweepOptions& options);

/// Masked attention over random adjacencies and scores: rows with neighbors
/// sum to 1 within `tolerance`, off-support entries and empty rows are exactly 0.
CheckResult verify_attention_invariants(std::uint64_t seed, std::size_t instances, double tolerance = 1e-9);

/// Perturbs one pixel of a 4x4 map and runs 1..max_depth non-residual
/// Four-neighbor layers in evaluation mode. After L layers, outputs beyond
/// grid distance L must be bit-identical and the farthest change must sit at
/// distance exactly L.
CheckResult verify_locality(std::uint64_t seed, std::size_t max_depth = 3);

/// Finite-difference checks of every differentiable op, PGA layers, a depth-3
/// stack and the total loss, for seeds seed .. seed + seeds - 1. One result per
/// check name, holding the worst error over the seeds.
std::vector<CheckResult> verify_gradients(std::uint64_t seed, std::size_t seeds, double tolerance = 1e-4);

/// Header `check,status,detail`.
void write_checks_csv(std::ostream& os, const std::vector<CheckResult>& results);

}  // namespace pga
