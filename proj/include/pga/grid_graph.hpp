#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pga {

using NodeId = std::uint32_t;

enum class NeighborMode { Four, Eight, TwoChannel };

std::string_view to_string(NeighborMode mode);
NeighborMode parse_neighbor_mode(std::string_view text);

/// Largest possible degree k in the given mode (4, 8 or 2).
std::size_t max_degree(NeighborMode mode);

struct GridSpec {
  std::size_t h = 1;
  std::size_t w = 1;
  std::size_t c = 1;

  void validate() const;
  /// h*w for the pixel modes, c for TwoChannel.
  std::size_t node_count(NeighborMode mode) const;
};

/// Parallel arrays of directed node pairs.
struct EdgeList {
  std::vector<NodeId> node;
  std::vector<NodeId> neighbor;

  std::size_t size() const { return node.size(); }
  void push(NodeId a, NodeId b) {
    node.push_back(a);
    neighbor.push_back(b);
  }
};

/// Boolean neighbor relation over n nodes in compressed-row form.
///
/// Columns within a row are strictly ascending. Graphs built by this module
/// are symmetric with an empty diagonal; with_self_loops() is the one
/// sanctioned way to put entries on the diagonal.
class Adjacency {
 public:
  Adjacency() : row_offsets_(1, 0) {}

  /// Validates offsets, range and per-row ordering; throws std::invalid_argument.
  static Adjacency from_csr(std::size_t n, std::vector<std::size_t> row_offsets, std::vector<NodeId> col_indices);

  std::size_t n() const { return row_offsets_.size() - 1; }
  /// Directed entry count, i.e. twice the undirected edge count for symmetric graphs.
  std::size_t num_edges() const { return col_indices_.size(); }

  std::span<const NodeId> neighbors(std::size_t i) const {
    return {col_indices_.data() + row_offsets_[i], col_indices_.data() + row_offsets_[i + 1]};
  }
  std::size_t degree(std::size_t i) const { return row_offsets_[i + 1] - row_offsets_[i]; }
  bool has_edge(std::size_t i, std::size_t j) const;

  const std::vector<std::size_t>& row_offsets() const { return row_offsets_; }
  const std::vector<NodeId>& col_indices() const { return col_indices_; }

  /// Row-major n*n view, 1 where an edge exists.
  std::vector<std::uint8_t> dense() const;
  EdgeList edges() const;

  bool is_symmetric() const;
  bool has_zero_diagonal() const;

  bool operator==(const Adjacency& other) const = default;

 private:
  friend Adjacency adjacency_from_pairs(const EdgeList& edges, std::size_t n);
  friend Adjacency oracle_adjacency(const GridSpec& spec, NeighborMode mode);
  friend Adjacency fully_connected(std::size_t n);
  friend Adjacency with_self_loops(const Adjacency& adjacency);

  std::vector<std::size_t> row_offsets_;
  std::vector<NodeId> col_indices_;
};

/// Deduplicated, symmetrized, row-sorted structure from node pairs.
/// Throws std::out_of_range naming the first id that is not below n.
Adjacency adjacency_from_pairs(const EdgeList& edges, std::size_t n);

/// Node pairs emitted by shifted row slices: one pass over the rows of the
/// id grid, appending left/right/down/up (and, in Eight mode, the four
/// diagonal) neighbors per row. No distances are computed.
EdgeList grid_edge_list(const GridSpec& spec, NeighborMode mode);

/// grid_edge_list followed by adjacency_from_pairs. O(k*h*w).
Adjacency generate_grid_graph(const GridSpec& spec, NeighborMode mode);

/// Brute-force reference: scans all node pairs and connects those at grid
/// distance exactly 1 (Manhattan for Four, Chebyshev for Eight, channel
/// index distance for TwoChannel). O(N^2).
Adjacency oracle_adjacency(const GridSpec& spec, NeighborMode mode);

/// Every off-diagonal pair connected.
Adjacency fully_connected(std::size_t n);

/// Copy with (i, i) added to every row.
Adjacency with_self_loops(const Adjacency& adjacency);

struct BenchRow {
  std::size_t n = 0;
  NeighborMode mode = NeighborMode::Four;
  double fast_seconds = 0.0;
  double oracle_seconds = 0.0;
  double ratio = 0.0;
};

/// Times generate_grid_graph against oracle_adjacency on each spec. Each
/// contender gets one discarded warm-up run, then the mean over `repeats`
/// runs is reported. Requires repeats >= 3.
std::vector<BenchRow> bench_generation(std::span<const GridSpec> sizes, NeighborMode mode, std::size_t repeats);

/// Header `n,mode,fast_seconds,oracle_seconds,ratio`; seconds with 6 decimals.
void write_bench_csv(std::ostream& os, std::span<const BenchRow> rows);

}  // namespace pga
