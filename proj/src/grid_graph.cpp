#include "pga/grid_graph.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace pga {

std::string_view to_string(NeighborMode mode) {
  switch (mode) {
    case NeighborMode::Four: return "four";
    case NeighborMode::Eight: return "eight";
    case NeighborMode::TwoChannel: return "two_channel";
  }
  return "?";
}

NeighborMode parse_neighbor_mode(std::string_view text) {
  if (text == "four" || text == "4") return NeighborMode::Four;
  if (text == "eight" || text == "8") return NeighborMode::Eight;
  if (text == "two_channel" || text == "2" || text == "channel") return NeighborMode::TwoChannel;
  throw std::invalid_argument("unknown neighbor mode '" + std::string(text) + "'");
}

std::size_t max_degree(NeighborMode mode) {
  switch (mode) {
    case NeighborMode::Four: return 4;
    case NeighborMode::Eight: return 8;
    case NeighborMode::TwoChannel: return 2;
  }
  return 0;
}

void GridSpec::validate() const {
  if (h < 1 || w < 1 || c < 1) {
    throw std::invalid_argument("grid extents must be >= 1, got h=" + std::to_string(h) +
                                " w=" + std::to_string(w) + " c=" + std::to_string(c));
  }
}

std::size_t GridSpec::node_count(NeighborMode mode) const {
  return mode == NeighborMode::TwoChannel ? c : h * w;
}

Adjacency Adjacency::from_csr(std::size_t n, std::vector<std::size_t> row_offsets,
                              std::vector<NodeId> col_indices) {
  if (row_offsets.size() != n + 1 || row_offsets.front() != 0 || row_offsets.back() != col_indices.size()) {
    throw std::invalid_argument("row_offsets must have n+1 entries from 0 to nnz");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (row_offsets[i + 1] < row_offsets[i]) throw std::invalid_argument("row_offsets must be nondecreasing");
    for (std::size_t e = row_offsets[i]; e < row_offsets[i + 1]; ++e) {
      if (col_indices[e] >= n) {
        throw std::invalid_argument("column index " + std::to_string(col_indices[e]) + " out of range");
      }
      if (e > row_offsets[i] && col_indices[e] <= col_indices[e - 1]) {
        throw std::invalid_argument("columns of row " + std::to_string(i) + " not strictly ascending");
      }
    }
  }
  Adjacency a;
  a.row_offsets_ = std::move(row_offsets);
  a.col_indices_ = std::move(col_indices);
  return a;
}

bool Adjacency::has_edge(std::size_t i, std::size_t j) const {
  const auto row = neighbors(i);
  return std::binary_search(row.begin(), row.end(), static_cast<NodeId>(j));
}

std::vector<std::uint8_t> Adjacency::dense() const {
  const std::size_t nn = n();
  std::vector<std::uint8_t> out(nn * nn, 0);
  for (std::size_t i = 0; i < nn; ++i) {
    for (NodeId j : neighbors(i)) out[i * nn + j] = 1;
  }
  return out;
}

EdgeList Adjacency::edges() const {
  EdgeList list;
  list.node.reserve(num_edges());
  list.neighbor.reserve(num_edges());
  for (std::size_t i = 0; i < n(); ++i) {
    for (NodeId j : neighbors(i)) list.push(static_cast<NodeId>(i), j);
  }
  return list;
}

bool Adjacency::is_symmetric() const {
  for (std::size_t i = 0; i < n(); ++i) {
    for (NodeId j : neighbors(i)) {
      if (!has_edge(j, i)) return false;
    }
  }
  return true;
}

bool Adjacency::has_zero_diagonal() const {
  for (std::size_t i = 0; i < n(); ++i) {
    if (has_edge(i, i)) return false;
  }
  return true;
}

Adjacency adjacency_from_pairs(const EdgeList& edges, std::size_t n) {
  if (edges.node.size() != edges.neighbor.size()) {
    throw std::invalid_argument("edge list arrays differ in length");
  }
  const std::size_t m = edges.size();
  for (std::size_t e = 0; e < m; ++e) {
    const NodeId bad = edges.node[e] >= n ? edges.node[e] : edges.neighbor[e];
    if (edges.node[e] >= n || edges.neighbor[e] >= n) {
      throw std::out_of_range("node id " + std::to_string(bad) + " at pair " + std::to_string(e) +
                              " is out of range for " + std::to_string(n) + " nodes");
    }
  }

  // Two stable counting passes over both directions of every pair: by column,
  // then by row. Rows come out with ascending columns; duplicates are adjacent.
  std::vector<std::size_t> by_col(n + 1, 0);
  std::vector<std::size_t> by_row(n + 1, 0);
  for (std::size_t e = 0; e < m; ++e) {
    ++by_col[edges.neighbor[e] + 1];
    ++by_col[edges.node[e] + 1];
    ++by_row[edges.node[e] + 1];
    ++by_row[edges.neighbor[e] + 1];
  }
  for (std::size_t i = 0; i < n; ++i) {
    by_col[i + 1] += by_col[i];
    by_row[i + 1] += by_row[i];
  }
  std::vector<NodeId> rows_by_col(2 * m);
  {
    std::vector<std::size_t> cursor(by_col.begin(), by_col.end() - 1);
    for (std::size_t e = 0; e < m; ++e) {
      rows_by_col[cursor[edges.neighbor[e]]++] = edges.node[e];
      rows_by_col[cursor[edges.node[e]]++] = edges.neighbor[e];
    }
  }
  std::vector<NodeId> cols(2 * m);
  {
    std::vector<std::size_t> cursor(by_row.begin(), by_row.end() - 1);
    for (std::size_t c = 0; c < n; ++c) {
      for (std::size_t k = by_col[c]; k < by_col[c + 1]; ++k) cols[cursor[rows_by_col[k]]++] = static_cast<NodeId>(c);
    }
  }

  Adjacency a;
  a.row_offsets_.assign(n + 1, 0);
  std::size_t out = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = by_row[i]; k < by_row[i + 1]; ++k) {
      if (k != by_row[i] && cols[k] == cols[k - 1]) continue;
      cols[out++] = cols[k];
    }
    a.row_offsets_[i + 1] = out;
  }
  cols.resize(out);
  a.col_indices_ = std::move(cols);
  return a;
}

namespace {

// Appends (row[first..last), row[first..last) + shift) as node/neighbor pairs.
inline void push_slice(EdgeList& list, NodeId row_start, std::size_t first, std::size_t last, std::int64_t shift) {
  const std::size_t at = list.node.size();
  const std::size_t count = last - first;
  list.node.resize(at + count);
  list.neighbor.resize(at + count);
  NodeId* node = list.node.data() + at;
  NodeId* neighbor = list.neighbor.data() + at;
  const auto base = static_cast<NodeId>(row_start + first);
  const auto delta = static_cast<NodeId>(shift);  // unsigned wrap-around adds a negative shift
  for (std::size_t j = 0; j < count; ++j) {
    node[j] = base + static_cast<NodeId>(j);
    neighbor[j] = node[j] + delta;
  }
}

}  // namespace

EdgeList grid_edge_list(const GridSpec& spec, NeighborMode mode) {
  spec.validate();
  EdgeList list;
  if (mode == NeighborMode::TwoChannel) {
    // a single row of c channel nodes; only the left/right slices apply
    const std::size_t c = spec.c;
    list.node.reserve(2 * (c - 1));
    list.neighbor.reserve(2 * (c - 1));
    push_slice(list, 0, 1, c, -1);
    push_slice(list, 0, 0, c - 1, +1);
    return list;
  }

  const std::size_t h = spec.h, w = spec.w;
  const auto sw = static_cast<std::int64_t>(w);
  std::size_t expected = 2 * (h * (w - 1) + w * (h - 1));
  if (mode == NeighborMode::Eight) expected += 4 * (h - 1) * (w - 1);
  list.node.reserve(expected);
  list.neighbor.reserve(expected);

  for (std::size_t i = 0; i < h; ++i) {
    const auto r = static_cast<NodeId>(i * w);
    push_slice(list, r, 1, w, -1);      // r[1:]  -> r[1:] - 1
    push_slice(list, r, 0, w - 1, +1);  // r[:-1] -> r[:-1] + 1
    if (i != h - 1) push_slice(list, r, 0, w, +sw);
    if (i != 0) push_slice(list, r, 0, w, -sw);
    if (mode == NeighborMode::Eight) {
      if (i != h - 1) {
        push_slice(list, r, 1, w, sw - 1);
        push_slice(list, r, 0, w - 1, sw + 1);
      }
      if (i != 0) {
        push_slice(list, r, 1, w, -sw - 1);
        push_slice(list, r, 0, w - 1, -sw + 1);
      }
    }
  }
  return list;
}

Adjacency generate_grid_graph(const GridSpec& spec, NeighborMode mode) {
  return adjacency_from_pairs(grid_edge_list(spec, mode), spec.node_count(mode));
}

Adjacency oracle_adjacency(const GridSpec& spec, NeighborMode mode) {
  spec.validate();
  const std::size_t n = spec.node_count(mode);
  const std::size_t w = mode == NeighborMode::TwoChannel ? n : spec.w;
  std::vector<std::int64_t> row(n), col(n);
  for (std::size_t i = 0; i < n; ++i) {
    row[i] = static_cast<std::int64_t>(i / w);
    col[i] = static_cast<std::int64_t>(i % w);
  }

  Adjacency a;
  a.row_offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::int64_t dr = std::llabs(row[i] - row[j]);
      const std::int64_t dc = std::llabs(col[i] - col[j]);
      const std::int64_t dist = mode == NeighborMode::Eight ? std::max(dr, dc) : dr + dc;
      if (dist == 1) a.col_indices_.push_back(static_cast<NodeId>(j));
    }
    a.row_offsets_[i + 1] = a.col_indices_.size();
  }
  return a;
}

Adjacency fully_connected(std::size_t n) {
  Adjacency a;
  a.row_offsets_.assign(n + 1, 0);
  a.col_indices_.reserve(n * (n ? n - 1 : 0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) a.col_indices_.push_back(static_cast<NodeId>(j));
    }
    a.row_offsets_[i + 1] = a.col_indices_.size();
  }
  return a;
}

Adjacency with_self_loops(const Adjacency& adjacency) {
  Adjacency a;
  const std::size_t n = adjacency.n();
  a.row_offsets_.assign(n + 1, 0);
  a.col_indices_.reserve(adjacency.num_edges() + n);
  for (std::size_t i = 0; i < n; ++i) {
    bool placed = false;
    for (NodeId j : adjacency.neighbors(i)) {
      if (!placed && j >= i) {
        if (j != i) a.col_indices_.push_back(static_cast<NodeId>(i));
        placed = true;
      }
      a.col_indices_.push_back(j);
    }
    if (!placed) a.col_indices_.push_back(static_cast<NodeId>(i));
    a.row_offsets_[i + 1] = a.col_indices_.size();
  }
  return a;
}

namespace {

template <typename Fn>
double mean_seconds(Fn&& fn, std::size_t repeats, std::size_t& sink) {
  using clock = std::chrono::steady_clock;
  sink += fn().num_edges();  // warm-up, discarded
  const auto start = clock::now();
  for (std::size_t r = 0; r < repeats; ++r) sink += fn().num_edges();
  const std::chrono::duration<double> elapsed = clock::now() - start;
  return elapsed.count() / static_cast<double>(repeats);
}

}  // namespace

std::vector<BenchRow> bench_generation(std::span<const GridSpec> sizes, NeighborMode mode, std::size_t repeats) {
  if (repeats < 3) throw std::invalid_argument("bench_generation needs at least 3 repeats");
  std::vector<BenchRow> rows;
  std::size_t sink = 0;
  for (const GridSpec& spec : sizes) {
    BenchRow row;
    row.n = spec.node_count(mode);
    row.mode = mode;
    row.fast_seconds = mean_seconds([&] { return generate_grid_graph(spec, mode); }, repeats, sink);
    row.oracle_seconds = mean_seconds([&] { return oracle_adjacency(spec, mode); }, repeats, sink);
    row.ratio = row.fast_seconds > 0.0 ? row.oracle_seconds / row.fast_seconds : 0.0;
    rows.push_back(row);
  }
  // keeps the generated graphs observable so the timed calls are not elided
  if (sink == static_cast<std::size_t>(-1)) rows.clear();
  return rows;
}

void write_bench_csv(std::ostream& os, std::span<const BenchRow> rows) {
  os << "n,mode,fast_seconds,oracle_seconds,ratio\n";
  for (const auto& r : rows) {
    os << r.n << ',' << to_string(r.mode) << ',' << std::fixed << std::setprecision(6) << r.fast_seconds << ','
       << r.oracle_seconds << ',' << r.ratio << '\n';
    os.unsetf(std::ios::fixed);
  }
}

}  // namespace pga
