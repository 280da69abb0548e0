#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bine/common.hpp"

namespace bine {

struct Edge {
  VertexId u;
  VertexId v;
  double weight;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct Neighbor {
  VertexId id;
  double weight;
};

/// Weighted bipartite network G = (U, V, E).
///
/// Vertex ids are dense on each side. Edges with zero weight are dropped and
/// duplicate (u, v) pairs are merged by summing, keeping the position of the
/// first occurrence. Adjacency lists are sorted by neighbor id. Immutable
/// after construction.
class BipartiteGraph {
 public:
  BipartiteGraph() = default;

  /// Throws ConfigError on out-of-range ids or negative / non-finite weights.
  /// Missing tokens default to the decimal id.
  BipartiteGraph(std::size_t u_count, std::size_t v_count, std::vector<Edge> edges,
                 std::vector<std::string> u_tokens = {}, std::vector<std::string> v_tokens = {});

  std::size_t u_count() const { return u_count_; }
  std::size_t v_count() const { return v_count_; }
  std::size_t count(Side side) const { return side == Side::U ? u_count_ : v_count_; }
  std::size_t edge_count() const { return edges_.size(); }
  bool empty() const { return edges_.empty(); }

  std::span<const Edge> edges() const { return edges_; }
  std::span<const Neighbor> neighbors(Side side, VertexId id) const;

  double weighted_degree(Side side, VertexId id) const;
  /// vol(G), the total edge weight.
  double volume() const { return volume_; }

  std::optional<double> weight(VertexId u, VertexId v) const;

  const std::vector<std::string>& tokens(Side side) const { return side == Side::U ? u_tokens_ : v_tokens_; }
  const std::string& token(Side side, VertexId id) const { return tokens(side)[id]; }

 private:
  struct Adjacency {
    std::vector<std::size_t> offsets;
    std::vector<Neighbor> entries;
  };

  std::size_t u_count_ = 0;
  std::size_t v_count_ = 0;
  std::vector<Edge> edges_;
  Adjacency u_adj_;
  Adjacency v_adj_;
  std::vector<double> u_degree_;
  std::vector<double> v_degree_;
  double volume_ = 0.0;
  std::vector<std::string> u_tokens_;
  std::vector<std::string> v_tokens_;
};

/// Parses "u<TAB>v[<TAB>weight]" lines. Blank lines and lines starting with
/// '#' are skipped. Tokens are interned in first-appearance order. Spaces are
/// accepted as separators too. Throws InputError naming the line number.
BipartiteGraph load_edge_list(std::istream& in);
BipartiteGraph load_edge_list_file(const std::string& path);

/// Writes the edge list in the format accepted by load_edge_list.
void write_edge_list(std::ostream& out, const BipartiteGraph& graph);

/// w_ij / vol(G). Throws ConfigError when (u, v) is not an edge.
double edge_probability(const BipartiteGraph& graph, VertexId u, VertexId v);

/// Induced same-side network with w_ij = sum_k w_ik * w_jk.
///
/// The diagonal sum_k w_ik^2 is kept apart from the off-diagonal rows.
/// Random walks and transition matrices use only off-diagonal entries;
/// degree() and volume() include the diagonal.
class HomogeneousProjection {
 public:
  HomogeneousProjection(Side side, std::size_t size, std::vector<std::size_t> offsets,
                        std::vector<Neighbor> entries, std::vector<double> diagonal);

  Side side() const { return side_; }
  std::size_t size() const { return diagonal_.size(); }

  /// Off-diagonal entries of row i, sorted by column.
  std::span<const Neighbor> neighbors(VertexId i) const;
  double diagonal(VertexId i) const { return diagonal_[i]; }
  /// Entry (i, j) including the diagonal; zero when absent.
  double weight(VertexId i, VertexId j) const;

  double degree(VertexId i) const { return off_degree_[i] + diagonal_[i]; }
  double off_diagonal_degree(VertexId i) const { return off_degree_[i]; }
  double volume() const { return volume_; }
  double off_diagonal_volume() const { return off_volume_; }
  std::size_t off_diagonal_nnz() const { return entries_.size(); }

 private:
  Side side_;
  std::vector<std::size_t> offsets_;
  std::vector<Neighbor> entries_;
  std::vector<double> diagonal_;
  std::vector<double> off_degree_;
  double volume_ = 0.0;
  double off_volume_ = 0.0;
};

HomogeneousProjection project_second_order(const BipartiteGraph& graph, Side side);

}  // namespace bine
