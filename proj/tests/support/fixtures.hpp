#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "bine/graph.hpp"
#include "bine/random.hpp"

namespace fixtures {

using bine::BipartiteGraph;
using bine::Edge;

// 5 x 5, weighted, connected.
inline BipartiteGraph toy_graph() {
  return BipartiteGraph(5, 5,
                        {{0, 0, 1}, {0, 1, 2}, {1, 1, 1}, {1, 2, 3}, {2, 2, 1}, {2, 3, 1}, {3, 3, 2},
                         {3, 4, 1}, {4, 4, 1}, {4, 0, 2}, {0, 3, 1}, {2, 0, 1}});
}

// Two fully connected 25 x 15 blocks with no edges between them.
inline BipartiteGraph planted_two_block() {
  std::vector<Edge> edges;
  for (bine::VertexId u = 0; u < 50; ++u)
    for (bine::VertexId v = 0; v < 30; ++v)
      if ((u < 25) == (v < 15)) edges.push_back({u, v, 1.0});
  return BipartiteGraph(50, 30, std::move(edges));
}

inline bool planted_block(bine::Side side, bine::VertexId id) {
  return side == bine::Side::U ? id < 25 : id < 15;
}

// Chung-Lu style sampler: U endpoints drawn with weight (i+1)^(-1/(g-1)),
// V endpoints uniformly, duplicates discarded, until m distinct edges.
// Vertices that end up without an edge are dropped and ids compacted.
inline BipartiteGraph one_sided_scale_free(std::size_t nu, std::size_t nv, std::size_t m, double exponent,
                                           std::uint64_t seed) {
  bine::Rng rng(seed);
  std::vector<double> cumulative(nu);
  double acc = 0.0;
  for (std::size_t i = 0; i < nu; ++i) {
    acc += std::pow(static_cast<double>(i + 1), -1.0 / (exponent - 1.0));
    cumulative[i] = acc;
  }
  std::vector<std::vector<char>> seen(nu, std::vector<char>(nv, 0));
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  while (pairs.size() < m) {
    const double t = rng.uniform() * acc;
    const auto u = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), t) -
                                            cumulative.begin());
    const auto v = static_cast<std::size_t>(rng.index(nv));
    if (u >= nu || seen[u][v]) continue;
    seen[u][v] = 1;
    pairs.emplace_back(u, v);
  }
  std::vector<std::int64_t> u_id(nu, -1), v_id(nv, -1);
  std::size_t next_u = 0, next_v = 0;
  std::vector<Edge> edges;
  for (auto [u, v] : pairs) {
    if (u_id[u] < 0) u_id[u] = static_cast<std::int64_t>(next_u++);
    if (v_id[v] < 0) v_id[v] = static_cast<std::int64_t>(next_v++);
    edges.push_back({static_cast<bine::VertexId>(u_id[u]), static_cast<bine::VertexId>(v_id[v]), 1.0});
  }
  return BipartiteGraph(next_u, next_v, std::move(edges));
}

// 20 U vertices, 12 V vertices, integer weights 1..3. A chain through the V
// side keeps the U projection connected.
inline BipartiteGraph benchmark_graph() {
  bine::Rng rng(20240611);
  std::vector<Edge> edges;
  for (bine::VertexId u = 0; u < 20; ++u) {
    const auto base = static_cast<bine::VertexId>(u * 12 / 20);
    edges.push_back({u, base, static_cast<double>(1 + rng.index(3))});
    edges.push_back({u, static_cast<bine::VertexId>((base + 1) % 12), static_cast<double>(1 + rng.index(3))});
    if (rng.bernoulli(0.5))
      edges.push_back({u, static_cast<bine::VertexId>(rng.index(12)), static_cast<double>(1 + rng.index(3))});
  }
  return BipartiteGraph(20, 12, std::move(edges));
}

// Every (u, v) present independently with probability p; weights in
// [0.5, 2). Each vertex gets at least one edge.
inline BipartiteGraph random_graph(std::size_t nu, std::size_t nv, double p, bine::Rng& rng) {
  std::vector<Edge> edges;
  std::vector<char> v_has(nv, 0);
  for (bine::VertexId u = 0; u < nu; ++u) {
    bool any = false;
    for (bine::VertexId v = 0; v < nv; ++v) {
      if (rng.bernoulli(p)) {
        edges.push_back({u, v, rng.uniform(0.5, 2.0)});
        any = v_has[v] = true;
      }
    }
    if (!any) {
      const auto v = static_cast<bine::VertexId>(rng.index(nv));
      edges.push_back({u, v, rng.uniform(0.5, 2.0)});
      v_has[v] = 1;
    }
  }
  for (bine::VertexId v = 0; v < nv; ++v)
    if (!v_has[v]) edges.push_back({static_cast<bine::VertexId>(rng.index(nu)), v, rng.uniform(0.5, 2.0)});
  return BipartiteGraph(nu, nv, std::move(edges));
}

// Two U vertices whose one-hop shingles have Jaccard inter/uni.
inline BipartiteGraph jaccard_pair(std::size_t inter, std::size_t uni) {
  const std::size_t only = uni - inter;
  const std::size_t a_only = only / 2 + only % 2;
  std::vector<Edge> edges;
  for (std::size_t v = 0; v < a_only + inter; ++v) edges.push_back({0, static_cast<bine::VertexId>(v), 1.0});
  for (std::size_t v = a_only; v < uni; ++v) edges.push_back({1, static_cast<bine::VertexId>(v), 1.0});
  return BipartiteGraph(2, uni, std::move(edges));
}

}  // namespace fixtures
