#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "bine/centrality.hpp"
#include "bine/graph.hpp"

namespace bine {

struct WalkConfig {
  int max_walks = 32;      // maxT
  int min_walks = 1;       // minT
  double stop_prob = 0.15;
  int max_len = 100;
  std::uint64_t seed = 0;
  int threads = 1;

  /// Throws ConfigError when an invariant does not hold.
  void validate() const;
};

/// Vertex sequences generated from one side's projection.
struct Corpus {
  Side side = Side::U;
  std::vector<std::vector<VertexId>> sequences;

  std::size_t positions() const;
  std::size_t transitions() const;
};

/// Number of walks started from a vertex with centrality `score`:
/// max(ceil(score * maxT), minT).
int walk_count(double score, const WalkConfig& config);

/// Truncated biased random walks on a same-side projection. Each step moves
/// to an off-diagonal neighbor with probability proportional to its weight.
/// Walks take at least one step, then stop after each further step with
/// probability stop_prob or at max_len. Vertices without off-diagonal
/// neighbors start no walks. Sequences are ordered by (start vertex, walk
/// index), each walk drawing from its own derived stream.
Corpus generate_corpus(const HomogeneousProjection& projection, const CentralityScores& centrality,
                       const WalkConfig& config);

/// Same transition law as generate_corpus on project_second_order(graph,
/// side), sampled as a two-hop walk through the other side without
/// materializing the projection. The intermediate vertex k is drawn with
/// probability proportional to w_ik * d_k, the landing vertex proportional
/// to w_jk; landing back on the start is rejected and the hop redrawn.
Corpus generate_corpus_two_step(const BipartiteGraph& graph, Side side, const CentralityScores& centrality,
                                const WalkConfig& config);

struct ContextCount {
  VertexId context;
  std::uint64_t count;
};

/// Center-context co-occurrence counts #(w, c) over a corpus.
class CorpusStats {
 public:
  CorpusStats() = default;
  CorpusStats(Side side, int window, std::size_t vertex_count, std::vector<std::size_t> offsets,
              std::vector<ContextCount> entries);

  Side side() const { return side_; }
  int window() const { return window_; }
  std::size_t vertex_count() const { return center_counts_.size(); }

  /// Contexts of center w sorted by id.
  std::span<const ContextCount> row(VertexId w) const;
  std::uint64_t count(VertexId w, VertexId c) const;
  /// #(w) = sum_c #(w, c).
  std::uint64_t center_count(VertexId w) const { return center_counts_[w]; }
  /// #(c) = sum_w #(w, c).
  std::uint64_t context_count(VertexId c) const { return context_counts_[c]; }
  /// |D|, the total number of center-context pairs.
  std::uint64_t total() const { return total_; }
  bool empty() const { return total_ == 0; }

 private:
  Side side_ = Side::U;
  int window_ = 1;
  std::vector<std::size_t> offsets_{0};
  std::vector<ContextCount> entries_;
  std::vector<std::uint64_t> center_counts_;
  std::vector<std::uint64_t> context_counts_;
  std::uint64_t total_ = 0;
};

/// Every vertex within distance 1..window of a position, truncated at the
/// sequence ends, is one context of that position's vertex.
CorpusStats cooccurrence_counts(const Corpus& corpus, int window, std::size_t vertex_count);

/// Number of occurrences of each vertex in the corpus.
std::vector<std::uint64_t> occurrence_counts(const Corpus& corpus, std::size_t vertex_count);

enum class SlopeBinning {
  Exact,  // one point per distinct frequency value
  Log2,   // logarithmic bins [2^k, 2^(k+1)) with counts divided by bin width
  Log2Tail,  // Log2, fitted from the densest bin onward
};

/// Least-squares slope of log(number of vertices with frequency f) against
/// log(f). Zero frequencies are ignored. Throws ConfigError when fewer than
/// three histogram points remain.
double power_law_slope(std::span<const std::uint64_t> frequencies, SlopeBinning binning = SlopeBinning::Exact);

/// One sequence per line, space separated tokens.
void write_corpus(std::ostream& out, const Corpus& corpus, const std::vector<std::string>& tokens);

}  // namespace bine
