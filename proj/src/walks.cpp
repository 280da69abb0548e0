#include "bine/walks.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <ostream>
#include <thread>

#include "bine/random.hpp"

namespace bine {

namespace {

/// Cumulative-weight table for sampling one of a row's entries.
class RowSampler {
 public:
  void add_row(std::span<const double> weights) {
    double acc = 0.0;
    for (double w : weights) {
      acc += w;
      cumulative_.push_back(acc);
    }
    offsets_.push_back(cumulative_.size());
  }

  bool has_mass(std::size_t row) const {
    return offsets_[row + 1] > offsets_[row] && cumulative_[offsets_[row + 1] - 1] > 0;
  }

  /// Index within the row.
  std::size_t draw(std::size_t row, Rng& rng) const {
    const auto first = cumulative_.begin() + static_cast<std::ptrdiff_t>(offsets_[row]);
    const auto last = cumulative_.begin() + static_cast<std::ptrdiff_t>(offsets_[row + 1]);
    const double target = rng.uniform() * *(last - 1);
    auto it = std::upper_bound(first, last, target);
    if (it == last) --it;
    return static_cast<std::size_t>(it - first);
  }

 private:
  std::vector<std::size_t> offsets_{0};
  std::vector<double> cumulative_;
};

/// Shared driver: `step(current, rng)` returns the next vertex.
template <class Step, class CanWalk>
Corpus run_walks(Side side, std::size_t n, const CentralityScores& centrality, const WalkConfig& config, Step step,
                 CanWalk can_walk) {
  config.validate();
  if (centrality.side != side || centrality.scores.size() != n)
    throw ConfigError("centrality scores do not match the walked side");
  for (double s : centrality.scores)
    if (!std::isfinite(s)) throw ConfigError("centrality scores must be finite");

  std::vector<std::vector<std::vector<VertexId>>> per_vertex(n);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t v = begin; v < end; ++v) {
      if (!can_walk(static_cast<VertexId>(v))) continue;
      const int walks = walk_count(centrality.scores[v], config);
      auto& out = per_vertex[v];
      out.reserve(static_cast<std::size_t>(walks));
      for (int w = 0; w < walks; ++w) {
        Rng rng(derive_seed(config.seed, v, static_cast<std::uint64_t>(w)));
        std::vector<VertexId> seq{static_cast<VertexId>(v)};
        seq.push_back(step(seq.back(), rng));
        while (static_cast<int>(seq.size()) < config.max_len && !rng.bernoulli(config.stop_prob))
          seq.push_back(step(seq.back(), rng));
        out.push_back(std::move(seq));
      }
    }
  };

  const std::size_t threads = std::clamp<std::size_t>(static_cast<std::size_t>(config.threads), 1, std::max<std::size_t>(n, 1));
  if (threads == 1) {
    work(0, n);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t begin = t * chunk;
      const std::size_t end = std::min(n, begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
  }

  Corpus corpus;
  corpus.side = side;
  for (auto& walks : per_vertex)
    for (auto& seq : walks) corpus.sequences.push_back(std::move(seq));
  if (corpus.sequences.empty()) warn("projection has no off-diagonal weight; corpus is empty");
  return corpus;
}

}  // namespace

void WalkConfig::validate() const {
  if (max_walks < 1 || min_walks < 1) throw ConfigError("walk counts must be positive");
  if (min_walks > max_walks) throw ConfigError("min_walks must not exceed max_walks");
  if (!(stop_prob > 0 && stop_prob < 1)) throw ConfigError("stop probability must lie in (0, 1)");
  if (max_len < 2) throw ConfigError("max_len must be >= 2");
  if (threads < 1) throw ConfigError("threads must be >= 1");
}

std::size_t Corpus::positions() const {
  std::size_t n = 0;
  for (const auto& s : sequences) n += s.size();
  return n;
}

std::size_t Corpus::transitions() const {
  std::size_t n = 0;
  for (const auto& s : sequences) n += s.size() - 1;
  return n;
}

int walk_count(double score, const WalkConfig& config) {
  const double scaled = std::ceil(score * config.max_walks);
  return std::max(static_cast<int>(std::min(scaled, static_cast<double>(config.max_walks))), config.min_walks);
}

Corpus generate_corpus(const HomogeneousProjection& projection, const CentralityScores& centrality,
                       const WalkConfig& config) {
  const std::size_t n = projection.size();
  RowSampler sampler;
  std::vector<double> weights;
  for (VertexId i = 0; i < n; ++i) {
    weights.clear();
    for (const Neighbor& nb : projection.neighbors(i)) weights.push_back(nb.weight);
    sampler.add_row(weights);
  }
  auto step = [&](VertexId cur, Rng& rng) { return projection.neighbors(cur)[sampler.draw(cur, rng)].id; };
  auto can_walk = [&](VertexId v) { return sampler.has_mass(v); };
  return run_walks(projection.side(), n, centrality, config, step, can_walk);
}

Corpus generate_corpus_two_step(const BipartiteGraph& graph, Side side, const CentralityScores& centrality,
                                const WalkConfig& config) {
  const std::size_t n = graph.count(side);
  const Side mid = other(side);
  RowSampler out_hop;
  RowSampler back_hop;
  std::vector<double> weights;
  std::vector<char> walkable(n, 0);
  for (VertexId i = 0; i < n; ++i) {
    weights.clear();
    for (const Neighbor& k : graph.neighbors(side, i)) {
      weights.push_back(k.weight * graph.weighted_degree(mid, k.id));
      if (graph.neighbors(mid, k.id).size() > 1) walkable[i] = 1;
    }
    out_hop.add_row(weights);
  }
  for (VertexId k = 0; k < graph.count(mid); ++k) {
    weights.clear();
    for (const Neighbor& j : graph.neighbors(mid, k)) weights.push_back(j.weight);
    back_hop.add_row(weights);
  }
  auto step = [&](VertexId cur, Rng& rng) {
    while (true) {
      const VertexId k = graph.neighbors(side, cur)[out_hop.draw(cur, rng)].id;
      const VertexId j = graph.neighbors(mid, k)[back_hop.draw(k, rng)].id;
      if (j != cur) return j;
    }
  };
  auto can_walk = [&](VertexId v) { return walkable[v] != 0; };
  return run_walks(side, n, centrality, config, step, can_walk);
}

CorpusStats::CorpusStats(Side side, int window, std::size_t vertex_count, std::vector<std::size_t> offsets,
                         std::vector<ContextCount> entries)
    : side_(side), window_(window), offsets_(std::move(offsets)), entries_(std::move(entries)) {
  if (offsets_.size() != vertex_count + 1) throw ConfigError("corpus stats shape mismatch");
  center_counts_.assign(vertex_count, 0);
  context_counts_.assign(vertex_count, 0);
  for (VertexId w = 0; w < vertex_count; ++w) {
    for (const ContextCount& cc : row(w)) {
      center_counts_[w] += cc.count;
      context_counts_[cc.context] += cc.count;
    }
    total_ += center_counts_[w];
  }
}

std::span<const ContextCount> CorpusStats::row(VertexId w) const {
  return std::span<const ContextCount>(entries_).subspan(offsets_[w], offsets_[w + 1] - offsets_[w]);
}

std::uint64_t CorpusStats::count(VertexId w, VertexId c) const {
  if (w >= vertex_count()) return 0;
  auto r = row(w);
  auto it = std::lower_bound(r.begin(), r.end(), c, [](const ContextCount& x, VertexId id) { return x.context < id; });
  return (it != r.end() && it->context == c) ? it->count : 0;
}

CorpusStats cooccurrence_counts(const Corpus& corpus, int window, std::size_t vertex_count) {
  if (window < 1) throw ConfigError("window size must be >= 1");
  std::vector<std::map<VertexId, std::uint64_t>> rows(vertex_count);
  const auto ws = static_cast<std::size_t>(window);
  for (const auto& seq : corpus.sequences) {
    for (std::size_t t = 0; t < seq.size(); ++t) {
      if (seq[t] >= vertex_count) throw ConfigError("corpus vertex id out of range");
      const std::size_t lo = t >= ws ? t - ws : 0;
      const std::size_t hi = std::min(seq.size() - 1, t + ws);
      auto& row = rows[seq[t]];
      for (std::size_t s = lo; s <= hi; ++s)
        if (s != t) ++row[seq[s]];
    }
  }
  std::vector<std::size_t> offsets{0};
  std::vector<ContextCount> entries;
  for (const auto& row : rows) {
    for (const auto& [c, count] : row) entries.push_back({c, count});
    offsets.push_back(entries.size());
  }
  return CorpusStats(corpus.side, window, vertex_count, std::move(offsets), std::move(entries));
}

std::vector<std::uint64_t> occurrence_counts(const Corpus& corpus, std::size_t vertex_count) {
  std::vector<std::uint64_t> counts(vertex_count, 0);
  for (const auto& seq : corpus.sequences)
    for (VertexId v : seq) ++counts.at(v);
  return counts;
}

double power_law_slope(std::span<const std::uint64_t> frequencies, SlopeBinning binning) {
  std::vector<std::pair<double, double>> points;  // (log f, log density)
  if (binning == SlopeBinning::Exact) {
    std::map<std::uint64_t, std::uint64_t> histogram;
    for (auto f : frequencies)
      if (f > 0) ++histogram[f];
    for (const auto& [f, n] : histogram)
      points.emplace_back(std::log(static_cast<double>(f)), std::log(static_cast<double>(n)));
  } else {
    std::map<int, std::uint64_t> bins;
    for (auto f : frequencies)
      if (f > 0) ++bins[static_cast<int>(std::bit_width(f)) - 1];
    for (const auto& [k, n] : bins) {
      const double lo = std::ldexp(1.0, k);
      // Geometric center of [2^k, 2^(k+1)).
      points.emplace_back(std::log(lo * std::sqrt(2.0)), std::log(static_cast<double>(n) / lo));
    }
    if (binning == SlopeBinning::Log2Tail) {
      const auto mode = std::max_element(points.begin(), points.end(),
                                         [](const auto& a, const auto& b) { return a.second < b.second; });
      points.erase(points.begin(), mode);
    }
  }
  if (points.size() < 3) throw ConfigError("power-law fit needs at least 3 distinct frequency values");

  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : points) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(points.size());
  my /= static_cast<double>(points.size());
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  return sxy / sxx;
}

void write_corpus(std::ostream& out, const Corpus& corpus, const std::vector<std::string>& tokens) {
  for (const auto& seq : corpus.sequences) {
    for (std::size_t i = 0; i < seq.size(); ++i) {
      if (i) out << ' ';
      out << tokens.at(seq[i]);
    }
    out << '\n';
  }
}

}  // namespace bine
