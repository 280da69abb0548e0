#include "bine/negatives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bine {

namespace {

std::uint32_t global_id(const BipartiteGraph& graph, Side side, VertexId id) {
  return side == Side::U ? id : static_cast<std::uint32_t>(graph.u_count() + id);
}

/// Vertices reachable from `start` within `hops` steps, excluding start.
std::vector<std::uint32_t> reachable(const BipartiteGraph& graph, Side side, VertexId start, int hops,
                                     std::vector<int>& depth_scratch) {
  const std::size_t nu = graph.u_count();
  std::vector<std::uint32_t> frontier{global_id(graph, side, start)};
  std::vector<std::uint32_t> visited = frontier;
  depth_scratch[frontier[0]] = 0;
  for (int d = 1; d <= hops && !frontier.empty(); ++d) {
    std::vector<std::uint32_t> next;
    for (std::uint32_t g : frontier) {
      const Side s = g < nu ? Side::U : Side::V;
      const VertexId local = g < nu ? g : static_cast<VertexId>(g - nu);
      for (const Neighbor& n : graph.neighbors(s, local)) {
        const std::uint32_t h = global_id(graph, other(s), n.id);
        if (depth_scratch[h] < 0) {
          depth_scratch[h] = d;
          next.push_back(h);
          visited.push_back(h);
        }
      }
    }
    frontier.swap(next);
  }
  for (std::uint32_t g : visited) depth_scratch[g] = -1;
  visited.erase(visited.begin());
  std::sort(visited.begin(), visited.end());
  return visited;
}

/// idx-th vertex of [0, n) that is not in the sorted `excluded` list.
VertexId nth_allowed(std::uint64_t idx, const std::vector<VertexId>& excluded) {
  std::uint64_t id = idx;
  for (VertexId e : excluded) {
    if (e <= id)
      ++id;
    else
      break;
  }
  return static_cast<VertexId>(id);
}

}  // namespace

LshIndex::LshIndex(const BipartiteGraph& graph, Side side, const LshParams& params)
    : side_(side),
      global_begin_(side == Side::U ? 0 : static_cast<std::uint32_t>(graph.u_count())),
      rows_(params.rows),
      bands_(params.bands) {
  if (params.window < 1) throw ConfigError("LSH window must be >= 1");
  if (params.rows < 1 || params.bands < 1) throw ConfigError("LSH rows and bands must be positive");
  if (static_cast<long>(params.rows) * params.bands > 4096) throw ConfigError("LSH signature length k*b exceeds 4096");

  const std::size_t n = graph.count(side);
  const std::size_t nu = graph.u_count();
  const std::size_t sig_len = static_cast<std::size_t>(rows_) * static_cast<std::size_t>(bands_);
  std::vector<int> depth(graph.u_count() + graph.v_count(), -1);
  shingles_.resize(n);
  for (VertexId x = 0; x < n; ++x) {
    auto s = reachable(graph, side, x, params.window, depth);
    if (params.scope == ShingleScope::SameSide) {
      const bool want_u = side == Side::U;
      std::erase_if(s, [&](std::uint32_t g) { return (g < nu) != want_u; });
    }
    shingles_[x] = std::move(s);
  }

  std::vector<std::uint64_t> hash_seeds(sig_len);
  for (std::size_t t = 0; t < sig_len; ++t) hash_seeds[t] = derive_seed(params.seed, t, 0x5348494eULL);
  signatures_.assign(n * sig_len, std::numeric_limits<std::uint64_t>::max());
  for (VertexId x = 0; x < n; ++x) {
    std::uint64_t* sig = signatures_.data() + x * sig_len;
    for (std::uint32_t e : shingles_[x])
      for (std::size_t t = 0; t < sig_len; ++t) sig[t] = std::min(sig[t], mix64(hash_seeds[t] ^ e));
  }

  bucket_of_.resize(static_cast<std::size_t>(bands_) * n);
  buckets_.resize(static_cast<std::size_t>(bands_));
  for (int band = 0; band < bands_; ++band) {
    std::map<std::pair<std::int64_t, std::vector<std::uint64_t>>, std::uint32_t> ids;
    auto& members = buckets_[static_cast<std::size_t>(band)];
    for (VertexId x = 0; x < n; ++x) {
      std::pair<std::int64_t, std::vector<std::uint64_t>> key;
      if (isolated(x)) {
        key.first = x;
      } else {
        key.first = -1;
        const auto sig = signature(x);
        key.second.assign(sig.begin() + band * rows_, sig.begin() + (band + 1) * rows_);
      }
      auto [it, inserted] = ids.try_emplace(std::move(key), static_cast<std::uint32_t>(members.size()));
      if (inserted) members.emplace_back();
      members[it->second].push_back(x);
      bucket_of_[static_cast<std::size_t>(band) * n + x] = it->second;
    }
  }

  colliders_.resize(n);
  for (VertexId x = 0; x < n; ++x) {
    auto& out = colliders_[x];
    for (int band = 0; band < bands_; ++band)
      for (VertexId y : bucket_members(band, bucket(band, x)))
        if (y != x) out.push_back(y);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
}

std::span<const std::uint64_t> LshIndex::signature(VertexId x) const {
  const std::size_t len = static_cast<std::size_t>(rows_) * static_cast<std::size_t>(bands_);
  return std::span<const std::uint64_t>(signatures_).subspan(x * len, len);
}

std::span<const VertexId> LshIndex::bucket_members(int band, std::uint32_t bucket) const {
  return buckets_[static_cast<std::size_t>(band)][bucket];
}

bool LshIndex::share_bucket(VertexId x, VertexId y) const {
  for (int band = 0; band < bands_; ++band)
    if (bucket(band, x) == bucket(band, y)) return true;
  return false;
}

double LshIndex::jaccard(VertexId x, VertexId y) const {
  const auto& a = shingles_[x];
  const auto& b = shingles_[y];
  if (a.empty() && b.empty()) return 0.0;
  std::size_t inter = 0, i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j])
      ++i;
    else if (b[j] < a[i])
      ++j;
    else {
      ++inter;
      ++i;
      ++j;
    }
  }
  const std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<VertexId> LshIndex::same_side_shingle(VertexId x) const {
  std::vector<VertexId> out;
  const std::uint32_t end = global_begin_ + static_cast<std::uint32_t>(size());
  for (std::uint32_t g : shingles_[x])
    if (g >= global_begin_ && g < end) out.push_back(g - global_begin_);
  return out;
}

double LshIndex::q_floor() const {
  const double n = static_cast<double>(size());
  return 1.0 / (n * n);
}

LshIndex build_lsh_index(const BipartiteGraph& graph, Side side, const LshParams& params) {
  return LshIndex(graph, side, params);
}

double miss_probability(const LshIndex& index, VertexId x, VertexId y) {
  if (x == y) throw ConfigError("miss_probability requires distinct vertices");
  const double j = index.jaccard(x, y);
  const double q = std::pow(1.0 - std::pow(j, index.rows()), index.bands());
  return std::clamp(q, index.q_floor(), 1.0);
}

LshNegativeSampler::LshNegativeSampler(const LshIndex& index)
    : size_(index.size()), primary_excluded_(index.size()), fallback_excluded_(index.size()), fallback_(index.size(), 0) {
  const std::size_t n = index.size();
  for (VertexId x = 0; x < n; ++x) {
    auto& ex = primary_excluded_[x];
    const auto col = index.colliders(x);
    ex.assign(col.begin(), col.end());
    ex.insert(std::lower_bound(ex.begin(), ex.end(), x), x);
    if (ex.size() < n) continue;

    fallback_[x] = 1;
    auto& fb = fallback_excluded_[x];
    fb = index.same_side_shingle(x);
    fb.insert(std::lower_bound(fb.begin(), fb.end(), x), x);
    if (fb.size() >= n) fb.assign({x});
  }
}

const std::vector<VertexId>& LshNegativeSampler::excluded(VertexId center) const {
  return fallback_[center] ? fallback_excluded_[center] : primary_excluded_[center];
}

bool LshNegativeSampler::uses_fallback(VertexId center) const { return fallback_[center] != 0; }

std::vector<VertexId> LshNegativeSampler::draw(VertexId center, int ns, Rng& rng,
                                               std::optional<VertexId> avoid) const {
  if (ns < 1) throw ConfigError("ns must be >= 1");
  const std::size_t n = size_;
  if (center >= n) throw ConfigError("center out of range");
  if (n < 2) throw ConfigError("negative sampling needs at least two vertices on a side");
  if (fallback_[center] && !warned_.exchange(true))
    warn("LSH negative pool is empty for some centers; falling back to uniform non-neighbor sampling");

  const auto& ex = excluded(center);
  const std::uint64_t pool = n - ex.size();
  const bool avoid_in_pool = avoid && *avoid != center && !std::binary_search(ex.begin(), ex.end(), *avoid);
  const bool can_avoid = avoid_in_pool && pool > 1;
  std::vector<VertexId> out;
  out.reserve(static_cast<std::size_t>(ns));
  while (static_cast<int>(out.size()) < ns) {
    const VertexId z = nth_allowed(rng.index(pool), ex);
    if (can_avoid && z == *avoid) continue;
    out.push_back(z);
  }
  return out;
}

namespace {
std::vector<std::uint64_t> center_counts(const CorpusStats& stats) {
  std::vector<std::uint64_t> counts(stats.vertex_count());
  for (VertexId w = 0; w < counts.size(); ++w) counts[w] = stats.center_count(w);
  return counts;
}
}  // namespace

FrequencyNegativeSampler::FrequencyNegativeSampler(const CorpusStats& stats, double exponent)
    : FrequencyNegativeSampler(std::span<const std::uint64_t>(center_counts(stats)), exponent) {}

FrequencyNegativeSampler::FrequencyNegativeSampler(std::span<const std::uint64_t> counts, double exponent) {
  weights_.reserve(counts.size());
  cumulative_.reserve(counts.size());
  double acc = 0.0;
  for (auto c : counts) {
    const double w = std::pow(static_cast<double>(c), exponent);
    weights_.push_back(w);
    acc += w;
    cumulative_.push_back(acc);
  }
}

bool FrequencyNegativeSampler::uses_fallback(VertexId center) const {
  const double total = cumulative_.empty() ? 0.0 : cumulative_.back();
  return !(total - weights_[center] > 1e-12 * total);
}

std::vector<VertexId> FrequencyNegativeSampler::draw(VertexId center, int ns, Rng& rng,
                                                     std::optional<VertexId> avoid) const {
  if (ns < 1) throw ConfigError("ns must be >= 1");
  const std::size_t n = weights_.size();
  if (center >= n) throw ConfigError("center out of range");
  if (n < 2) throw ConfigError("negative sampling needs at least two vertices on a side");

  const double total = cumulative_.back();
  const bool avoid_other = avoid && *avoid != center;
  double allowed = total - weights_[center];
  if (avoid_other) allowed -= weights_[*avoid];
  const bool weighted_ok = allowed > 1e-12 * total;
  const bool can_avoid = avoid_other && (weighted_ok || n > 2);

  std::vector<VertexId> out;
  out.reserve(static_cast<std::size_t>(ns));
  if (!weighted_ok) {
    if (!warned_.exchange(true)) warn("frequency negative pool is empty; falling back to uniform sampling");
    std::vector<VertexId> ex{center};
    if (can_avoid) ex.push_back(*avoid);
    std::sort(ex.begin(), ex.end());
    while (static_cast<int>(out.size()) < ns) out.push_back(nth_allowed(rng.index(n - ex.size()), ex));
    return out;
  }
  while (static_cast<int>(out.size()) < ns) {
    const double target = rng.uniform() * total;
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    if (it == cumulative_.end()) --it;
    const auto z = static_cast<VertexId>(it - cumulative_.begin());
    if (z == center || (can_avoid && z == *avoid) || weights_[z] == 0) continue;
    out.push_back(z);
  }
  return out;
}

}  // namespace bine
