#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "bine/graph.hpp"
#include "bine/random.hpp"
#include "bine/walks.hpp"

namespace bine {

enum class ShingleScope {
  BothSides,  // every vertex within ws hops, on either side
  SameSide,   // only same-side vertices within ws hops
};

struct LshParams {
  int window = 5;  // ws
  int rows = 2;    // k, rows per band
  int bands = 8;   // b
  std::uint64_t seed = 0;
  ShingleScope scope = ShingleScope::BothSides;
};

/// MinHash LSH over ws-hop shingles of one side's vertices.
///
/// Shingle elements are global ids: U vertices keep their id, V vertices are
/// offset by |U|. A vertex with an empty shingle gets a sentinel bucket of
/// its own in every band.
class LshIndex {
 public:
  LshIndex(const BipartiteGraph& graph, Side side, const LshParams& params);

  Side side() const { return side_; }
  std::size_t size() const { return shingles_.size(); }
  int rows() const { return rows_; }
  int bands() const { return bands_; }

  std::span<const std::uint32_t> shingle(VertexId x) const { return shingles_[x]; }
  /// Local ids of the same-side members of x's shingle, sorted.
  std::vector<VertexId> same_side_shingle(VertexId x) const;
  std::span<const std::uint64_t> signature(VertexId x) const;
  bool isolated(VertexId x) const { return shingles_[x].empty(); }

  /// Bucket id of x in `band`; buckets are numbered per band.
  std::uint32_t bucket(int band, VertexId x) const { return bucket_of_[static_cast<std::size_t>(band) * size() + x]; }
  std::span<const VertexId> bucket_members(int band, std::uint32_t bucket) const;
  bool share_bucket(VertexId x, VertexId y) const;
  /// Sorted vertices sharing at least one bucket with x, excluding x.
  std::span<const VertexId> colliders(VertexId x) const { return colliders_[x]; }

  double jaccard(VertexId x, VertexId y) const;
  /// Lower clamp of miss_probability, 1 / |side|^2.
  double q_floor() const;

 private:
  Side side_;
  std::uint32_t global_begin_;  // global id of this side's vertex 0
  int rows_;
  int bands_;
  std::vector<std::vector<std::uint32_t>> shingles_;
  std::vector<std::uint64_t> signatures_;
  std::vector<std::uint32_t> bucket_of_;
  std::vector<std::vector<std::vector<VertexId>>> buckets_;  // [band][bucket]
  std::vector<std::vector<VertexId>> colliders_;
};

LshIndex build_lsh_index(const BipartiteGraph& graph, Side side, const LshParams& params);

/// Probability that x and y share no bucket, (1 - J^k)^b with the exact
/// shingle Jaccard J, clamped to [q_floor, 1].
double miss_probability(const LshIndex& index, VertexId x, VertexId y);

enum class NegativeStrategy { Lsh, Frequency };

class NegativeSampler {
 public:
  virtual ~NegativeSampler() = default;

  /// ns draws with replacement. Never returns `center`; when `avoid` is set
  /// that vertex is redrawn as well, unless it is the only candidate.
  virtual std::vector<VertexId> draw(VertexId center, int ns, Rng& rng,
                                     std::optional<VertexId> avoid = std::nullopt) const = 0;

  /// Whether draws for `center` come from the fallback pool.
  virtual bool uses_fallback(VertexId center) const = 0;
};

/// Uniform draws from vertices sharing no bucket with the center. An empty
/// pool falls back to same-side vertices outside the center's shingle, then
/// to any other vertex.
class LshNegativeSampler final : public NegativeSampler {
 public:
  explicit LshNegativeSampler(const LshIndex& index);

  std::vector<VertexId> draw(VertexId center, int ns, Rng& rng,
                             std::optional<VertexId> avoid = std::nullopt) const override;
  bool uses_fallback(VertexId center) const override;

 private:
  const std::vector<VertexId>& excluded(VertexId center) const;

  std::size_t size_;
  std::vector<std::vector<VertexId>> primary_excluded_;
  std::vector<std::vector<VertexId>> fallback_excluded_;
  std::vector<char> fallback_;
  mutable std::atomic<bool> warned_{false};
};

/// Draws proportional to #(w)^0.75 from corpus center counts.
class FrequencyNegativeSampler final : public NegativeSampler {
 public:
  explicit FrequencyNegativeSampler(const CorpusStats& stats, double exponent = 0.75);
  /// Explicit per-vertex counts.
  explicit FrequencyNegativeSampler(std::span<const std::uint64_t> counts, double exponent = 0.75);

  std::vector<VertexId> draw(VertexId center, int ns, Rng& rng,
                             std::optional<VertexId> avoid = std::nullopt) const override;
  bool uses_fallback(VertexId center) const override;

 private:
  std::vector<double> weights_;
  std::vector<double> cumulative_;
  mutable std::atomic<bool> warned_{false};
};

}  // namespace bine
