#include "bine/trainer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>

#include "bine/format.hpp"
#include "bine/random.hpp"

namespace bine {

namespace {

bool finite(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

/// Per-center cumulative co-occurrence counts for drawing contexts.
class ContextSampler {
 public:
  explicit ContextSampler(const CorpusStats& stats) : stats_(stats) {
    cumulative_.reserve(stats.vertex_count());
    for (VertexId w = 0; w < stats.vertex_count(); ++w) {
      std::vector<std::uint64_t> row;
      std::uint64_t acc = 0;
      for (const ContextCount& cc : stats.row(w)) {
        acc += cc.count;
        row.push_back(acc);
      }
      cumulative_.push_back(std::move(row));
    }
  }

  bool has_contexts(VertexId w) const { return w < cumulative_.size() && !cumulative_[w].empty(); }

  VertexId draw(VertexId w, Rng& rng) const {
    const auto& row = cumulative_[w];
    const std::uint64_t target = rng.index(row.back());
    const auto it = std::upper_bound(row.begin(), row.end(), target);
    return stats_.row(w)[static_cast<std::size_t>(it - row.begin())].context;
  }

 private:
  const CorpusStats& stats_;
  std::vector<std::vector<std::uint64_t>> cumulative_;
};

void implicit_phase(EmbeddingSet& emb, Side side, VertexId center, const ContextSampler& contexts,
                    const NegativeSampler& sampler, const TrainConfig& config, double weight, Rng& rng) {
  if (weight == 0 || !contexts.has_contexts(center)) return;
  for (int b = 0; b < config.bs; ++b) {
    const VertexId context = contexts.draw(center, rng);
    auto negatives = sampler.draw(center, config.ns, rng, context);
    std::erase(negatives, context);
    if (negatives.empty()) continue;
    implicit_step(emb, side, center, context, negatives, weight, config.lr);
  }
}

double implicit_proxy(Side side, const CorpusStats& stats, const NegativeSampler& sampler, const EmbeddingSet& emb,
                      int ns, Rng& rng) {
  const Matrix& centers = emb.embeddings(side);
  const Matrix& ctx = emb.contexts(side);
  double total = 0.0;
  for (VertexId w = 0; w < stats.vertex_count(); ++w) {
    for (const ContextCount& cc : stats.row(w)) {
      double term = log_sigmoid(dot(centers.row(w), ctx.row(cc.context)));
      for (VertexId z : sampler.draw(w, ns, rng, cc.context)) term += log_sigmoid(-dot(centers.row(w), ctx.row(z)));
      total += static_cast<double>(cc.count) * term;
    }
  }
  return total;
}

}  // namespace

bool EmbeddingSet::all_finite() const {
  return u_emb.all_finite() && v_emb.all_finite() && u_ctx.all_finite() && v_ctx.all_finite();
}

void TrainConfig::validate() const {
  if (!(lr > 0)) throw ConfigError("learning rate must be positive");
  if (!(alpha >= 0 && beta >= 0 && gamma >= 0)) throw ConfigError("trade-off weights must be nonnegative");
  if (ns < 1 || ws < 1 || bs < 1) throw ConfigError("ns, ws and bs must be >= 1");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
}

EmbeddingSet init_embeddings(std::size_t u_count, std::size_t v_count, std::size_t dim, std::uint64_t seed) {
  if (dim < 1) throw ConfigError("embedding dimension must be >= 1");
  EmbeddingSet emb{dim, Matrix(u_count, dim), Matrix(v_count, dim), Matrix(u_count, dim), Matrix(v_count, dim)};
  const double half = 0.5 / static_cast<double>(dim);
  Rng rng(derive_seed(seed, 0x696e6974ULL));
  for (double& x : emb.u_emb.data()) x = rng.uniform(-half, half);
  for (double& x : emb.v_emb.data()) x = rng.uniform(-half, half);
  return emb;
}

void explicit_step(EmbeddingSet& emb, VertexId u, VertexId v, double weight, double gamma, double lr) {
  auto ui = emb.u_emb.row(u);
  auto vj = emb.v_emb.row(v);
  const double g = lr * gamma * weight * (1.0 - sigmoid(dot(ui, vj)));
  if (g == 0) return;
  for (std::size_t k = 0; k < ui.size(); ++k) {
    const double a = ui[k];
    const double b = vj[k];
    ui[k] = a + g * b;
    vj[k] = b + g * a;
  }
  if (!finite(ui) || !finite(vj)) throw DivergenceError("explicit update produced a non-finite embedding");
}

void implicit_step(EmbeddingSet& emb, Side side, VertexId center, VertexId context,
                   std::span<const VertexId> negatives, double weight, double lr) {
  if (negatives.empty()) throw ConfigError("implicit_step needs at least one negative");
  Matrix& centers = emb.embeddings(side);
  Matrix& ctx = emb.contexts(side);
  auto c = centers.row(center);
  const std::vector<double> c0(c.begin(), c.end());

  // Scaled gradients g_z = lr * weight * (I(z) - sigmoid(c . theta_z)),
  // all from pre-update vectors.
  std::vector<VertexId> targets;
  targets.reserve(negatives.size() + 1);
  targets.push_back(context);
  for (VertexId z : negatives) {
    if (z == context) throw ConfigError("a negative sample equals the positive context");
    targets.push_back(z);
  }
  std::vector<double> g(targets.size());
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const double label = t == 0 ? 1.0 : 0.0;
    g[t] = lr * weight * (label - sigmoid(dot(c0, ctx.row(targets[t]))));
  }
  std::vector<double> center_delta(c0.size(), 0.0);
  for (std::size_t t = 0; t < targets.size(); ++t) axpy(g[t], ctx.row(targets[t]), center_delta);
  for (std::size_t t = 0; t < targets.size(); ++t) axpy(g[t], c0, ctx.row(targets[t]));
  axpy(1.0, center_delta, c);

  if (!finite(c)) throw DivergenceError("implicit update produced a non-finite embedding");
  for (VertexId z : targets)
    if (!finite(ctx.row(z))) throw DivergenceError("implicit update produced a non-finite context vector");
}

double explicit_objective(const BipartiteGraph& graph, const EmbeddingSet& emb) {
  double o1 = 0.0;
  for (const Edge& e : graph.edges()) o1 -= e.weight * log_sigmoid(dot(emb.u_emb.row(e.u), emb.v_emb.row(e.v)));
  return o1;
}

ObjectiveValues objective_components(const BipartiteGraph& graph, const ImplicitInputs& inputs,
                                     const EmbeddingSet& emb, const TrainConfig& config) {
  ObjectiveValues out;
  out.o1 = explicit_objective(graph, emb);
  Rng rng(derive_seed(config.seed, 0x6f626a65ULL));
  if (inputs.u_stats && inputs.u_sampler)
    out.log_o2 = implicit_proxy(Side::U, *inputs.u_stats, *inputs.u_sampler, emb, config.ns, rng);
  if (inputs.v_stats && inputs.v_sampler)
    out.log_o3 = implicit_proxy(Side::V, *inputs.v_stats, *inputs.v_sampler, emb, config.ns, rng);
  return out;
}

EmbeddingSet train(const BipartiteGraph& graph, const ImplicitInputs& inputs, const TrainConfig& config,
                   EmbeddingSet emb, const EpochCallback& on_epoch) {
  config.validate();
  if (emb.u_emb.rows() != graph.u_count() || emb.v_emb.rows() != graph.v_count())
    throw ConfigError("embedding shape does not match the graph");
  const bool implicit = config.alpha > 0 || config.beta > 0;
  if (implicit && (!inputs.u_stats || !inputs.v_stats || !inputs.u_sampler || !inputs.v_sampler))
    throw ConfigError("implicit training needs corpus statistics and negative samplers for both sides");
  if (implicit && (inputs.u_stats->window() != config.ws || inputs.v_stats->window() != config.ws))
    throw ConfigError("corpus statistics were built with a different window size");

  std::optional<ContextSampler> u_contexts;
  std::optional<ContextSampler> v_contexts;
  if (implicit) {
    u_contexts.emplace(*inputs.u_stats);
    v_contexts.emplace(*inputs.v_stats);
  }

  Rng rng(derive_seed(config.seed, 0x7472616eULL));
  const auto edges = graph.edges();
  std::vector<std::size_t> order(edges.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle(order, rng);
    for (std::size_t idx : order) {
      const Edge& e = edges[idx];
      explicit_step(emb, e.u, e.v, e.weight, config.gamma, config.lr);
      if (implicit) {
        implicit_phase(emb, Side::U, e.u, *u_contexts, *inputs.u_sampler, config, config.alpha, rng);
        implicit_phase(emb, Side::V, e.v, *v_contexts, *inputs.v_sampler, config, config.beta, rng);
      }
    }
    if (on_epoch) on_epoch(epoch, emb);
  }
  return emb;
}

void write_embeddings(std::ostream& out, const Matrix& vectors, const std::vector<std::string>& tokens) {
  if (tokens.size() != vectors.rows()) throw ConfigError("token count does not match embedding rows");
  out << vectors.rows() << ' ' << vectors.cols() << '\n';
  for (std::size_t i = 0; i < vectors.rows(); ++i) {
    out << tokens[i];
    for (double x : vectors.row(i)) out << ' ' << format_double(x);
    out << '\n';
  }
}

Matrix read_embeddings(std::istream& in, std::vector<std::string>* tokens) {
  std::size_t rows = 0, cols = 0;
  if (!(in >> rows >> cols)) throw InputError("embedding file: missing 'count dim' header");
  Matrix m(rows, cols);
  if (tokens) tokens->clear();
  for (std::size_t i = 0; i < rows; ++i) {
    std::string token;
    if (!(in >> token)) throw InputError("embedding file: truncated at row " + std::to_string(i));
    if (tokens) tokens->push_back(token);
    for (std::size_t k = 0; k < cols; ++k) {
      std::string field;
      if (!(in >> field)) throw InputError("embedding file: truncated at row " + std::to_string(i));
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), m(i, k));
      if (ec != std::errc() || ptr != field.data() + field.size())
        throw InputError("embedding file: bad number '" + field + "'");
    }
  }
  return m;
}

}  // namespace bine
