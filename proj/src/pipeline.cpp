#include "bine/pipeline.hpp"

#include <memory>
#include <optional>

#include "bine/random.hpp"

namespace bine {

namespace {

const char* name(CentralityMethod m) { return m == CentralityMethod::Hits ? "hits" : "degree"; }
const char* name(WalkMode m) { return m == WalkMode::Projection ? "projection" : "two-step"; }
const char* name(ShingleScope s) { return s == ShingleScope::BothSides ? "both" : "same"; }
const char* name(NegativeStrategy s) { return s == NegativeStrategy::Lsh ? "lsh" : "frequency"; }
const char* name(FactorizeMode m) { return m == FactorizeMode::Svd ? "svd" : "sgd"; }
const char* name(EmbedMethod m) { return m == EmbedMethod::Online ? "online" : "mf"; }
const char* name(CandidatePolicy p) { return p == CandidatePolicy::ExcludeTrain ? "exclude-train" : "test-items"; }
const char* name(SlopeBinning b) {
  switch (b) {
    case SlopeBinning::Exact: return "exact";
    case SlopeBinning::Log2: return "log2";
    default: return "log2-tail";
  }
}
const char* name(ImplicitSource s) {
  switch (s) {
    case ImplicitSource::Analytic: return "analytic";
    case ImplicitSource::Empirical: return "empirical";
    default: return "auto";
  }
}

LshParams lsh_params(const RunConfig& config) {
  return {config.train.ws, config.lsh_rows, config.lsh_bands, config.lsh_seed, config.shingle_scope};
}

struct SideInputs {
  CorpusStats stats;
  std::unique_ptr<LshIndex> lsh;
  std::unique_ptr<NegativeSampler> sampler;
};

SideInputs side_inputs(const BipartiteGraph& graph, Side side, const CentralityResult& centrality,
                       const RunConfig& config) {
  SideInputs in;
  in.stats = cooccurrence_counts(build_corpus(graph, side, centrality, config), config.train.ws, graph.count(side));
  if (config.train.strategy == NegativeStrategy::Lsh) {
    in.lsh = std::make_unique<LshIndex>(graph, side, lsh_params(config));
    in.sampler = std::make_unique<LshNegativeSampler>(*in.lsh);
  } else {
    in.sampler = std::make_unique<FrequencyNegativeSampler>(in.stats);
  }
  return in;
}

bool use_analytic(const BipartiteGraph& graph, const RunConfig& config) {
  if (config.implicit == ImplicitSource::Analytic) return true;
  if (config.implicit == ImplicitSource::Empirical) return false;
  return graph.u_count() <= kDensePowerSumLimit && graph.v_count() <= kDensePowerSumLimit;
}

}  // namespace

void RunConfig::resolve_seeds() {
  walk.seed = derive_seed(seed, 0x77616c6bULL);
  lsh_seed = derive_seed(seed, 0x6c7368ULL);
  train.seed = derive_seed(seed, 0x74726eULL);
  mf.seed = derive_seed(seed, 0x6d66ULL);
  split.seed = derive_seed(seed, 0x73706cULL);
  logistic.seed = derive_seed(seed, 0x6c6f67ULL);
  eval_seed = derive_seed(seed, 0x6576616cULL);
}

void RunConfig::validate() const {
  if (dim < 1) throw ConfigError("dim must be >= 1");
  walk.validate();
  train.validate();
  split.validate();
  if (lsh_rows < 1 || lsh_bands < 1) throw ConfigError("LSH rows and bands must be >= 1");
  if (!(alpha_prime >= 0 && beta_prime >= 0)) throw ConfigError("alpha' and beta' must be nonnegative");
  if (k < 1) throw ConfigError("k must be >= 1");
  if (mf.mode == FactorizeMode::Sgd && (!(mf.lr > 0) || mf.reg < 0 || mf.epochs < 0))
    throw ConfigError("invalid MF sgd parameters");
  if (!(logistic.l2 >= 0) || !(logistic.lr > 0) || logistic.epochs < 0)
    throw ConfigError("invalid logistic regression parameters");
}

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["edges"] = edges;
  j["seed"] = seed;
  j["dim"] = dim;
  j["task"] = to_string(task);
  j["centrality"] = name(centrality);
  j["walks"] = {{"mode", name(walk_mode)},   {"max_walks", walk.max_walks}, {"min_walks", walk.min_walks},
                {"stop_prob", walk.stop_prob}, {"max_len", walk.max_len},   {"threads", walk.threads},
                {"seed", walk.seed}};
  j["lsh"] = {{"rows", lsh_rows}, {"bands", lsh_bands}, {"scope", name(shingle_scope)}, {"seed", lsh_seed}};
  j["train"] = {{"alpha", train.alpha}, {"beta", train.beta}, {"gamma", train.gamma},
                {"lr", train.lr},       {"ns", train.ns},     {"ws", train.ws},
                {"bs", train.bs},       {"epochs", train.epochs}, {"negatives", name(train.strategy)},
                {"seed", train.seed}};
  j["mf"] = {{"alpha_prime", alpha_prime}, {"beta_prime", beta_prime}, {"implicit", name(implicit)},
             {"mode", name(mf.mode)},       {"lr", mf.lr},              {"reg", mf.reg},
             {"epochs", mf.epochs},         {"seed", mf.seed}};
  j["eval"] = {{"method", name(method)},
               {"folds", split.folds},
               {"train_fraction", split.train_fraction},
               {"split_seed", split.seed},
               {"k", k},
               {"candidates", name(candidates)},
               {"logistic", {{"l2", logistic.l2}, {"lr", logistic.lr}, {"epochs", logistic.epochs}, {"seed", logistic.seed}}},
               {"seed", eval_seed}};
  j["walk_stats"] = {{"binning", name(binning)}};
  return j;
}

Corpus build_corpus(const BipartiteGraph& graph, Side side, const CentralityResult& centrality,
                    const RunConfig& config) {
  const CentralityScores& scores = side == Side::U ? centrality.u : centrality.v;
  WalkConfig walk = config.walk;
  walk.seed = derive_seed(config.walk.seed, side == Side::U ? 0 : 1);
  if (config.walk_mode == WalkMode::TwoStep) return generate_corpus_two_step(graph, side, scores, walk);
  return generate_corpus(project_second_order(graph, side), scores, walk);
}

EmbeddingSet embed_online(const BipartiteGraph& graph, const RunConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  EmbeddingSet emb = init_embeddings(graph.u_count(), graph.v_count(), config.dim, config.train.seed);
  if (config.train.alpha == 0 && config.train.beta == 0) return train(graph, {}, config.train, std::move(emb), on_epoch);

  const CentralityResult centrality = compute_centrality(graph, config.centrality);
  const SideInputs u = side_inputs(graph, Side::U, centrality, config);
  const SideInputs v = side_inputs(graph, Side::V, centrality, config);
  const ImplicitInputs inputs{&u.stats, &v.stats, u.sampler.get(), v.sampler.get()};
  return train(graph, inputs, config.train, std::move(emb), on_epoch);
}

Factorization embed_mf(const BipartiteGraph& graph, const RunConfig& config) {
  config.validate();
  const LshIndex u_lsh(graph, Side::U, lsh_params(config));
  const LshIndex v_lsh(graph, Side::V, lsh_params(config));
  const int ws = config.train.ws;
  const int ns = config.train.ns;

  auto implicit = [&](Side side, const LshIndex& lsh, const CentralityResult* centrality) {
    if (!centrality) return analytic_implicit_matrix(project_second_order(graph, side), ws, ns, lsh);
    const Corpus corpus = build_corpus(graph, side, *centrality, config);
    return empirical_implicit_matrix(cooccurrence_counts(corpus, ws, graph.count(side)), ns, lsh);
  };

  std::optional<CentralityResult> centrality;
  if (!use_analytic(graph, config)) centrality = compute_centrality(graph, config.centrality);
  const CentralityResult* c = centrality ? &*centrality : nullptr;
  const ImplicitMatrix m_u = implicit(Side::U, u_lsh, c);
  const ImplicitMatrix m_v = implicit(Side::V, v_lsh, c);

  FactorizeConfig fc = config.mf;
  fc.dim = config.dim;
  return factorize(assemble_block(graph, m_u, m_v, config.alpha_prime, config.beta_prime), fc);
}

EmbeddingSet embed(const BipartiteGraph& graph, const RunConfig& config) {
  if (config.method == EmbedMethod::Mf) return embed_mf(graph, config).embeddings;
  return embed_online(graph, config);
}

}  // namespace bine
