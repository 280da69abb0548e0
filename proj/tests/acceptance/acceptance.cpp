// Prints one PASS/FAIL line per acceptance criterion; exits nonzero if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "bine/centrality.hpp"
#include "bine/cli.hpp"
#include "bine/eval.hpp"
#include "bine/mf.hpp"
#include "bine/negatives.hpp"
#include "bine/pipeline.hpp"
#include "bine/trainer.hpp"
#include "bine/walks.hpp"
#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"

using namespace bine;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string num(double x) {
  std::ostringstream s;
  s.precision(6);
  s << x;
  return s.str();
}

double rel_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    norm += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max(std::sqrt(norm), 1e-12);
}

struct BenchmarkCorpus {
  BipartiteGraph graph = fixtures::benchmark_graph();
  HomogeneousProjection projection = project_second_order(graph, Side::U);
  Corpus corpus;
  CorpusStats stats;
  int ws = 5;

  BenchmarkCorpus() {
    WalkConfig wc;
    wc.max_walks = 60;
    wc.min_walks = 60;
    wc.stop_prob = 0.001;
    wc.max_len = 5000;
    wc.seed = 11;
    corpus = generate_corpus(projection, compute_centrality(graph).u, wc);
    stats = cooccurrence_counts(corpus, ws, graph.u_count());
  }
};

const BenchmarkCorpus& benchmark() {
  static const BenchmarkCorpus b;
  return b;
}

Outcome corpus_convergence() {
  const auto& b = benchmark();
  const Eigen::MatrixXd s = power_sum(b.projection, b.ws);
  const TransitionMatrix t(b.projection);
  double cond = 0.0, freq = 0.0;
  for (VertexId w = 0; w < b.graph.u_count(); ++w) {
    const double cw = static_cast<double>(b.stats.center_count(w));
    for (VertexId c = 0; c < b.graph.u_count(); ++c)
      cond = std::max(cond, std::abs(static_cast<double>(b.stats.count(w, c)) / cw - s(w, c)));
    freq = std::max(freq, std::abs(cw / static_cast<double>(b.stats.total()) - t.stationary(w)));
  }
  const bool enough = b.corpus.transitions() >= 1000000;
  return {enough && cond <= 0.02 && freq <= 0.02,
          "transitions " + std::to_string(b.corpus.transitions()) + ", max cond. gap " + num(cond) +
              " (<= 0.02), max freq. gap " + num(freq) + " (<= 0.02)"};
}

Outcome gradient_fidelity() {
  Rng rng(2718);
  const double h = 1e-5;
  double worst_explicit = 0.0, worst_implicit = 0.0, worst_logistic = 0.0;

  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 1 + rng.index(16);
    EmbeddingSet emb = init_embeddings(1, 1, d, trial);
    for (double& x : emb.u_emb.data()) x = 0.5 * rng.normal();
    for (double& x : emb.v_emb.data()) x = 0.5 * rng.normal();
    const double w = rng.uniform(0.1, 3.0), gamma = rng.uniform(0.1, 2.0), lr = 1e-3;
    auto f = [&](const std::vector<double>& u, const std::vector<double>& v) { return w * log_sigmoid(dot(u, v)); };
    const std::vector<double> u0(emb.u_emb.data().begin(), emb.u_emb.data().end());
    const std::vector<double> v0(emb.v_emb.data().begin(), emb.v_emb.data().end());
    EmbeddingSet next = emb;
    explicit_step(next, 0, 0, w, gamma, lr);
    std::vector<double> analytic, fd;
    for (std::size_t k = 0; k < d; ++k) analytic.push_back((next.u_emb(0, k) - u0[k]) / (lr * gamma));
    for (std::size_t k = 0; k < d; ++k) analytic.push_back((next.v_emb(0, k) - v0[k]) / (lr * gamma));
    for (int which = 0; which < 2; ++which) {
      for (std::size_t k = 0; k < d; ++k) {
        auto up = u0, vp = v0, um = u0, vm = v0;
        (which == 0 ? up : vp)[k] += h;
        (which == 0 ? um : vm)[k] -= h;
        fd.push_back((f(up, vp) - f(um, vm)) / (2 * h));
      }
    }
    worst_explicit = std::max(worst_explicit, rel_error(analytic, fd));
  }

  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 1 + rng.index(16);
    const std::size_t n = 8;
    EmbeddingSet emb = init_embeddings(n, 1, d, trial);
    for (double& x : emb.u_emb.data()) x = 0.5 * rng.normal();
    for (double& x : emb.u_ctx.data()) x = 0.5 * rng.normal();
    const auto center = static_cast<VertexId>(rng.index(n));
    const auto context = static_cast<VertexId>(rng.index(n));
    std::vector<VertexId> negatives;
    const std::size_t count = 1 + rng.index(5);
    while (negatives.size() < count) {
      const auto z = static_cast<VertexId>(rng.index(n));
      if (z != context) negatives.push_back(z);
    }
    const double weight = rng.uniform(0.1, 2.0), lr = 1e-3;
    auto objective = [&](const Matrix& centers, const Matrix& ctx) {
      double j = log_sigmoid(dot(centers.row(center), ctx.row(context)));
      for (VertexId z : negatives) j += log_sigmoid(-dot(centers.row(center), ctx.row(z)));
      return weight * j;
    };
    EmbeddingSet next = emb;
    implicit_step(next, Side::U, center, context, negatives, weight, lr);
    std::vector<double> analytic, fd;
    for (std::size_t k = 0; k < d; ++k) {
      analytic.push_back((next.u_emb(center, k) - emb.u_emb(center, k)) / lr);
      Matrix plus = emb.u_emb, minus = emb.u_emb;
      plus(center, k) += h;
      minus(center, k) -= h;
      fd.push_back((objective(plus, emb.u_ctx) - objective(minus, emb.u_ctx)) / (2 * h));
    }
    for (VertexId z = 0; z < n; ++z) {
      for (std::size_t k = 0; k < d; ++k) {
        analytic.push_back((next.u_ctx(z, k) - emb.u_ctx(z, k)) / lr);
        Matrix plus = emb.u_ctx, minus = emb.u_ctx;
        plus(z, k) += h;
        minus(z, k) -= h;
        fd.push_back((objective(emb.u_emb, plus) - objective(emb.u_emb, minus)) / (2 * h));
      }
    }
    worst_implicit = std::max(worst_implicit, rel_error(analytic, fd));
  }

  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t rows = 20, cols = 2 + rng.index(7);
    Matrix x(rows, cols);
    for (double& v : x.data()) v = rng.normal();
    std::vector<int> labels(rows);
    for (std::size_t i = 0; i < rows; ++i) labels[i] = i % 2 == 0 ? 1 : static_cast<int>(rng.index(2));
    LogisticModel model;
    for (std::size_t k = 0; k < cols; ++k) model.weights.push_back(rng.normal());
    model.bias = rng.normal();
    const double l2 = rng.uniform(0.0, 0.5);
    std::vector<double> grad;
    const double grad_bias = logistic_gradient(x, labels, model, l2, grad);
    std::vector<double> analytic = grad, fd;
    analytic.push_back(grad_bias);
    for (std::size_t k = 0; k <= cols; ++k) {
      LogisticModel plus = model, minus = model;
      (k < cols ? plus.weights[k] : plus.bias) += h;
      (k < cols ? minus.weights[k] : minus.bias) -= h;
      fd.push_back((logistic_objective(x, labels, plus, l2) - logistic_objective(x, labels, minus, l2)) / (2 * h));
    }
    worst_logistic = std::max(worst_logistic, rel_error(analytic, fd));
  }

  const double worst = std::max({worst_explicit, worst_implicit, worst_logistic});
  return {worst <= 1e-4, "max rel. error explicit " + num(worst_explicit) + ", implicit " + num(worst_implicit) +
                             ", logistic " + num(worst_logistic) + " (<= 1e-4)"};
}

Outcome closed_form_consistency() {
  const auto& b = benchmark();
  const LshIndex lsh(b.graph, Side::U, LshParams{});
  const ImplicitMatrix analytic = analytic_implicit_matrix(b.projection, b.ws, 4, lsh);
  const ImplicitMatrix empirical = empirical_implicit_matrix(b.stats, 4, lsh);
  double worst = 0.0;
  std::size_t shared = 0;
  for (const SparseEntry& e : analytic.entries()) {
    const double other = empirical.value(e.row, e.col);
    if (other == 0.0) continue;
    ++shared;
    worst = std::max(worst, std::abs(other - e.value));
  }
  return {shared > 0 && worst <= 0.05, std::to_string(shared) + " shared entries, max abs gap " + num(worst) +
                                           " (<= 0.05)"};
}

Outcome mf_online_equivalence() {
  const BipartiteGraph g = fixtures::planted_two_block();
  RunConfig online;
  online.resolve_seeds();
  RunConfig mf = online;
  mf.method = EmbedMethod::Mf;
  mf.dim = 4;
  double map_online = 0.0, map_mf = 0.0, map_random = 0.0;
  const int folds = online.split.folds;
  for (int fold = 0; fold < folds; ++fold) {
    const EdgeSplit split = split_edges(g, online.split, fold);
    map_online += topk_metrics(embed(split.train, online), split.train, split.test).map;
    map_mf += topk_metrics(embed(split.train, mf), split.train, split.test).map;
    const EmbeddingSet random = init_embeddings(g.u_count(), g.v_count(), online.dim, 1000 + fold);
    map_random += topk_metrics(random, split.train, split.test).map;
  }
  map_online /= folds;
  map_mf /= folds;
  map_random /= folds;
  return {map_online >= 0.9 && map_mf >= 0.9 && map_random <= 0.35,
          "mean MAP@10 online " + num(map_online) + ", mf " + num(map_mf) + " (>= 0.9), random " + num(map_random) +
              " (<= 0.35) over " + std::to_string(folds) + " folds"};
}

Outcome power_law_preservation() {
  const BipartiteGraph g = fixtures::one_sided_scale_free(2000, 500, 8000, 2.5, 1);
  RunConfig config;
  config.resolve_seeds();
  const Corpus corpus = build_corpus(g, Side::U, compute_centrality(g), config);
  std::vector<std::uint64_t> degrees(g.u_count());
  for (VertexId i = 0; i < g.u_count(); ++i) degrees[i] = g.neighbors(Side::U, i).size();
  const double degree_slope = power_law_slope(degrees, config.binning);
  const double corpus_slope = power_law_slope(occurrence_counts(corpus, g.u_count()), config.binning);
  const double gap = std::abs(corpus_slope - degree_slope);
  const std::size_t vertices = g.u_count() + g.v_count();
  return {vertices >= 2000 && gap <= 0.15, std::to_string(vertices) + " vertices, degree slope " +
                                               num(degree_slope) + ", corpus slope " + num(corpus_slope) +
                                               ", gap " + num(gap) + " (<= 0.15)"};
}

Outcome banding_law() {
  const int k = 2, b = 8, trials = 10000;
  struct Case {
    std::size_t inter, uni;
  };
  std::string detail;
  bool pass = true;
  for (Case c : {Case{1, 10}, Case{2, 4}, Case{9, 10}}) {
    const BipartiteGraph g = fixtures::jaccard_pair(c.inter, c.uni);
    const double s = static_cast<double>(c.inter) / static_cast<double>(c.uni);
    int hits = 0;
    double jaccard = 0.0;
    for (int t = 0; t < trials; ++t) {
      const LshIndex index(g, Side::U, LshParams{1, k, b, static_cast<std::uint64_t>(t), ShingleScope::BothSides});
      hits += index.share_bucket(0, 1) ? 1 : 0;
      jaccard = index.jaccard(0, 1);
    }
    const double rate = static_cast<double>(hits) / trials;
    const double expected = 1.0 - std::pow(1.0 - std::pow(s, k), b);
    pass = pass && std::abs(jaccard - s) < 1e-12 && std::abs(rate - expected) <= 0.03;
    detail += (detail.empty() ? "" : ", ") + ("s=" + num(s) + ": " + num(rate) + " vs " + num(expected));
  }
  return {pass, detail + " (+-0.03)"};
}

Outcome metric_oracles() {
  Rng rng(31337);
  int auc_mismatch = 0, topk_mismatch = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.index(199);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = trial % 2 == 0 ? std::round(rng.uniform() * 10) / 10 : rng.uniform();
      labels[i] = static_cast<int>(rng.index(2));
    }
    labels[0] = 1;
    labels[1] = 0;
    const AucResult r = binary_auc(scores, labels);
    if (r.roc != oracles::pairwise_auc(scores, labels) || r.pr != oracles::threshold_ap(scores, labels))
      ++auc_mismatch;
  }
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t nu = 2 + rng.index(20), nv = 3 + rng.index(30);
    const BipartiteGraph g = fixtures::random_graph(nu, nv, 0.3, rng);
    const EdgeSplit split = split_edges(g, SplitSpec{0.6, 1, static_cast<std::uint64_t>(trial)}, 0);
    const std::size_t d = 1 + rng.index(4);
    EmbeddingSet emb = init_embeddings(nu, nv, d, trial);
    for (double& x : emb.u_emb.data()) x = trial % 3 == 0 ? static_cast<double>(rng.index(3)) : rng.normal();
    for (double& x : emb.v_emb.data()) x = trial % 3 == 0 ? static_cast<double>(rng.index(3)) : rng.normal();
    const int k = 1 + static_cast<int>(rng.index(12));
    for (bool test_items : {false, true}) {
      const RankingMetrics m = topk_metrics(emb, split.train, split.test, k,
                                            test_items ? CandidatePolicy::TestItems : CandidatePolicy::ExcludeTrain);
      const oracles::Ranking o = oracles::topk(emb, split.train, split.test, k, test_items);
      if (m.precision != o.precision || m.recall != o.recall || m.f1 != o.f1 || m.ndcg != o.ndcg || m.map != o.map ||
          m.mrr != o.mrr)
        ++topk_mismatch;
    }
  }

  // One user, five items scored 5..1, test items at ranks 1 and 3.
  EmbeddingSet emb = init_embeddings(1, 5, 1, 0);
  emb.u_emb(0, 0) = 1.0;
  for (VertexId v = 0; v < 5; ++v) emb.v_emb(v, 0) = 5.0 - v;
  const BipartiteGraph train(1, 5, {});
  const std::vector<Edge> test{{0, 0, 1.0}, {0, 2, 1.0}};
  const RankingMetrics hand = topk_metrics(emb, train, test, 10);
  const double ap_gap = std::abs(hand.map - 5.0 / 6.0);
  const double ndcg_gap = std::abs(hand.ndcg - (1.0 + 1.0 / std::log2(4.0)) / (1.0 + 1.0 / std::log2(3.0)));
  return {auc_mismatch == 0 && topk_mismatch == 0 && ap_gap <= 1e-12 && ndcg_gap <= 1e-12,
          std::to_string(auc_mismatch) + " auc and " + std::to_string(topk_mismatch) +
              " top-k mismatches over 200 instances each, hand AP gap " + num(ap_gap) + ", NDCG gap " +
              num(ndcg_gap) + " (<= 1e-12)"};
}

Outcome objective_monotonicity() {
  const BipartiteGraph g = fixtures::toy_graph();
  TrainConfig config;
  config.alpha = 0.0;
  config.beta = 0.0;
  config.lr = 0.01;
  config.epochs = 10;
  EmbeddingSet emb = init_embeddings(g.u_count(), g.v_count(), 8, 3);
  std::vector<double> o1{explicit_objective(g, emb)};
  train(g, {}, config, emb, [&](int, const EmbeddingSet& e) { o1.push_back(explicit_objective(g, e)); });
  bool strict = true;
  for (std::size_t i = 1; i < o1.size(); ++i) strict = strict && o1[i] < o1[i - 1];

  LshParams lp;
  const ImplicitMatrix mu = analytic_implicit_matrix(project_second_order(g, Side::U), 5, 4, LshIndex(g, Side::U, lp));
  const ImplicitMatrix mv = analytic_implicit_matrix(project_second_order(g, Side::V), 5, 4, LshIndex(g, Side::V, lp));
  FactorizeConfig fc;
  fc.mode = FactorizeMode::Sgd;
  fc.dim = 4;
  const Factorization f = factorize(assemble_block(g, mu, mv, 0.01, 0.01), fc);
  bool non_increasing = !f.epoch_loss.empty();
  for (std::size_t i = 1; i < f.epoch_loss.size(); ++i)
    non_increasing = non_increasing && f.epoch_loss[i] <= f.epoch_loss[i - 1];
  return {strict && non_increasing, "O1 " + num(o1.front()) + " -> " + num(o1.back()) +
                                        (strict ? " strictly decreasing" : " NOT strictly decreasing") +
                                        " over 10 epochs; sgd loss " + num(f.epoch_loss.front()) + " -> " +
                                        num(f.epoch_loss.back()) +
                                        (non_increasing ? " non-increasing" : " NOT non-increasing") + " over " +
                                        std::to_string(f.epoch_loss.size()) + " epochs"};
}

std::string read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / ("bine_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string edges = (root / "planted.tsv").string();
  {
    std::ofstream out(edges);
    write_edge_list(out, fixtures::planted_two_block());
  }
  const std::vector<std::vector<std::string>> commands{
      {"train", "--dim", "16", "--seed", "7", "--epochs", "10"},
      {"train", "--dim", "8", "--seed", "7", "--epochs", "5", "--walk-mode", "two-step", "--threads", "3",
       "--negatives", "frequency"},
      {"train-mf", "--dim", "4", "--seed", "7"},
      {"train-mf", "--dim", "4", "--seed", "7", "--mf-mode", "sgd", "--mf-epochs", "20", "--implicit", "empirical"},
      {"eval-rec", "--dim", "8", "--seed", "7", "--epochs", "5", "--folds", "2"},
      {"eval-lp", "--dim", "4", "--seed", "7", "--method", "mf", "--folds", "2"},
      {"walk-stats", "--seed", "7", "--threads", "2", "--save-corpus"},
  };
  std::size_t files = 0;
  std::string first_failure;
  for (std::size_t c = 0; c < commands.size(); ++c) {
    std::vector<std::string> dirs;
    for (int run = 0; run < 2; ++run) {
      const fs::path dir = root / ("cmd" + std::to_string(c)) / ("run" + std::to_string(run));
      auto args = commands[c];
      args.insert(args.end(), {"--edges", edges, "--output", dir.string()});
      std::ostringstream out, err;
      const int code = cli::run(args, out, err);
      if (code != 0 && first_failure.empty()) first_failure = commands[c][0] + " exited " + std::to_string(code);
      dirs.push_back(dir.string());
    }
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
      ++files;
      const fs::path twin = fs::path(dirs[1]) / entry.path().filename();
      if (!fs::exists(twin) || read_all(entry.path()) != read_all(twin))
        if (first_failure.empty()) first_failure = commands[c][0] + " " + entry.path().filename().string() + " differs";
    }
  }
  fs::remove_all(root);
  return {first_failure.empty() && files > 0,
          std::to_string(commands.size()) + " commands, " + std::to_string(files) + " artifacts compared" +
              (first_failure.empty() ? ", all byte-identical" : ": " + first_failure)};
}

Outcome hits_oracle() {
  Rng rng(4242);
  double worst = 0.0;
  int unconverged = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const BipartiteGraph g = fixtures::random_graph(3 + rng.index(28), 3 + rng.index(28), rng.uniform(0.1, 0.6), rng);
    const CentralityResult r = compute_centrality(g, CentralityMethod::Hits, 1e-12, 100000);
    const oracles::Hits o = oracles::hits(g, 1e-12, 100000);
    if (!r.converged) ++unconverged;
    for (std::size_t i = 0; i < o.hub.size(); ++i) worst = std::max(worst, std::abs(r.u.scores[i] - o.hub[i]));
    for (std::size_t j = 0; j < o.authority.size(); ++j)
      worst = std::max(worst, std::abs(r.v.scores[j] - o.authority[j]));
  }
  return {worst <= 1e-8 && unconverged == 0,
          "50 graphs, max abs gap " + num(worst) + " (<= 1e-8), " + std::to_string(unconverged) + " unconverged"};
}

}  // namespace

int main() {
  set_warnings_enabled(false);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"corpus convergence", corpus_convergence},
      {"gradient fidelity", gradient_fidelity},
      {"closed-form consistency", closed_form_consistency},
      {"mf / online equivalence", mf_online_equivalence},
      {"power-law preservation", power_law_preservation},
      {"lsh banding law", banding_law},
      {"metric oracles", metric_oracles},
      {"objective monotonicity", objective_monotonicity},
      {"determinism", determinism},
      {"hits oracle", hits_oracle},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << ' ' << (i + 1) << ' ' << criteria[i].first << ": " << o.detail
              << " [" << num(secs) << " s]" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
