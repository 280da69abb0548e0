#include "bine/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "bine/pipeline.hpp"

namespace bine::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

struct Input {
  BipartiteGraph graph;
  ordered_json summary;
};

Input read_input(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw InputError("cannot open edge list '" + path + "'");
  std::ostringstream buffer;
  buffer << file.rdbuf();
  const std::string bytes = buffer.str();
  std::istringstream in(bytes);
  Input input{load_edge_list(in), {}};
  std::ostringstream hex;
  hex << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(bytes);
  input.summary = {{"path", path},
                   {"fnv1a64", hex.str()},
                   {"u_count", input.graph.u_count()},
                   {"v_count", input.graph.v_count()},
                   {"edges", input.graph.edge_count()}};
  return input;
}

fs::path prepare_output(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("output directory '" + dir + "' is not writable");
  return fs::path(dir);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
}

std::string json_text(const ordered_json& j) { return j.dump(2) + "\n"; }

void write_embedding_files(const fs::path& dir, const BipartiteGraph& graph, const EmbeddingSet& emb) {
  std::ostringstream u, v;
  write_embeddings(u, emb.u_emb, graph.tokens(Side::U));
  write_embeddings(v, emb.v_emb, graph.tokens(Side::V));
  write_file(dir / "u.emb", u.str());
  write_file(dir / "v.emb", v.str());
}

void write_manifest(const fs::path& dir, const RunConfig& config, const Input& input,
                    const std::vector<std::string>& artifacts, const ordered_json& results = ordered_json::object()) {
  ordered_json m;
  m["command"] = config.command;
  m["config"] = config.to_json();
  m["input"] = input.summary;
  m["artifacts"] = artifacts;
  m["results"] = results;
  write_file(dir / "manifest.json", json_text(m));
}

int cmd_train(RunConfig& config, std::ostream& out) {
  const Input input = read_input(config.edges);
  const fs::path dir = prepare_output(config.output);
  std::vector<double> o1;
  const EmbeddingSet emb = embed_online(input.graph, config, [&](int, const EmbeddingSet& e) {
    o1.push_back(explicit_objective(input.graph, e));
  });
  write_embedding_files(dir, input.graph, emb);
  write_manifest(dir, config, input, {"u.emb", "v.emb"}, {{"explicit_objective", o1}});
  out << "wrote " << (dir / "u.emb").string() << " and " << (dir / "v.emb").string() << '\n';
  return kSuccess;
}

int cmd_train_mf(RunConfig& config, std::ostream& out) {
  const Input input = read_input(config.edges);
  const fs::path dir = prepare_output(config.output);
  const Factorization f = embed_mf(input.graph, config);
  write_embedding_files(dir, input.graph, f.embeddings);
  ordered_json results = ordered_json::object();
  if (config.mf.mode == FactorizeMode::Sgd) results["epoch_loss"] = f.epoch_loss;
  write_manifest(dir, config, input, {"u.emb", "v.emb"}, results);
  out << "wrote " << (dir / "u.emb").string() << " and " << (dir / "v.emb").string() << '\n';
  return kSuccess;
}

int cmd_eval(RunConfig& config, Task task, std::ostream& out) {
  const Input input = read_input(config.edges);
  const fs::path dir = prepare_output(config.output);
  const ordered_json echo = config.to_json();
  std::vector<EvalReport> reports;
  std::vector<std::string> artifacts;
  for (int fold = 0; fold < config.split.folds; ++fold) {
    const EdgeSplit split = split_edges(input.graph, config.split, fold);
    const EmbeddingSet emb = embed(split.train, config);
    EvalReport report =
        task == Task::Recommendation
            ? make_report(task, fold, echo, topk_metrics(emb, split.train, split.test, config.k, config.candidates),
                          config.k)
            : make_report(task, fold, echo,
                          evaluate_link_prediction(input.graph, split, emb, config.logistic,
                                                   derive_seed(config.eval_seed, static_cast<std::uint64_t>(fold))));
    const std::string name = "fold_" + std::to_string(fold) + ".json";
    write_file(dir / name, json_text(report.to_json()));
    artifacts.push_back(name);
    reports.push_back(std::move(report));
  }
  const EvalReport mean = mean_report(reports);
  write_file(dir / "mean.json", json_text(mean.to_json()));
  artifacts.push_back("mean.json");
  write_manifest(dir, config, input, artifacts, mean.to_json()["metrics"]);
  for (const auto& [name, value] : mean.metrics) out << name << ' ' << value << '\n';
  return kSuccess;
}

int cmd_walk_stats(RunConfig& config, bool save_corpus, std::ostream& out) {
  const Input input = read_input(config.edges);
  const fs::path dir = prepare_output(config.output);
  const CentralityResult centrality = compute_centrality(input.graph, config.centrality);
  ordered_json report;
  report["config"] = config.to_json();
  std::vector<std::string> artifacts{"walk_stats.json"};
  for (Side side : {Side::U, Side::V}) {
    const std::size_t n = input.graph.count(side);
    const Corpus corpus = build_corpus(input.graph, side, centrality, config);
    std::vector<std::uint64_t> degrees(n);
    for (VertexId i = 0; i < n; ++i) degrees[i] = input.graph.neighbors(side, i).size();
    const auto frequencies = occurrence_counts(corpus, n);

    ordered_json s;
    s["vertices"] = n;
    s["walks"] = corpus.sequences.size();
    s["positions"] = corpus.positions();
    try {
      const double degree_slope = power_law_slope(degrees, config.binning);
      const double corpus_slope = power_law_slope(frequencies, config.binning);
      s["degree_slope"] = degree_slope;
      s["corpus_slope"] = corpus_slope;
      s["abs_difference"] = std::abs(corpus_slope - degree_slope);
      out << to_string(side) << ": degree slope " << degree_slope << ", corpus slope " << corpus_slope << '\n';
    } catch (const ConfigError& e) {
      s["degree_slope"] = nullptr;
      s["corpus_slope"] = nullptr;
      s["abs_difference"] = nullptr;
      s["note"] = e.what();
      out << to_string(side) << ": " << e.what() << '\n';
    }
    report[std::string(to_string(side))] = s;
    if (save_corpus) {
      std::ostringstream text;
      write_corpus(text, corpus, input.graph.tokens(side));
      const std::string name = side == Side::U ? "corpus_u.txt" : "corpus_v.txt";
      write_file(dir / name, text.str());
      artifacts.push_back(name);
    }
  }
  write_file(dir / "walk_stats.json", json_text(report));
  write_manifest(dir, config, input, artifacts);
  return kSuccess;
}

template <class Enum>
CLI::CheckedTransformer choices(const std::map<std::string, Enum>& values) {
  return CLI::CheckedTransformer(values, CLI::ignore_case);
}

void add_common(CLI::App& cmd, RunConfig& c) {
  cmd.add_option("--edges", c.edges, "Edge list: u<TAB>v[<TAB>weight] per line")->required();
  cmd.add_option("-o,--output", c.output, "Output directory")->required();
  cmd.add_option("--seed", c.seed, "Master seed")->capture_default_str();
}

void add_walks(CLI::App& cmd, RunConfig& c) {
  cmd.add_option("--max-walks", c.walk.max_walks, "maxT, walks from the most central vertex")->capture_default_str();
  cmd.add_option("--min-walks", c.walk.min_walks, "minT, walks from every vertex")->capture_default_str();
  cmd.add_option("--stop-prob", c.walk.stop_prob, "p, walk stopping probability")->capture_default_str();
  cmd.add_option("--max-len", c.walk.max_len, "Hard cap on walk length")->capture_default_str();
  cmd.add_option("--threads", c.walk.threads, "Walk generation threads")->capture_default_str();
  cmd.add_option("--centrality", c.centrality, "hits or degree")
      ->transform(choices<CentralityMethod>({{"hits", CentralityMethod::Hits}, {"degree", CentralityMethod::Degree}}));
  cmd.add_option("--walk-mode", c.walk_mode, "projection or two-step")
      ->transform(choices<WalkMode>({{"projection", WalkMode::Projection}, {"two-step", WalkMode::TwoStep}}));
  cmd.add_option("--ws", c.train.ws, "Window size")->capture_default_str();
}

void add_online(CLI::App& cmd, RunConfig& c, std::optional<double>& gamma) {
  cmd.add_option("--dim", c.dim, "Embedding dimension")->capture_default_str();
  cmd.add_option("--alpha", c.train.alpha, "Weight of the U implicit objective")->capture_default_str();
  cmd.add_option("--beta", c.train.beta, "Weight of the V implicit objective")->capture_default_str();
  cmd.add_option("--gamma", gamma, "Weight of the explicit objective (default 0.1, or 1 for link prediction)");
  cmd.add_option("--task", c.task, "recommendation or link-prediction")
      ->transform(choices<Task>({{"recommendation", Task::Recommendation}, {"link-prediction", Task::LinkPrediction}}));
  cmd.add_option("--lr", c.train.lr, "SGD learning rate")->capture_default_str();
  cmd.add_option("--bs", c.train.bs, "Contexts drawn per vertex visit")->capture_default_str();
  cmd.add_option("--epochs", c.train.epochs, "Passes over the edges")->capture_default_str();
  cmd.add_option("--negatives", c.train.strategy, "lsh or frequency")
      ->transform(choices<NegativeStrategy>({{"lsh", NegativeStrategy::Lsh}, {"frequency", NegativeStrategy::Frequency}}));
}

void add_mf(CLI::App& cmd, RunConfig& c) {
  cmd.add_option("--alpha-prime", c.alpha_prime, "Scale of the U implicit block")->capture_default_str();
  cmd.add_option("--beta-prime", c.beta_prime, "Scale of the V implicit block")->capture_default_str();
  cmd.add_option("--mf-mode", c.mf.mode, "svd or sgd")
      ->transform(choices<FactorizeMode>({{"svd", FactorizeMode::Svd}, {"sgd", FactorizeMode::Sgd}}));
  cmd.add_option("--implicit", c.implicit, "auto, analytic or empirical")
      ->transform(choices<ImplicitSource>({{"auto", ImplicitSource::Auto},
                                           {"analytic", ImplicitSource::Analytic},
                                           {"empirical", ImplicitSource::Empirical}}));
  cmd.add_option("--mf-lr", c.mf.lr, "Factorization sgd learning rate")->capture_default_str();
  cmd.add_option("--mf-reg", c.mf.reg, "Factorization sgd L2 weight")->capture_default_str();
  cmd.add_option("--mf-epochs", c.mf.epochs, "Factorization sgd epochs")->capture_default_str();
}

void add_eval(CLI::App& cmd, RunConfig& c) {
  cmd.add_option("--method", c.method, "online or mf")
      ->transform(choices<EmbedMethod>({{"online", EmbedMethod::Online}, {"mf", EmbedMethod::Mf}}));
  cmd.add_option("--folds", c.split.folds, "Number of train/test splits")->capture_default_str();
  cmd.add_option("--train-fraction", c.split.train_fraction, "Fraction of edges used for training")
      ->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig config;
  std::optional<double> gamma;
  bool save_corpus = false;

  CLI::App app{"Bipartite network embedding"};
  app.require_subcommand(1);
  CLI::App* train = app.add_subcommand("train", "Train embeddings with walks and joint SGD");
  CLI::App* train_mf = app.add_subcommand("train-mf", "Train embeddings by matrix factorization");
  CLI::App* eval_lp = app.add_subcommand("eval-lp", "Link prediction over train/test folds");
  CLI::App* eval_rec = app.add_subcommand("eval-rec", "Top-k recommendation over train/test folds");
  CLI::App* walk_stats = app.add_subcommand("walk-stats", "Compare corpus and degree power-law slopes");

  for (CLI::App* cmd : {train, train_mf, eval_lp, eval_rec, walk_stats}) {
    add_common(*cmd, config);
    add_walks(*cmd, config);
    cmd->add_option("--lsh-rows", config.lsh_rows, "k, minhash rows per band")->capture_default_str();
    cmd->add_option("--lsh-bands", config.lsh_bands, "b, LSH bands")->capture_default_str();
    cmd->add_option("--shingle-scope", config.shingle_scope, "both or same")
        ->transform(choices<ShingleScope>({{"both", ShingleScope::BothSides}, {"same", ShingleScope::SameSide}}));
  }
  for (CLI::App* cmd : {train, train_mf, eval_lp, eval_rec}) {
    cmd->add_option("--ns", config.train.ns, "Negative samples per context")->capture_default_str();
    add_online(*cmd, config, gamma);
  }
  for (CLI::App* cmd : {train_mf, eval_lp, eval_rec}) add_mf(*cmd, config);
  for (CLI::App* cmd : {eval_lp, eval_rec}) add_eval(*cmd, config);
  eval_rec->add_option("--k", config.k, "Ranking cutoff")->capture_default_str();
  eval_rec->add_option("--candidates", config.candidates, "exclude-train or test-items")
      ->transform(choices<CandidatePolicy>(
          {{"exclude-train", CandidatePolicy::ExcludeTrain}, {"test-items", CandidatePolicy::TestItems}}));
  eval_lp->add_option("--lr-l2", config.logistic.l2, "Logistic regression L2 weight")->capture_default_str();
  eval_lp->add_option("--lr-rate", config.logistic.lr, "Logistic regression step size")->capture_default_str();
  eval_lp->add_option("--lr-epochs", config.logistic.epochs, "Logistic regression iterations")->capture_default_str();
  walk_stats->add_option("--binning", config.binning, "log2-tail, log2 or exact")
      ->transform(choices<SlopeBinning>(
          {{"log2-tail", SlopeBinning::Log2Tail}, {"log2", SlopeBinning::Log2}, {"exact", SlopeBinning::Exact}}));
  walk_stats->add_flag("--save-corpus", save_corpus, "Also write the walk corpora");

  std::vector<std::string> argv_storage{"bine"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const std::string& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsage;
  }

  try {
    if (eval_lp->parsed()) config.task = Task::LinkPrediction;
    if (eval_rec->parsed()) config.task = Task::Recommendation;
    config.train.gamma = gamma ? *gamma : (config.task == Task::LinkPrediction ? 1.0 : 0.1);
    if (train_mf->parsed()) config.method = EmbedMethod::Mf;
    for (CLI::App* cmd : {train, train_mf, eval_lp, eval_rec, walk_stats})
      if (cmd->parsed()) config.command = cmd->get_name();
    config.resolve_seeds();
    config.validate();

    if (train->parsed()) return cmd_train(config, out);
    if (train_mf->parsed()) return cmd_train_mf(config, out);
    if (eval_lp->parsed()) return cmd_eval(config, Task::LinkPrediction, out);
    if (eval_rec->parsed()) return cmd_eval(config, Task::Recommendation, out);
    return cmd_walk_stats(config, save_corpus, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kInput;
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kDivergence;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfig;
  }
}

}  // namespace bine::cli
