#include "bine/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "bine/format.hpp"

namespace bine {

namespace {

struct PairHash {
  std::size_t operator()(std::pair<VertexId, VertexId> p) const {
    return std::hash<std::uint64_t>{}((std::uint64_t{p.first} << 32) | p.second);
  }
};

std::vector<std::string> default_tokens(std::size_t n) {
  std::vector<std::string> tokens;
  tokens.reserve(n);
  for (std::size_t i = 0; i < n; ++i) tokens.push_back(std::to_string(i));
  return tokens;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  if (line.find('\t') != std::string_view::npos) {
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab - start));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    // Tolerate trailing tabs.
    while (!fields.empty() && fields.back().empty()) fields.pop_back();
    return fields;
  }
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    if (i == line.size()) break;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ') ++i;
    fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

}  // namespace

BipartiteGraph::BipartiteGraph(std::size_t u_count, std::size_t v_count, std::vector<Edge> edges,
                               std::vector<std::string> u_tokens, std::vector<std::string> v_tokens)
    : u_count_(u_count), v_count_(v_count) {
  std::unordered_map<std::pair<VertexId, VertexId>, std::size_t, PairHash> position;
  for (const Edge& e : edges) {
    if (e.u >= u_count || e.v >= v_count) throw ConfigError("edge endpoint out of range");
    if (!std::isfinite(e.weight) || e.weight < 0) throw ConfigError("edge weight must be finite and >= 0");
    if (e.weight == 0) continue;
    auto [it, inserted] = position.try_emplace({e.u, e.v}, edges_.size());
    if (inserted)
      edges_.push_back(e);
    else
      edges_[it->second].weight += e.weight;
  }

  auto build = [&](std::size_t n, auto from, auto to, Adjacency& adj, std::vector<double>& degree) {
    adj.offsets.assign(n + 1, 0);
    for (const Edge& e : edges_) ++adj.offsets[from(e) + 1];
    for (std::size_t i = 0; i < n; ++i) adj.offsets[i + 1] += adj.offsets[i];
    adj.entries.resize(edges_.size());
    std::vector<std::size_t> cursor(adj.offsets.begin(), adj.offsets.end() - 1);
    for (const Edge& e : edges_) adj.entries[cursor[from(e)]++] = {to(e), e.weight};
    degree.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      auto first = adj.entries.begin() + static_cast<std::ptrdiff_t>(adj.offsets[i]);
      auto last = adj.entries.begin() + static_cast<std::ptrdiff_t>(adj.offsets[i + 1]);
      std::sort(first, last, [](const Neighbor& a, const Neighbor& b) { return a.id < b.id; });
      for (auto it = first; it != last; ++it) degree[i] += it->weight;
    }
  };
  build(u_count, [](const Edge& e) { return e.u; }, [](const Edge& e) { return e.v; }, u_adj_, u_degree_);
  build(v_count, [](const Edge& e) { return e.v; }, [](const Edge& e) { return e.u; }, v_adj_, v_degree_);
  for (const Edge& e : edges_) volume_ += e.weight;

  u_tokens_ = u_tokens.empty() ? default_tokens(u_count) : std::move(u_tokens);
  v_tokens_ = v_tokens.empty() ? default_tokens(v_count) : std::move(v_tokens);
  if (u_tokens_.size() != u_count || v_tokens_.size() != v_count)
    throw ConfigError("token table size does not match vertex count");
}

std::span<const Neighbor> BipartiteGraph::neighbors(Side side, VertexId id) const {
  const Adjacency& adj = side == Side::U ? u_adj_ : v_adj_;
  return std::span<const Neighbor>(adj.entries).subspan(adj.offsets[id], adj.offsets[id + 1] - adj.offsets[id]);
}

double BipartiteGraph::weighted_degree(Side side, VertexId id) const {
  return side == Side::U ? u_degree_[id] : v_degree_[id];
}

std::optional<double> BipartiteGraph::weight(VertexId u, VertexId v) const {
  if (u >= u_count_ || v >= v_count_) return std::nullopt;
  auto row = neighbors(Side::U, u);
  auto it = std::lower_bound(row.begin(), row.end(), v, [](const Neighbor& n, VertexId id) { return n.id < id; });
  if (it == row.end() || it->id != v) return std::nullopt;
  return it->weight;
}

BipartiteGraph load_edge_list(std::istream& in) {
  std::unordered_map<std::string, VertexId> u_ids;
  std::unordered_map<std::string, VertexId> v_ids;
  std::vector<std::string> u_tokens;
  std::vector<std::string> v_tokens;
  std::vector<Edge> edges;

  auto intern = [](std::string_view token, auto& ids, auto& tokens) {
    auto [it, inserted] = ids.try_emplace(std::string(token), static_cast<VertexId>(tokens.size()));
    if (inserted) tokens.emplace_back(token);
    return it->second;
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    const std::size_t first = view.find_first_not_of(" \t");
    if (first == std::string_view::npos || view[first] == '#') continue;

    const auto fields = split_fields(view);
    if (fields.size() < 2 || fields.size() > 3 || fields[0].empty() || fields[1].empty())
      throw InputError("line " + std::to_string(line_no) + ": expected 'u<TAB>v[<TAB>weight]'");
    double weight = 1.0;
    if (fields.size() == 3) {
      const auto field = fields[2];
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), weight);
      if (ec != std::errc() || ptr != field.data() + field.size())
        throw InputError("line " + std::to_string(line_no) + ": unparseable weight '" + std::string(field) + "'");
      if (!std::isfinite(weight) || weight < 0)
        throw InputError("line " + std::to_string(line_no) + ": weight must be finite and >= 0");
    }
    const VertexId u = intern(fields[0], u_ids, u_tokens);
    const VertexId v = intern(fields[1], v_ids, v_tokens);
    edges.push_back({u, v, weight});
  }
  if (in.bad()) throw InputError("read failure");
  if (edges.empty()) throw InputError("edge list is empty");

  const std::size_t nu = u_tokens.size();
  const std::size_t nv = v_tokens.size();
  BipartiteGraph graph(nu, nv, std::move(edges), std::move(u_tokens), std::move(v_tokens));
  if (graph.empty()) throw InputError("edge list has no positive-weight edges");
  return graph;
}

BipartiteGraph load_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return load_edge_list(in);
}

void write_edge_list(std::ostream& out, const BipartiteGraph& graph) {
  for (const Edge& e : graph.edges())
    out << graph.token(Side::U, e.u) << '\t' << graph.token(Side::V, e.v) << '\t' << format_double(e.weight) << '\n';
}

double edge_probability(const BipartiteGraph& graph, VertexId u, VertexId v) {
  const auto w = graph.weight(u, v);
  if (!w) throw ConfigError("queried pair is not an edge");
  return *w / graph.volume();
}

HomogeneousProjection::HomogeneousProjection(Side side, std::size_t size, std::vector<std::size_t> offsets,
                                             std::vector<Neighbor> entries, std::vector<double> diagonal)
    : side_(side), offsets_(std::move(offsets)), entries_(std::move(entries)), diagonal_(std::move(diagonal)) {
  if (offsets_.size() != size + 1 || diagonal_.size() != size) throw ConfigError("projection shape mismatch");
  off_degree_.assign(size, 0.0);
  for (std::size_t i = 0; i < size; ++i) {
    for (const Neighbor& n : neighbors(static_cast<VertexId>(i))) off_degree_[i] += n.weight;
    off_volume_ += off_degree_[i];
    volume_ += off_degree_[i] + diagonal_[i];
  }
}

std::span<const Neighbor> HomogeneousProjection::neighbors(VertexId i) const {
  return std::span<const Neighbor>(entries_).subspan(offsets_[i], offsets_[i + 1] - offsets_[i]);
}

double HomogeneousProjection::weight(VertexId i, VertexId j) const {
  if (i == j) return diagonal_[i];
  auto row = neighbors(i);
  auto it = std::lower_bound(row.begin(), row.end(), j, [](const Neighbor& n, VertexId id) { return n.id < id; });
  return (it != row.end() && it->id == j) ? it->weight : 0.0;
}

HomogeneousProjection project_second_order(const BipartiteGraph& graph, Side side) {
  const std::size_t n = graph.count(side);
  const Side mid = other(side);
  std::vector<std::size_t> offsets(n + 1, 0);
  std::vector<Neighbor> entries;
  std::vector<double> diagonal(n, 0.0);

  // Both (i, j) and (j, i) accumulate over shared neighbors k in ascending
  // order, so the result is exactly symmetric.
  std::vector<double> acc(n, 0.0);
  std::vector<char> seen(n, 0);
  std::vector<VertexId> touched;
  for (VertexId i = 0; i < n; ++i) {
    touched.clear();
    for (const Neighbor& k : graph.neighbors(side, i)) {
      for (const Neighbor& j : graph.neighbors(mid, k.id)) {
        if (!seen[j.id]) {
          seen[j.id] = 1;
          touched.push_back(j.id);
        }
        acc[j.id] += k.weight * j.weight;
      }
    }
    std::sort(touched.begin(), touched.end());
    for (VertexId j : touched) {
      if (j == i)
        diagonal[i] = acc[j];
      else
        entries.push_back({j, acc[j]});
      acc[j] = 0.0;
      seen[j] = 0;
    }
    offsets[i + 1] = entries.size();
  }
  return HomogeneousProjection(side, n, std::move(offsets), std::move(entries), std::move(diagonal));
}

}  // namespace bine
