#include "rwt/graph.hpp"

#include "rwt/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>

namespace rwt {

namespace {

std::pair<std::string, std::string> ordered(const std::string& u, const std::string& v) {
  return u <= v ? std::pair{u, v} : std::pair{v, u};
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

[[noreturn]] void parse_fail(std::size_t line, const std::string& reason) {
  throw Error(Errc::parse_error, "line " + std::to_string(line) + ": " + reason);
}

}  // namespace

std::vector<double> WeightedGraph::degrees() const {
  std::unordered_map<std::string, std::size_t> idx;
  for (std::size_t i = 0; i < vertices.size(); ++i) idx.emplace(vertices[i], i);
  std::vector<double> d(vertices.size(), 0.0);
  for (const auto& e : edges) {
    d[idx.at(e.u)] += e.weight;
    if (e.u != e.v) d[idx.at(e.v)] += e.weight;
  }
  return d;
}

bool same_graph(const WeightedGraph& a, const WeightedGraph& b) {
  std::set<std::string> va(a.vertices.begin(), a.vertices.end());
  std::set<std::string> vb(b.vertices.begin(), b.vertices.end());
  if (va != vb) return false;
  auto canon = [](const WeightedGraph& g) {
    std::multimap<std::pair<std::string, std::string>, double> m;
    for (const auto& e : g.edges) m.emplace(ordered(e.u, e.v), e.weight);
    return m;
  };
  return canon(a) == canon(b);
}

static double parse_number(std::string_view token, std::size_t line) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size())
    parse_fail(line, "invalid weight '" + std::string(token) + "'");
  return value;
}

WeightedGraph parse_graph_file(std::string_view text) {
  WeightedGraph g;
  std::unordered_map<std::string, std::size_t> seen_vertex;
  std::set<std::pair<std::string, std::string>> seen_edge;
  auto add_vertex = [&](const std::string& id) {
    if (seen_vertex.emplace(id, g.vertices.size()).second) g.vertices.push_back(id);
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    const auto tokens = split_ws(line);
    if (tokens.empty() || tokens[0].front() == '#') {
      if (end == text.size()) break;
      continue;
    }
    if (tokens.size() != 3) parse_fail(line_no, "expected '<id> <id> <weight>', got " + std::to_string(tokens.size()) + " fields");
    const double w = parse_number(tokens[2], line_no);
    std::string u(tokens[0]), v(tokens[1]);
    if (!(w > 0.0) || !std::isfinite(w)) {
      std::ostringstream msg;
      msg << "line " << line_no << ": edge " << u << " " << v << " has weight " << tokens[2];
      throw Error(Errc::nonpositive_weight, msg.str());
    }
    if (!seen_edge.insert(ordered(u, v)).second)
      throw Error(Errc::duplicate_edge, "line " + std::to_string(line_no) + ": edge " + u + " " + v + " listed twice");
    add_vertex(u);
    add_vertex(v);
    g.edges.push_back({std::move(u), std::move(v), w});
    if (end == text.size()) break;
  }
  return g;
}

std::string serialize_graph(const WeightedGraph& g) {
  std::vector<Edge> edges = g.edges;
  for (auto& e : edges)
    if (e.v < e.u) std::swap(e.u, e.v);
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.u, a.v) < std::tie(b.u, b.v);
  });
  std::string out;
  char buf[64];
  for (const auto& e : edges) {
    std::snprintf(buf, sizeof buf, "%.17g", e.weight);
    out += e.u + ' ' + e.v + ' ' + buf + '\n';
  }
  return out;
}

FiniteRWSpace from_weighted_graph(const WeightedGraph& g) {
  std::unordered_map<std::string, Index> idx;
  for (Index i = 0; i < g.vertices.size(); ++i) idx.emplace(g.vertices[i], i);
  const auto d = g.degrees();
  for (Index i = 0; i < d.size(); ++i)
    if (!(d[i] > 0.0)) throw Error(Errc::isolated_vertex, "vertex '" + g.vertices[i] + "' has no incident weight");

  std::vector<IndexedTransition> entries;
  entries.reserve(2 * g.edges.size());
  for (const auto& e : g.edges) {
    const Index u = idx.at(e.u), v = idx.at(e.v);
    entries.push_back({u, v, e.weight / d[u]});
    if (u != v) entries.push_back({v, u, e.weight / d[v]});
  }
  return build_space(g.vertices, d, std::move(entries));
}

StateSet parse_domain_file(std::string_view text, const FiniteRWSpace& space) {
  std::vector<Index> states;
  for (auto token : split_ws(text)) states.push_back(space.index_of(token));
  if (states.empty()) throw Error(Errc::empty_domain, "domain file lists no states");
  return make_state_set(space, std::move(states));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::invalid_argument, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace rwt
