#pragma once

#include "rwt/space.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace rwt {

struct Edge {
  std::string u;
  std::string v;
  double weight;
};

/// Undirected weighted graph; loops (u == v) allowed. Vertex order is first
/// appearance.
struct WeightedGraph {
  std::vector<std::string> vertices;
  std::vector<Edge> edges;

  /// d_x = sum of incident weights, a loop counted once.
  std::vector<double> degrees() const;
};

/// Order-independent equality: same vertex set, same edge multiset.
bool same_graph(const WeightedGraph& a, const WeightedGraph& b);

/// nu(x) = d_x, P(x,y) = w_xy / d_x. Errors: IsolatedVertex.
FiniteRWSpace from_weighted_graph(const WeightedGraph& g);

/// `<id> <id> <weight>` per line, `#` comment lines, blank lines ignored.
/// Errors: ParseError, DuplicateEdge, NonpositiveWeight.
WeightedGraph parse_graph_file(std::string_view text);
/// Canonical form: edges sorted by (min id, max id), weights as %.17g.
std::string serialize_graph(const WeightedGraph& g);

/// Whitespace-separated state ids. Errors: EmptyDomain, UnknownState.
StateSet parse_domain_file(std::string_view text, const FiniteRWSpace& space);

std::string read_text_file(const std::string& path);

}  // namespace rwt
