#pragma once

#include "rwt/graph.hpp"
#include "rwt/space.hpp"

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace rwt {

struct MetricEdge {
  std::string u;
  std::string v;
  double length;
};

/// Compact connected metric graph: no multi-edges, at most one loop per
/// vertex. Dirichlet vertices are exactly the degree-1 vertices.
struct MetricGraph {
  std::vector<std::string> vertices;
  std::vector<MetricEdge> edges;        // u != v
  std::map<std::string, double> loops;  // vertex -> loop length

  /// Edge count with a loop counted twice.
  std::size_t degree(const std::string& x) const;
  std::vector<std::string> dirichlet_vertices() const;
  std::vector<std::string> neumann_vertices() const;
  /// Sum of cubed lengths over edges and loops.
  double cubic_length_sum() const;
};

/// Checks connectivity, positive lengths and a nonempty Dirichlet and
/// non-Dirichlet set. Errors: InvalidMetricGraph.
void validate_metric_graph(const MetricGraph& g);

/// Lines `edge <id> <id> <length>` and `loop <id> <length>`; `#` comments.
/// Errors: ParseError, InvalidMetricGraph.
MetricGraph parse_metric_graph(std::string_view text);

/// Smallest c = 2^k, k >= 0, with sum c l - sum 1/(c l) >= 0.1 sum c l at
/// every non-Dirichlet vertex (sums over incident edges and the loop).
double choose_c(const MetricGraph& g);

struct ReducedGraph {
  double c = 1.0;
  WeightedGraph graph;
  FiniteRWSpace space;
  Domain domain;  // the non-Dirichlet vertices
  /// Largest relative deviation of the total-weight identity
  /// sum_y w_yx = sum_{y != x} c l_yx + 2 c l_xx over non-Dirichlet vertices.
  double weight_identity_deviation = 0.0;
};

/// Errors: PaddingNegative.
ReducedGraph reduce_to_rws(const MetricGraph& g, double c);

struct QuantumTorsion {
  double t_q = 0.0;
  double c = 1.0;
  double t_q_doubled_c = 0.0;
  double c_invariance_gap = 0.0;  // relative
  /// Same quantity assembled from the vertex values and edge lengths.
  double t_q_from_vertex_values = 0.0;
  double reduced_torsion = 0.0;
  double residual = 0.0;
  std::map<std::string, double> vertex_values;  // v on all vertices
};

/// Errors: CInvarianceViolated, propagated solver errors.
QuantumTorsion quantum_torsion(const MetricGraph& g);
double quantum_lower_bound(const MetricGraph& g);

}  // namespace rwt
