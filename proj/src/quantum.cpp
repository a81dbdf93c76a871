#include "rwt/quantum.hpp"

#include "rwt/error.hpp"
#include "rwt/geometry.hpp"
#include "rwt/torsion.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_map>

namespace rwt {

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(Errc::invalid_metric_graph, what); }

std::vector<std::string_view> fields(std::string_view line) {
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

double parse_length(std::string_view token, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size())
    throw Error(Errc::parse_error, "line " + std::to_string(line) + ": invalid length '" + std::string(token) + "'");
  if (!(v > 0.0) || !std::isfinite(v))
    invalid("line " + std::to_string(line) + ": length must be positive, got " + std::string(token));
  return v;
}

// Per-vertex sums over incident edges plus the loop: sum c l and sum 1/(c l).
struct VertexSums {
  double plus = 0.0;
  double minus = 0.0;
};

std::map<std::string, VertexSums> vertex_sums(const MetricGraph& g, double c) {
  std::map<std::string, VertexSums> s;
  for (const auto& e : g.edges)
    for (const auto* x : {&e.u, &e.v}) {
      s[*x].plus += c * e.length;
      s[*x].minus += 1.0 / (c * e.length);
    }
  for (const auto& [x, l] : g.loops) {
    s[x].plus += c * l;
    s[x].minus += 1.0 / (c * l);
  }
  return s;
}

}  // namespace

std::size_t MetricGraph::degree(const std::string& x) const {
  std::size_t d = 0;
  for (const auto& e : edges) d += (e.u == x) + (e.v == x);
  if (loops.count(x)) d += 2;
  return d;
}

std::vector<std::string> MetricGraph::dirichlet_vertices() const {
  std::vector<std::string> out;
  for (const auto& x : vertices)
    if (degree(x) == 1) out.push_back(x);
  return out;
}

std::vector<std::string> MetricGraph::neumann_vertices() const {
  std::vector<std::string> out;
  for (const auto& x : vertices)
    if (degree(x) != 1) out.push_back(x);
  return out;
}

double MetricGraph::cubic_length_sum() const {
  double s = 0.0;
  for (const auto& e : edges) s += e.length * e.length * e.length;
  for (const auto& [x, l] : loops) s += l * l * l;
  return s;
}

void validate_metric_graph(const MetricGraph& g) {
  if (g.vertices.empty()) invalid("metric graph has no vertices");
  std::set<std::pair<std::string, std::string>> seen;
  std::unordered_map<std::string, std::vector<std::string>> adj;
  for (const auto& e : g.edges) {
    if (e.u == e.v) invalid("edge " + e.u + " " + e.v + " is a loop; use a 'loop' line");
    if (!(e.length > 0.0)) invalid("edge " + e.u + " " + e.v + " has nonpositive length");
    if (!seen.insert(std::minmax(e.u, e.v)).second) invalid("multiple edges between " + e.u + " and " + e.v);
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  for (const auto& [x, l] : g.loops)
    if (!(l > 0.0)) invalid("loop at " + x + " has nonpositive length");

  std::set<std::string> reached{g.vertices.front()};
  std::vector<std::string> stack{g.vertices.front()};
  while (!stack.empty()) {
    const std::string x = stack.back();
    stack.pop_back();
    for (const auto& y : adj[x])
      if (reached.insert(y).second) stack.push_back(y);
  }
  if (reached.size() != g.vertices.size()) invalid("metric graph is not connected");
  if (g.dirichlet_vertices().empty()) invalid("metric graph has no degree-1 vertex");
  if (g.neumann_vertices().empty()) invalid("metric graph has no vertex of degree other than 1");
}

MetricGraph parse_metric_graph(std::string_view text) {
  MetricGraph g;
  std::set<std::string> known;
  auto add_vertex = [&](std::string_view id) {
    if (known.emplace(id).second) g.vertices.emplace_back(id);
  };
  std::size_t line_no = 0, pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const auto tokens = fields(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (!tokens.empty() && tokens[0].front() != '#') {
      const std::string where = "line " + std::to_string(line_no) + ": ";
      if (tokens[0] == "edge" && tokens.size() == 4) {
        add_vertex(tokens[1]);
        add_vertex(tokens[2]);
        g.edges.push_back({std::string(tokens[1]), std::string(tokens[2]), parse_length(tokens[3], line_no)});
      } else if (tokens[0] == "loop" && tokens.size() == 3) {
        add_vertex(tokens[1]);
        if (!g.loops.emplace(std::string(tokens[1]), parse_length(tokens[2], line_no)).second)
          invalid(where + "second loop at vertex " + std::string(tokens[1]));
      } else {
        throw Error(Errc::parse_error, where + "expected 'edge <id> <id> <length>' or 'loop <id> <length>'");
      }
    }
    if (end == text.size()) break;
  }
  validate_metric_graph(g);
  return g;
}

double choose_c(const MetricGraph& g) {
  const auto neumann = g.neumann_vertices();
  for (int k = 0; k < 1024; ++k) {
    const double c = std::ldexp(1.0, k);
    const auto sums = vertex_sums(g, c);
    bool ok = true;
    for (const auto& x : neumann) {
      const auto& s = sums.at(x);
      if (s.plus - s.minus < 0.1 * s.plus) {
        ok = false;
        break;
      }
    }
    if (ok) return c;
  }
  invalid("no admissible c found");
}

ReducedGraph reduce_to_rws(const MetricGraph& g, double c) {
  validate_metric_graph(g);
  const auto sums = vertex_sums(g, c);
  const auto neumann = g.neumann_vertices();

  WeightedGraph wg;
  wg.vertices = g.vertices;
  for (const auto& e : g.edges) wg.edges.push_back({e.u, e.v, 1.0 / (c * e.length)});
  for (const auto& x : neumann) {
    const auto& s = sums.at(x);
    const double padding = s.plus - s.minus;
    if (!(padding > 0.0)) {
      std::ostringstream msg;
      msg << "padding at vertex " << x << " is " << padding << " for c = " << c;
      throw Error(Errc::padding_negative, msg.str());
    }
    double w = padding;
    if (auto it = g.loops.find(x); it != g.loops.end()) w += 1.0 / (c * it->second) + c * it->second;
    wg.edges.push_back({x, x, w});
  }

  ReducedGraph out{c, wg, from_weighted_graph(wg), {}, 0.0};
  out.domain = make_domain(out.space, neumann);
  for (const auto& x : neumann) {
    double expected = sums.at(x).plus;
    if (auto it = g.loops.find(x); it != g.loops.end()) expected += c * it->second;
    const double actual = out.space.nu(out.space.index_of(x));
    out.weight_identity_deviation = std::max(out.weight_identity_deviation, std::abs(actual - expected) / expected);
  }
  return out;
}

QuantumTorsion quantum_torsion(const MetricGraph& g) {
  auto at = [&](double c, QuantumTorsion* detail) {
    const ReducedGraph r = reduce_to_rws(g, c);
    const TorsionResult t = stress_solve(r.space, r.domain);
    const double t_q = g.cubic_length_sum() / 12.0 + t.rigidity / (4.0 * c * c * c);
    if (detail) {
      detail->reduced_torsion = t.rigidity;
      detail->residual = stress_residual(r.domain, t.stress);
      for (const auto& x : g.vertices) detail->vertex_values[x] = 0.0;
      for (std::size_t i = 0; i < r.domain.size(); ++i)
        detail->vertex_values[r.space.id(r.domain.omega[i])] = t.stress[static_cast<Eigen::Index>(i)] / (2.0 * c * c);
    }
    return t_q;
  };

  QuantumTorsion out;
  out.c = choose_c(g);
  out.t_q = at(out.c, &out);
  out.t_q_doubled_c = at(2.0 * out.c, nullptr);
  out.c_invariance_gap = std::abs(out.t_q - out.t_q_doubled_c) / out.t_q;

  double weighted = 0.0;
  for (const auto& [x, v] : out.vertex_values) {
    double lengths = 0.0;
    for (const auto& e : g.edges)
      if (e.u == x || e.v == x) lengths += e.length;
    if (auto it = g.loops.find(x); it != g.loops.end()) lengths += 2.0 * it->second;
    weighted += lengths * v;
  }
  out.t_q_from_vertex_values = g.cubic_length_sum() / 12.0 + 0.5 * weighted;

  if (out.c_invariance_gap > 1e-9) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "T_q = " << out.t_q << " at c = " << out.c << " but " << out.t_q_doubled_c << " at c = " << 2.0 * out.c;
    throw Error(Errc::c_invariance_violated, msg.str());
  }
  return out;
}

double quantum_lower_bound(const MetricGraph& g) {
  const double c = choose_c(g);
  const ReducedGraph r = reduce_to_rws(g, c);
  const double per = perimeter(r.space, r.domain.omega);
  return g.cubic_length_sum() / 12.0 + r.domain.nu_total * r.domain.nu_total / per / (4.0 * c * c * c);
}

}  // namespace rwt
