#pragma once

#include "rwt/graph.hpp"
#include "rwt/quantum.hpp"
#include "rwt/space.hpp"
#include "rwt/torsion.hpp"
#include "rwt/space.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace rwt::testing {

/// Loop of weight a at x1, edge x1-x2 of weight b; the domain is {x1}.
WeightedGraph lasso(double a, double b);
/// x1 - x2 - ... - xn with unit weights.
WeightedGraph path(int n);

struct RandomInstance {
  WeightedGraph graph;
  FiniteRWSpace space;
  StateSet omega;
};

/// Connected weighted graph on n vertices (random spanning tree plus extra
/// edges and occasional loops) with a random domain that leaves at least one
/// vertex outside. `connected_domain` forces omega to be m-connected.
RandomInstance random_instance(std::mt19937_64& rng, int n, bool connected_domain = false);

// Oracles below work from the graph weights directly, never through the
// library's space or domain code.

/// Dense weights w[i][j] (loops on the diagonal) and degrees.
struct DenseGraph {
  std::vector<std::string> ids;
  std::vector<std::vector<double>> w;
  std::vector<double> d;
  int index(const std::string& id) const;
};
DenseGraph dense(const WeightedGraph& g);

/// Gaussian elimination with partial pivoting.
std::vector<double> gauss_solve(std::vector<std::vector<double>> a, std::vector<double> b);

/// Stress on omega (ids) from (I - P) f = 1, and T = sum d f.
std::vector<double> oracle_stress(const DenseGraph& g, const std::vector<int>& omega);
double oracle_torsion(const DenseGraph& g, const std::vector<int>& omega);

/// P(E) / nu(E)^p minimized over every nonempty subset, by plain enumeration.
double oracle_cheeger(const DenseGraph& g, const std::vector<int>& omega, double p);
double oracle_perimeter(const DenseGraph& g, const std::vector<int>& set);

/// True iff no split of omega into two nonempty parts has zero weight across.
bool oracle_connected(const DenseGraph& g, const std::vector<int>& omega);

/// 1 - spectral radius of P restricted to omega, via the nonsymmetric solver.
double oracle_eigenvalue(const DenseGraph& g, const std::vector<int>& omega);

std::vector<int> dense_indices(const DenseGraph& g, const FiniteRWSpace& space, const StateSet& omega);

std::string write_temp_file(const std::string& name, const std::string& contents);

/// Quantum torsion from the edge-wise ODE: Kirchhoff system for the vertex
/// values, then the integral of each edge profile.
double ode_torsion(const MetricGraph& g);

/// Random tree on `inner` vertices plus a chord, loops, and one pendant
/// Dirichlet leg per inner vertex.
MetricGraph random_metric_graph(std::mt19937_64& rng, int inner);

/// Least-squares slope of log|t_exact - T(n)| against n, fitted where the
/// relative error lies in [1e-10, 1e-3]. NaN when fewer than 5 points qualify.
struct RateFit {
  double slope = 0.0;
  std::size_t points = 0;
};
RateFit error_rate_slope(const Domain& domain, double t_exact, std::size_t n_cap = 200000);

}  // namespace rwt::testing
