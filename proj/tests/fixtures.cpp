#include "fixtures.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace rwt::testing {

WeightedGraph lasso(double a, double b) { return {{"x1", "x2"}, {{"x1", "x1", a}, {"x1", "x2", b}}}; }

WeightedGraph path(int n) {
  WeightedGraph g;
  for (int i = 1; i <= n; ++i) g.vertices.push_back("x" + std::to_string(i));
  for (int i = 1; i < n; ++i) g.edges.push_back({g.vertices[i - 1], g.vertices[i], 1.0});
  return g;
}

namespace {

bool connected_subset(const WeightedGraph& g, const std::vector<std::string>& ids, const std::vector<char>& in) {
  std::vector<int> members;
  for (std::size_t i = 0; i < in.size(); ++i)
    if (in[i]) members.push_back(static_cast<int>(i));
  if (members.empty()) return false;
  auto idx = [&](const std::string& s) { return static_cast<int>(std::find(ids.begin(), ids.end(), s) - ids.begin()); };
  std::vector<char> seen(in.size(), 0);
  std::vector<int> stack{members.front()};
  seen[members.front()] = 1;
  bool loop = false;
  while (!stack.empty()) {
    const int x = stack.back();
    stack.pop_back();
    for (const auto& e : g.edges) {
      const int u = idx(e.u), v = idx(e.v);
      if (u == v) {
        if (u == x) loop = true;
        continue;
      }
      const int y = u == x ? v : (v == x ? u : -1);
      if (y >= 0 && in[y] && !seen[y]) {
        seen[y] = 1;
        stack.push_back(y);
      }
    }
  }
  if (members.size() == 1) return loop;
  return std::all_of(members.begin(), members.end(), [&](int m) { return seen[m] != 0; });
}

}  // namespace

RandomInstance random_instance(std::mt19937_64& rng, int n, bool connected_domain) {
  std::uniform_real_distribution<double> weight(0.1, 2.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  WeightedGraph g;
  for (int i = 0; i < n; ++i) g.vertices.push_back("v" + std::to_string(i));
  std::vector<std::vector<char>> used(n, std::vector<char>(n, 0));
  for (int i = 1; i < n; ++i) {
    const int j = std::uniform_int_distribution<int>(0, i - 1)(rng);
    g.edges.push_back({g.vertices[j], g.vertices[i], weight(rng)});
    used[i][j] = used[j][i] = 1;
  }
  const int extra = std::uniform_int_distribution<int>(0, n)(rng);
  for (int k = 0; k < extra; ++k) {
    const int i = std::uniform_int_distribution<int>(0, n - 1)(rng);
    const int j = std::uniform_int_distribution<int>(0, n - 1)(rng);
    if (used[i][j]) continue;
    if (i == j && coin(rng) > 0.3) continue;
    used[i][j] = used[j][i] = 1;
    g.edges.push_back({g.vertices[i], g.vertices[j], weight(rng)});
  }
  FiniteRWSpace space = from_weighted_graph(g);

  std::vector<char> in(n, 0);
  for (int attempt = 0;; ++attempt) {
    if (connected_domain) {
      // grow a connected blob from a random seed vertex
      std::fill(in.begin(), in.end(), 0);
      const int target = std::uniform_int_distribution<int>(2, std::max(2, n - 1))(rng);
      int seed = std::uniform_int_distribution<int>(0, n - 1)(rng);
      in[seed] = 1;
      int count = 1;
      for (int step = 0; step < 50 * n && count < target; ++step) {
        const auto& e = g.edges[std::uniform_int_distribution<std::size_t>(0, g.edges.size() - 1)(rng)];
        const int u = std::stoi(e.u.substr(1)), v = std::stoi(e.v.substr(1));
        if (in[u] != in[v]) {
          in[u] = in[v] = 1;
          ++count;
        }
      }
    } else {
      const double frac = std::uniform_real_distribution<double>(0.2, 0.8)(rng);
      for (int i = 0; i < n; ++i) in[i] = coin(rng) < frac;
    }
    const int count = static_cast<int>(std::count(in.begin(), in.end(), 1));
    if (count == 0 || count == n) continue;
    if (connected_domain && !connected_subset(g, g.vertices, in)) continue;
    // the closure must be strictly larger: some vertex of omega touches the outside
    bool touches = false;
    for (const auto& e : g.edges) {
      const int u = std::stoi(e.u.substr(1)), v = std::stoi(e.v.substr(1));
      if (in[u] != in[v]) touches = true;
    }
    if (touches) break;
    if (attempt > 1000) throw std::runtime_error("random_instance: no admissible domain");
  }
  StateSet omega;
  for (int i = 0; i < n; ++i)
    if (in[i]) omega.push_back(space.index_of(g.vertices[i]));
  std::sort(omega.begin(), omega.end());
  return {std::move(g), std::move(space), std::move(omega)};
}

int DenseGraph::index(const std::string& id) const {
  const auto it = std::find(ids.begin(), ids.end(), id);
  if (it == ids.end()) throw std::out_of_range("unknown id " + id);
  return static_cast<int>(it - ids.begin());
}

DenseGraph dense(const WeightedGraph& g) {
  DenseGraph out;
  out.ids = g.vertices;
  const std::size_t n = g.vertices.size();
  out.w.assign(n, std::vector<double>(n, 0.0));
  for (const auto& e : g.edges) {
    const int u = out.index(e.u), v = out.index(e.v);
    out.w[u][v] += e.weight;
    if (u != v) out.w[v][u] += e.weight;
  }
  out.d.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) out.d[i] = std::accumulate(out.w[i].begin(), out.w[i].end(), 0.0);
  return out;
}

std::vector<double> gauss_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a[i][k]) > std::abs(a[piv][k])) piv = i;
    if (a[piv][k] == 0.0) throw std::runtime_error("gauss_solve: singular");
    std::swap(a[k], a[piv]);
    std::swap(b[k], b[piv]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a[i][k] / a[k][k];
      for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
      b[i] -= f * b[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
    x[i] = s / a[i][i];
  }
  return x;
}

std::vector<double> oracle_stress(const DenseGraph& g, const std::vector<int>& omega) {
  const std::size_t m = omega.size();
  std::vector<std::vector<double>> a(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      a[i][j] = (i == j ? 1.0 : 0.0) - g.w[omega[i]][omega[j]] / g.d[omega[i]];
  return gauss_solve(std::move(a), std::vector<double>(m, 1.0));
}

double oracle_torsion(const DenseGraph& g, const std::vector<int>& omega) {
  const auto f = oracle_stress(g, omega);
  double t = 0.0;
  for (std::size_t i = 0; i < omega.size(); ++i) t += g.d[omega[i]] * f[i];
  return t;
}

double oracle_perimeter(const DenseGraph& g, const std::vector<int>& set) {
  // weight from the set to its complement
  std::vector<char> in(g.ids.size(), 0);
  for (int x : set) in[x] = 1;
  double per = 0.0;
  for (int x : set)
    for (std::size_t y = 0; y < g.ids.size(); ++y)
      if (!in[y]) per += g.w[x][y];
  return per;
}

double oracle_cheeger(const DenseGraph& g, const std::vector<int>& omega, double p) {
  const std::size_t m = omega.size();
  double best = INFINITY;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << m); ++mask) {
    std::vector<int> set;
    double vol = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      if (mask >> i & 1) {
        set.push_back(omega[i]);
        vol += g.d[omega[i]];
      }
    best = std::min(best, oracle_perimeter(g, set) / std::pow(vol, p));
  }
  return best;
}

bool oracle_connected(const DenseGraph& g, const std::vector<int>& omega) {
  const std::size_t m = omega.size();
  if (m == 1) return g.w[omega[0]][omega[0]] > 0.0;
  // every split {A, omega \ A} with omega[0] in A must carry weight
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << m) - 1; mask += 2) {
    double across = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        if ((mask >> i & 1) && !(mask >> j & 1)) across += g.w[omega[i]][omega[j]];
    if (across == 0.0) return false;
  }
  return true;
}

double oracle_eigenvalue(const DenseGraph& g, const std::vector<int>& omega) {
  const auto m = static_cast<Eigen::Index>(omega.size());
  Eigen::MatrixXd p(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) p(i, j) = g.w[omega[i]][omega[j]] / g.d[omega[i]];
  Eigen::EigenSolver<Eigen::MatrixXd> es(p, false);
  double rho = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) rho = std::max(rho, std::abs(es.eigenvalues()[i]));
  return 1.0 - rho;
}

std::vector<int> dense_indices(const DenseGraph& g, const FiniteRWSpace& space, const StateSet& omega) {
  std::vector<int> out;
  for (Index x : omega) out.push_back(g.index(space.id(x)));
  return out;
}

std::string write_temp_file(const std::string& name, const std::string& contents) {
  const auto dir = std::filesystem::temp_directory_path() / "rwt_tests";
  std::filesystem::create_directories(dir);
  const auto path = dir / name;
  std::ofstream(path) << contents;
  return path.string();
}

// -v'' = 1 on every edge, v = 0 at degree-1 vertices, Kirchhoff elsewhere.
// Edge profile v(s) = v_a + (v_b - v_a) s / l + s (l - s) / 2 integrates to
// l (v_a + v_b) / 2 + l^3 / 12.
double ode_torsion(const MetricGraph& g) {
  const auto neumann = g.neumann_vertices();
  std::map<std::string, int> idx;
  for (std::size_t i = 0; i < neumann.size(); ++i) idx[neumann[i]] = static_cast<int>(i);
  const std::size_t n = neumann.size();
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  std::vector<double> b(n, 0.0);
  auto end = [&](const std::string& x, const std::string& y, double l) {
    if (!idx.count(x)) return;
    const int i = idx[x];
    a[i][i] += 1.0 / l;
    if (idx.count(y)) a[i][idx[y]] -= 1.0 / l;
    b[i] += l / 2.0;
  };
  for (const auto& e : g.edges) {
    end(e.u, e.v, e.length);
    end(e.v, e.u, e.length);
  }
  for (const auto& [x, l] : g.loops) b[idx.at(x)] += l;
  const auto v = gauss_solve(a, b);
  auto val = [&](const std::string& x) { return idx.count(x) ? v[idx[x]] : 0.0; };
  double t = 0.0;
  for (const auto& e : g.edges) t += e.length * (val(e.u) + val(e.v)) / 2.0 + std::pow(e.length, 3) / 12.0;
  for (const auto& [x, l] : g.loops) t += l * val(x) + l * l * l / 12.0;
  return t;
}

MetricGraph random_metric_graph(std::mt19937_64& rng, int inner) {
  std::uniform_real_distribution<double> len(0.2, 2.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  MetricGraph g;
  for (int i = 0; i < inner; ++i) g.vertices.push_back("n" + std::to_string(i));
  for (int i = 1; i < inner; ++i)
    g.edges.push_back({"n" + std::to_string(std::uniform_int_distribution<int>(0, i - 1)(rng)), "n" + std::to_string(i), len(rng)});
  // a chord, when it does not duplicate an edge
  if (inner >= 3) {
    const bool dup = std::any_of(g.edges.begin(), g.edges.end(), [](const MetricEdge& e) {
      return (e.u == "n0" && e.v == "n2") || (e.u == "n2" && e.v == "n0");
    });
    if (!dup) g.edges.push_back({"n0", "n2", len(rng)});
  }
  int leaves = 0;
  for (int i = 0; i < inner; ++i) {
    const std::string x = "n" + std::to_string(i);
    if (coin(rng) < 0.3) g.loops[x] = len(rng);
    // every inner vertex gets a pendant leg so that it cannot have degree 1
    const std::string leaf = "d" + std::to_string(leaves++);
    g.vertices.push_back(leaf);
    g.edges.push_back({x, leaf, len(rng)});
  }
  validate_metric_graph(g);
  return g;
}


RateFit error_rate_slope(const Domain& domain, double t_exact, std::size_t n_cap) {
  MassPropagator prop(domain);
  double partial = prop.g();
  std::vector<double> xs, ys;
  for (std::size_t n = 0; n < n_cap; ++n) {
    const double rel = std::abs(t_exact - partial) / t_exact;
    if (rel < 1e-10) break;
    if (rel <= 1e-3) {
      xs.push_back(static_cast<double>(n));
      ys.push_back(std::log(std::abs(t_exact - partial)));
    }
    partial += prop.advance();
  }
  RateFit fit;
  fit.points = xs.size();
  if (xs.size() < 5) {
    fit.slope = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }
  const double k = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / k;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / k;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  fit.slope = sxy / sxx;
  return fit;
}

}  // namespace rwt::testing
