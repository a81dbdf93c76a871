#include "fixtures.hpp"

#include "rwt/error.hpp"
#include "rwt/quantum.hpp"
#include "rwt/torsion.hpp"

#include <doctest.h>

#include <cmath>
#include <map>

using namespace rwt;
using doctest::Approx;

namespace {

MetricGraph star(double loop, std::vector<double> legs) {
  std::string text;
  for (std::size_t i = 0; i < legs.size(); ++i) text += "edge o d" + std::to_string(i) + " " + std::to_string(legs[i]) + "\n";
  if (loop > 0.0) text += "loop o " + std::to_string(loop) + "\n";
  return parse_metric_graph(text);
}

double star_closed_form(double l0, const std::vector<double>& legs) {
  double cubes = l0 * l0 * l0, sum = 2.0 * l0, inv = 0.0;
  for (double l : legs) {
    cubes += l * l * l;
    sum += l;
    inv += 1.0 / l;
  }
  return cubes / 12.0 + 0.25 * sum * sum / inv;
}

}  // namespace

TEST_CASE("parsing and validation") {
  const auto g = parse_metric_graph("# star\nedge o a 1\nedge o b 2\n\nloop o 0.5\n");
  CHECK(g.vertices == std::vector<std::string>{"o", "a", "b"});
  CHECK(g.degree("o") == 4);
  CHECK(g.dirichlet_vertices() == std::vector<std::string>{"a", "b"});
  CHECK(g.neumann_vertices() == std::vector<std::string>{"o"});
  CHECK(g.cubic_length_sum() == Approx(1 + 8 + 0.125));

  auto code = [](const char* text) {
    try {
      parse_metric_graph(text);
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::zero_g;  // sentinel: no error
  };
  CHECK(code("edge a b x\n") == Errc::parse_error);
  CHECK(code("edge a b\n") == Errc::parse_error);
  CHECK(code("vertex a\n") == Errc::parse_error);
  CHECK(code("edge a b 0\n") == Errc::invalid_metric_graph);
  CHECK(code("edge a b 1\nedge b a 2\nedge b c 1\n") == Errc::invalid_metric_graph);
  CHECK(code("edge a a 1\nedge a b 1\n") == Errc::invalid_metric_graph);
  CHECK(code("edge a b 1\nedge c d 1\nedge b e 1\n") == Errc::invalid_metric_graph);
  CHECK(code("edge a b 1\n") == Errc::invalid_metric_graph);  // no vertex of degree != 1
  CHECK(code("edge a b 1\nedge b c 1\nedge c a 1\n") == Errc::invalid_metric_graph);  // no degree-1 vertex
  CHECK(code("edge a b 1\nloop b 1\nloop b 2\n") == Errc::invalid_metric_graph);
  CHECK(code("edge o a 1\nedge o b 1\n") == Errc::zero_g);
}

TEST_CASE("choice of c and padding") {
  const auto g = star(0.0, {0.1, 0.1, 0.1});
  const double c = choose_c(g);
  // plus = 0.3 c, minus = 30 / c: need 0.27 c >= 30 / c
  CHECK(c == 16.0);
  CHECK_THROWS_AS(reduce_to_rws(g, 1.0), Error);
  try {
    reduce_to_rws(g, 1.0);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::padding_negative);
  }
  const auto r = reduce_to_rws(g, c);
  CHECK(r.weight_identity_deviation <= 1e-14);
  CHECK(r.domain.omega.size() == 1);
  CHECK(r.space.nu(r.space.index_of("o")) == Approx(0.3 * c));
}

TEST_CASE("unit star with k legs has T_q = k/3") {
  for (int k = 2; k <= 6; ++k) {
    const auto q = quantum_torsion(star(0.0, std::vector<double>(k, 1.0)));
    CHECK(q.t_q == Approx(k / 3.0).epsilon(1e-12));
    CHECK(q.c_invariance_gap <= 1e-12);
  }
}

TEST_CASE("general star formula") {
  const std::vector<double> legs{1.0, 2.0, 3.0};
  const auto g = star(0.5, legs);
  const auto q = quantum_torsion(g);
  CHECK(q.t_q == Approx(star_closed_form(0.5, legs)).epsilon(1e-12));
  CHECK(q.t_q == Approx(testing::ode_torsion(g)).epsilon(1e-12));
  CHECK(q.t_q_from_vertex_values == Approx(q.t_q).epsilon(1e-12));
  CHECK(quantum_lower_bound(g) == Approx(q.t_q).epsilon(1e-12));
  // v at the center: Kirchhoff gives v sum 1/l = (2 l0 + sum l) / 2
  CHECK(q.vertex_values.at("o") == Approx(3.5 / (1.0 + 0.5 + 1.0 / 3.0)).epsilon(1e-12));
  CHECK(q.vertex_values.at("d0") == 0.0);
}

TEST_CASE("reduction agrees with the edge-wise ODE on random metric graphs") {
  std::mt19937_64 rng(31);
  for (int k = 0; k < 30; ++k) {
    const auto g = testing::random_metric_graph(rng, 2 + k % 5);
    const auto q = quantum_torsion(g);
    CHECK(q.t_q == Approx(testing::ode_torsion(g)).epsilon(1e-10));
    CHECK(q.t_q_from_vertex_values == Approx(q.t_q).epsilon(1e-10));
    CHECK(q.c_invariance_gap <= 1e-9);
    CHECK(quantum_lower_bound(g) <= q.t_q * (1 + 1e-12));
    // any admissible c gives the same value
    const auto r4 = reduce_to_rws(g, 4.0 * q.c);
    const double t4 = g.cubic_length_sum() / 12.0 + stress_solve(r4.space, r4.domain).rigidity / (4.0 * std::pow(4.0 * q.c, 3));
    CHECK(t4 == Approx(q.t_q).epsilon(1e-10));
  }
}
