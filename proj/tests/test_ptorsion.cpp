#include "fixtures.hpp"

#include "rwt/error.hpp"
#include "rwt/geometry.hpp"
#include "rwt/torsion.hpp"

#include <doctest.h>

#include <cmath>

using namespace rwt;
using doctest::Approx;

TEST_CASE("p = 2 reproduces the linear torsion") {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 10; ++k) {
    const auto inst = testing::random_instance(rng, 10);
    const auto d = make_domain(inst.space, inst.omega);
    const auto lin = stress_solve(inst.space, d);
    const auto r = p_torsion(inst.space, d, 2.0);
    CHECK(r.rigidity == Approx(lin.rigidity).epsilon(1e-10));
    CHECK((r.stress - lin.stress).cwiseAbs().maxCoeff() <= 1e-9 * lin.stress.maxCoeff());
    CHECK(r.energy_gap <= 1e-8);
  }
}

TEST_CASE("lasso p-torsion closed form") {
  // b f^{p-1} = a + b, so T_p = ((a+b) f)^{p-1}
  for (double p : {1.5, 2.0, 3.0, 5.0}) {
    for (auto [a, b] : {std::pair{1.0, 1.0}, {2.0, 3.0}}) {
      const auto s = from_weighted_graph(testing::lasso(a, b));
      const auto d = make_domain(s, std::vector<std::string>{"x1"});
      const double f = std::pow((a + b) / b, 1.0 / (p - 1.0));
      const auto r = p_torsion(s, d, p);
      CHECK(r.rigidity == Approx(std::pow((a + b) * f, p - 1.0)).epsilon(1e-10));
      CHECK(r.stress[0] == Approx(f).epsilon(1e-10));
      CHECK(r.identity_residual <= 1e-10);
    }
  }
  const auto s = from_weighted_graph(testing::lasso(1, 1));
  const auto d = make_domain(s, std::vector<std::string>{"x1"});
  CHECK(p_torsion(s, d, 3.0).rigidity == Approx(8.0).epsilon(1e-12));
}

TEST_CASE("energy identity and Cheeger sandwich on the 5-path") {
  const auto s = from_weighted_graph(testing::path(5));
  const auto d = make_domain(s, std::vector<std::string>{"x1", "x2", "x3"});
  const double h1 = cheeger(s, d, 1.0, CheegerMode::exhaustive).value;
  for (double p : {1.5, 2.0, 3.0}) {
    const auto r = p_torsion(s, d, p);
    CHECK(r.energy_gap <= 1e-8);
    const double mass = d.nu_omega.dot(r.stress);
    CHECK(p_energy(s, d, r.stress, p) == Approx(mass).epsilon(1e-8));
    const double hp = cheeger(s, d, p, CheegerMode::exhaustive).value;
    CHECK(std::pow(2.0, p - 1.0) * std::pow(h1, p) / std::pow(d.nu_closure, p - 1.0) <= 1.0 / r.rigidity);
    CHECK(1.0 / r.rigidity <= hp * (1 + 1e-10));
  }
}

TEST_CASE("duality bracket contains the closed form") {
  for (auto [a, b] : {std::pair{1.0, 1.0}, std::pair{2.0, 3.0}, std::pair{0.5, 4.0}}) {
    const auto s = from_weighted_graph(testing::lasso(a, b));
    const auto d = make_domain(s, std::vector<std::string>{"x1"});
    for (double p : {1.1, 1.5, 3.0}) {
      const auto r = p_torsion(s, d, p);
      // single state: f = ((a+b)/b)^{1/(p-1)}, T_p = (a+b)^p / b
      const double exact = std::pow(a + b, p) / b;
      CHECK(r.rigidity <= exact * (1 + 1e-12));
      CHECK(r.upper_bound >= exact * (1 - 1e-12));
      CHECK(r.duality_gap <= 1e-10);
    }
  }
  const auto s = from_weighted_graph(testing::path(5));
  const auto d = make_domain(s, std::vector<std::string>{"x1", "x2", "x3"});
  for (double p : {1.01, 1.1, 1.5, 2.0, 4.0}) {
    const auto r = p_torsion(s, d, p);
    CHECK(r.upper_bound >= r.rigidity);
    CHECK(r.duality_gap <= (p < 1.5 ? 1e-3 : 1e-10));
  }
}

TEST_CASE("p-torsion function maximizes the p-torsion quotient") {
  const auto s = from_weighted_graph(testing::path(6));
  const auto d = make_domain(s, std::vector<std::string>{"x2", "x3", "x4"});
  const double p = 3.0;
  const auto r = p_torsion(s, d, p);
  auto quotient = [&](const Eigen::VectorXd& f) {
    return std::pow(d.nu_omega.dot(f.cwiseAbs()), p) / p_energy(s, d, f, p);
  };
  CHECK(quotient(r.stress) == Approx(r.rigidity).epsilon(1e-9));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 2.0);
  for (int k = 0; k < 50; ++k) {
    Eigen::VectorXd f(3);
    for (int i = 0; i < 3; ++i) f[i] = u(rng);
    if (f.cwiseAbs().sum() == 0.0) continue;
    CHECK(quotient(f) <= r.rigidity * (1 + 1e-10));
  }
}

TEST_CASE("1/T_p approaches h_1 as p decreases to 1") {
  const auto s = from_weighted_graph(testing::path(5));
  const auto d = make_domain(s, std::vector<std::string>{"x1", "x2"});
  const double h1 = cheeger(s, d, 1.0, CheegerMode::exhaustive).value;
  double prev = INFINITY;
  for (double p : {1.5, 1.1, 1.01}) {
    const double gap = std::abs(1.0 / p_torsion(s, d, p).rigidity - h1);
    CHECK(gap < prev);
    prev = gap;
  }
  CHECK(prev < 0.05 * h1);
}

TEST_CASE("argument checks") {
  const auto s = from_weighted_graph(testing::path(5));
  const auto d = make_domain(s, std::vector<std::string>{"x2"});
  CHECK_THROWS_AS(p_torsion(s, d, 1.0), Error);
  CHECK_THROWS_AS(p_torsion(s, d, NAN), Error);
  CHECK_THROWS_AS(lambda_p_estimate(s, d, 0.5), Error);
}

TEST_CASE("lambda_p estimates") {
  const auto s = from_weighted_graph(testing::lasso(2, 3));
  const auto d = make_domain(s, std::vector<std::string>{"x1"});
  // one state: every p-Rayleigh quotient is b/(a+b)
  for (double p : {1.0, 1.5, 2.0, 3.0}) CHECK(lambda_p_estimate(s, d, p).value == Approx(0.6).epsilon(1e-9));
  CHECK(lambda_p_estimate(s, d, 2.0).certified);
  CHECK_FALSE(lambda_p_estimate(s, d, 3.0).certified);

  const auto path = from_weighted_graph(testing::path(7));
  const auto pd = make_domain(path, std::vector<std::string>{"x2", "x3", "x4", "x5"});
  const double h1 = cheeger(path, pd, 1.0, CheegerMode::exhaustive).value;
  for (double p : {1.5, 3.0}) {
    const auto est = lambda_p_estimate(path, pd, p);
    CHECK(est.value <= h1 * (1 + 1e-12));
    CHECK(est.value > 0.0);
  }
  // the estimate never beats the exact eigenvalue at p = 2 when forced through descent
  CHECK(lambda_p_estimate(path, pd, 2.0).value == Approx(eigenvalue_exact(path, pd)));
}
