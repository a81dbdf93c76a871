#include "fixtures.hpp"

#include "cli.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <sstream>

using json = nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
  json doc() const { return json::parse(out); }
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "rwtorsion");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = rwt::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string shell(const std::string& cmd) {
  std::string out;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
  pclose(pipe);
  return out;
}

struct Files {
  std::string lasso = rwt::testing::write_temp_file("cli_lasso.txt", "# lasso a=b=1\nx1 x1 1\nx1 x2 1\n");
  std::string lasso_om = rwt::testing::write_temp_file("cli_lasso_om.txt", "x1\n");
  std::string path5 = rwt::testing::write_temp_file("cli_path5.txt", "x1 x2 1\nx2 x3 1\nx3 x4 1\nx4 x5 1\n");
  std::string x1x2 = rwt::testing::write_temp_file("cli_x1x2.txt", "x1 x2\n");
  std::string x2x4 = rwt::testing::write_temp_file("cli_x2x4.txt", "x2 x4\n");
  std::string star3 = rwt::testing::write_temp_file("cli_star3.txt", "edge o a 1\nedge o b 1\nedge o c 1\n");
};

const Files& files() {
  static const Files f;
  return f;
}

}  // namespace

TEST_CASE("torsion on the lasso") {
  const auto& f = files();
  const auto r = run({"torsion", "--graph", f.lasso, "--domain", f.lasso_om});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("\"rigidity\": 4.0") != std::string::npos);
  const auto j = r.doc();
  CHECK(j["command"] == "torsion");
  CHECK(j["results"]["stress"]["x1"].get<double>() == doctest::Approx(2.0));
  CHECK(j["warnings"].empty());
}

TEST_CASE("quantum star") {
  const auto r = run({"quantum", "--metric-graph", files().star3});
  REQUIRE(r.code == 0);
  CHECK(r.doc()["results"]["T_q"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.doc()["results"]["lower_bound"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("audit on the 5-path") {
  const auto& f = files();
  const auto r = run({"audit", "--graph", f.path5, "--domain", f.x1x2, "--p", "1.5,2,3"});
  CHECK(r.code == 0);
  const auto j = r.doc();
  CHECK(j["results"]["all_pass"] == true);
  for (const auto& row : j["results"]["rows"]) CHECK(row["status"] != "fail");
  CHECK(j["results"]["instance"]["domain_size"] == 2);

  const auto d = run({"audit", "--graph", f.path5, "--domain", f.x2x4});
  CHECK(d.code == 0);
  bool found = false;
  const auto dj = d.doc();
  for (const auto& row : dj["results"]["rows"])
    if (row["name"].get<std::string>().rfind("eigenvalue limit", 0) == 0) {
      CHECK(row["note"] == "skipped: g vanishes");
      found = true;
    }
  CHECK(found);
  CHECK(d.err.find("warning: ") != std::string::npos);
}

TEST_CASE("audit failure exits 3") {
  std::string edges;
  for (int i = 1; i < 30; ++i) edges += "x" + std::to_string(i) + " x" + std::to_string(i + 1) + " 1\n";
  std::string dom;
  for (int i = 1; i <= 25; ++i) dom += "x" + std::to_string(i) + " ";
  const auto g = rwt::testing::write_temp_file("cli_path30.txt", edges);
  const auto d = rwt::testing::write_temp_file("cli_path30_om.txt", dom);
  const auto r = run({"audit", "--graph", g, "--domain", d});
  CHECK(r.code == 3);
  CHECK(r.doc()["results"]["all_pass"] == false);
}

TEST_CASE("other subcommands") {
  const auto& f = files();
  const auto heat = run({"heat-content", "--graph", f.lasso, "--domain", f.lasso_om, "--t", "0,1"});
  REQUIRE(heat.code == 0);
  CHECK(heat.doc()["results"]["series"][0]["Q"].get<double>() == doctest::Approx(2.0));
  CHECK(heat.doc()["results"]["series"][1]["Q"].get<double>() == doctest::Approx(2.0 * std::exp(-0.5)));

  const auto mom = run({"moments", "--graph", f.lasso, "--domain", f.lasso_om, "--j", "1,2,3"});
  REQUIRE(mom.code == 0);
  CHECK(mom.doc()["results"]["moments"][1]["EM"].get<double>() == doctest::Approx(16.0));

  const auto eig = run({"eigenvalue", "--graph", f.lasso, "--domain", f.lasso_om, "--method", "limit", "--n", "4"});
  REQUIRE(eig.code == 0);
  CHECK(eig.doc()["results"]["lambda"].get<double>() == doctest::Approx(0.5));

  const auto chg = run({"cheeger", "--graph", f.path5, "--domain", f.x1x2, "--p", "1,2"});
  REQUIRE(chg.code == 0);
  CHECK(chg.doc()["results"]["cheeger"][0]["exact"] == true);
  CHECK(chg.doc()["results"]["cheeger"][0]["value"].get<double>() == doctest::Approx(1.0 / 3.0));

  const auto pt = run({"ptorsion", "--graph", f.lasso, "--domain", f.lasso_om, "--p", "3"});
  REQUIRE(pt.code == 0);
  CHECK(pt.doc()["results"]["ptorsion"][0]["rigidity"].get<double>() == doctest::Approx(8.0));
  CHECK(pt.doc()["results"]["ptorsion"][0]["upper_bound"].get<double>() == doctest::Approx(8.0));

  const auto mc = run({"mc", "--graph", f.lasso, "--domain", f.lasso_om, "--samples", "20000", "--seed", "3"});
  REQUIRE(mc.code == 0);
  const auto m = mc.doc()["results"];
  CHECK(std::abs(m["mean"].get<double>() - 4.0) <= 5.0 * m["half_width_95"].get<double>());

  const auto rs = run({"rescale", "--kernel", "uniform:1", "--eps", "0.1", "--h", "0.0125", "--box", "0,1"});
  REQUIRE(rs.code == 0);
  CHECK(rs.doc()["results"]["local_torsion"].get<double>() == doctest::Approx(1.0 / 12.0));
  CHECK(rs.doc()["results"]["rescaled"][0]["rel_error"].get<double>() < 0.15);
}

TEST_CASE("csv output") {
  const auto& f = files();
  const auto r = run({"--format", "csv", "torsion", "--graph", f.lasso, "--domain", f.lasso_om});
  REQUIRE(r.code == 0);
  CHECK(r.out == "quantity,state,value\nrigidity,,4\nstress,x1,2\n");
  const auto a = run({"--format", "csv", "audit", "--graph", f.lasso, "--domain", f.lasso_om});
  CHECK(a.out.rfind("name,lhs,rhs,slack,tol,status,note\n", 0) == 0);
}

TEST_CASE("exit codes and diagnostics") {
  const auto& f = files();
  CHECK(run({"torsion", "--graph", "/nonexistent/graph.txt", "--domain", f.lasso_om}).code == 1);
  CHECK(run({"bogus"}).code == 1);
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"cheeger", "--graph", f.lasso, "--domain", f.lasso_om, "--p", "0.5"}).code == 1);

  const auto bad = rwt::testing::write_temp_file("cli_bad.txt", "x1 x2\n");
  const auto parse = run({"torsion", "--graph", bad, "--domain", f.lasso_om});
  CHECK(parse.code == 1);
  CHECK(parse.err.find("error [ParseError]: " + bad) == 0);

  const auto unknown = rwt::testing::write_temp_file("cli_unknown.txt", "x9\n");
  CHECK(run({"torsion", "--graph", f.lasso, "--domain", unknown}).code == 1);

  const auto zero = run({"eigenvalue", "--graph", f.path5, "--domain", f.x2x4, "--method", "limit"});
  CHECK(zero.code == 2);
  CHECK(zero.err.find("error [ZeroG]") == 0);
}

TEST_CASE("deterministic output across runs and thread counts") {
  const auto& f = files();
  const std::string exe = RWT_CLI_EXE;
  const std::string args = " audit --graph " + f.path5 + " --domain " + f.x1x2 + " --p 1.5,2,3 2>/dev/null";
  const auto one = shell(exe + args);
  CHECK(!one.empty());
  CHECK(shell(exe + args) == one);
  CHECK(shell("TORSION_RW_THREADS=4 " + exe + args) == one);
  CHECK(shell(exe + " --threads 2" + args) == one);
  const std::string mc = " mc --graph " + f.path5 + " --domain " + f.x1x2 + " --samples 5000 --seed 9";
  CHECK(shell(exe + mc) == shell("TORSION_RW_THREADS=3 " + exe + mc));
}
