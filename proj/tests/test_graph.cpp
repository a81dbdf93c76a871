#include "fixtures.hpp"

#include "rwt/error.hpp"
#include "rwt/graph.hpp"

#include <doctest.h>

using namespace rwt;

namespace {

Errc parse_code(const std::string& text) {
  try {
    parse_graph_file(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an rwt::Error");
  return Errc::invalid_argument;
}

}  // namespace

TEST_CASE("graph to space") {
  const auto s = from_weighted_graph(testing::lasso(2, 3));
  CHECK(s.nu(0) == doctest::Approx(5.0));
  CHECK(s.nu(1) == doctest::Approx(3.0));
  CHECK(s.transition(0, 0) == doctest::Approx(0.4));
  CHECK(s.transition(0, 1) == doctest::Approx(0.6));
  CHECK(s.transition(1, 0) == doctest::Approx(1.0));
  CHECK(check_reversibility(s, 1e-12).pass);
  CHECK(testing::lasso(2, 3).degrees() == std::vector<double>{5.0, 3.0});
}

TEST_CASE("isolated vertices are rejected") {
  WeightedGraph g{{"a", "b", "c"}, {{"a", "b", 1.0}}};
  CHECK_THROWS_AS(from_weighted_graph(g), Error);
}

TEST_CASE("parsing") {
  const auto g = parse_graph_file("# lasso\nx1 x1 1\n\n  # indented comment\nx1 x2 2.5\n");
  REQUIRE(g.edges.size() == 2);
  CHECK(g.vertices == std::vector<std::string>{"x1", "x2"});
  CHECK(g.edges[1].weight == 2.5);
  CHECK(parse_code("a b\n") == Errc::parse_error);
  CHECK(parse_code("a b x\n") == Errc::parse_error);
  CHECK(parse_code("a b 1 2\n") == Errc::parse_error);
  CHECK(parse_code("a b 1 # note\n") == Errc::parse_error);
  CHECK(parse_code("a b 0\n") == Errc::nonpositive_weight);
  CHECK(parse_code("a b -1\n") == Errc::nonpositive_weight);
  CHECK(parse_code("a b 1\nb a 2\n") == Errc::duplicate_edge);
  try {
    parse_graph_file("a b 1\n\nc d\n");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("serialize round trip is canonical") {
  const WeightedGraph g{{"z", "a", "m"}, {{"z", "a", 0.1}, {"m", "a", 1.0 / 3.0}, {"m", "m", 2.0}}};
  const std::string text = serialize_graph(g);
  const auto back = parse_graph_file(text);
  CHECK(same_graph(g, back));
  CHECK(serialize_graph(back) == text);
  WeightedGraph h = g;
  h.edges[0].weight = 0.2;
  CHECK_FALSE(same_graph(g, h));
}

TEST_CASE("domain files") {
  const auto s = from_weighted_graph(testing::path(5));
  CHECK(parse_domain_file("x2\n\tx4\n", s) == StateSet{1, 3});
  CHECK(parse_domain_file("x4 x2 x2", s) == StateSet{1, 3});
  CHECK_THROWS_AS(parse_domain_file("x9", s), Error);
  CHECK_THROWS_AS(parse_domain_file("  \n\n", s), Error);
}

TEST_CASE("reading a missing file is an input error") {
  try {
    read_text_file("/nonexistent/graph.txt");
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.is_input_error());
  }
}
