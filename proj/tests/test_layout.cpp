#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "archviz/error.hpp"
#include "archviz/ingest.hpp"
#include "archviz/layout.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace archviz;
using testing::make_chain;
using testing::make_graph;

namespace {

std::map<std::string, int> ranks_of(const NetworkGraph& g) { return assign_ranks(g); }

std::vector<std::string> names(int n) {
  std::vector<std::string> t(n, "L");
  return t;
}

}  // namespace

TEST_CASE("rank examples") {
  SUBCASE("diamond") {
    const auto r = ranks_of(make_graph(names(4), {{0, 1}, {0, 2}, {1, 3}, {2, 3}}));
    CHECK(r == std::map<std::string, int>{{"n0", 0}, {"n1", 1}, {"n2", 1}, {"n3", 2}});
  }
  SUBCASE("non-series-parallel example") {
    const auto g = make_graph(names(5), {{0, 1}, {0, 2}, {1, 3}, {2, 3}, {3, 4}, {1, 4}});
    const auto r = ranks_of(g);
    CHECK(r == std::map<std::string, int>{{"n0", 0}, {"n1", 1}, {"n2", 1}, {"n3", 2}, {"n4", 3}});
    CHECK(total_edge_length(g, r) == 7);
  }
  SUBCASE("chain") {
    const auto r = ranks_of(make_chain(names(6)));
    for (int i = 0; i < 6; ++i) CHECK(r.at("n" + std::to_string(i)) == i);
  }
  SUBCASE("cycle is rejected") {
    CHECK_THROWS_AS(network_simplex(3, {{0, 1, 1}, {1, 2, 1}, {2, 0, 1}}), CycleError);
  }
  SUBCASE("a late source is pulled towards its consumer") {
    // n3 feeds only the last node, so it sits right before it.
    const auto g = make_graph(names(5), {{0, 1}, {1, 2}, {2, 4}, {3, 4}});
    const auto r = ranks_of(g);
    CHECK(r.at("n3") == 2);
    CHECK(total_edge_length(g, r) == 4);
  }
}

TEST_CASE("network simplex matches the brute-force optimum on random DAGs") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 150; ++trial) {
    const int n = 2 + trial % 9;
    const auto edges = testing::random_dag_edges(n, 0.35, rng);
    const auto g = make_graph(names(n), edges);
    const auto r = assign_ranks(g);
    for (const auto& [s, d] : g.edges) CHECK(r.at(d) >= r.at(s) + 1);
    int lo = 1 << 30;
    for (const auto& [id, v] : r) lo = std::min(lo, v);
    CHECK(lo == 0);
    CHECK(total_edge_length(g, r) == oracles::min_total_edge_length(n, edges));
  }
}

TEST_CASE("parallel edges weigh with their multiplicity") {
  // n0 -> n4 twice, plus the path n0 -> n1 -> n2 -> n3 -> n4.
  const std::vector<std::pair<int, int>> edges{{0, 4}, {0, 4}, {0, 1}, {1, 2}, {2, 3}, {3, 4}};
  const auto g = make_graph(names(5), edges);
  const auto r = assign_ranks(g);
  CHECK(total_edge_length(g, r) == 12);
  CHECK(oracles::min_total_edge_length(5, edges) == 12);
}

TEST_CASE("ordering") {
  SUBCASE("parallel chains keep first-seen order") {
    const auto g = make_graph(names(6), {{0, 1}, {0, 3}, {1, 2}, {3, 4}, {2, 5}, {4, 5}});
    const auto o = order_within_ranks(g, assign_ranks(g));
    CHECK(o.at("n1") == 0);
    CHECK(o.at("n3") == 1);
    CHECK(o.at("n2") == 0);
    CHECK(o.at("n4") == 1);
  }
  SUBCASE("chain orders are all zero") {
    const auto g = make_chain(names(4));
    for (const auto& [id, k] : order_within_ranks(g, assign_ranks(g))) CHECK(k == 0);
  }
  SUBCASE("U-Net has no crossings") {
    const auto g = parse_model(testing::fixture("unet.json"));
    auto lg = build_layered(g, assign_ranks(g));
    order_layers(lg);
    CHECK(count_crossings(lg) == 0);
  }
  SUBCASE("barycenter sweeps repair a bad discovery order") {
    // The DFS visits n1's subtree first, but n3 -> n2 would cross n1 -> n4.
    const auto g = make_graph(names(6), {{0, 1}, {0, 3}, {1, 4}, {3, 2}, {2, 5}, {4, 5}, {1, 2}});
    auto lg = build_layered(g, assign_ranks(g));
    order_layers(lg);
    CHECK(count_crossings(lg) == 0);
  }
}

TEST_CASE("coordinates") {
  SUBCASE("chain bands") {
    const auto g = make_chain(names(3));
    const auto l = layout_graph(g, {{"n0", {40, 10}}, {"n1", {60, 10}}, {"n2", {40, 10}}}, {30, 20});
    CHECK(l.x.at("n0") == doctest::Approx(20));
    CHECK(l.x.at("n1") == doctest::Approx(100));
    CHECK(l.x.at("n2") == doctest::Approx(180));
  }
  SUBCASE("single node") {
    const auto l = layout_graph(make_chain(names(1)), {{"n0", {40, 30}}}, {});
    CHECK(l.x.at("n0") == doctest::Approx(20));
    CHECK(l.y.at("n0") == doctest::Approx(0));
  }
  SUBCASE("two parallel nodes") {
    const auto g = make_graph(names(4), {{0, 1}, {0, 2}, {1, 3}, {2, 3}});
    const auto l = layout_graph(
        g, {{"n0", {10, 40}}, {"n1", {10, 40}}, {"n2", {10, 40}}, {"n3", {10, 40}}}, {30, 20});
    CHECK(l.y.at("n1") == doctest::Approx(-30));
    CHECK(l.y.at("n2") == doctest::Approx(30));
    CHECK(l.x.at("n1") == l.x.at("n2"));
  }
  SUBCASE("skip edges get lanes") {
    const auto g = make_graph(names(4), {{0, 1}, {1, 2}, {2, 3}, {0, 3}});
    const auto l = layout_graph(g, {}, {});
    CHECK(l.lanes[3].size() == 2);
    CHECK(l.lanes[0].empty());
  }
  SUBCASE("deterministic") {
    const auto g = parse_model(testing::fixture("inception_v3.json"));
    std::map<std::string, NodeBox> boxes;
    for (const auto& n : g.nodes()) boxes[n.id] = {20, 30};
    const auto a = layout_graph(g, boxes, {});
    const auto b = layout_graph(g, boxes, {});
    CHECK(a.x == b.x);
    CHECK(a.y == b.y);
    CHECK(a.lanes == b.lanes);
  }
}
