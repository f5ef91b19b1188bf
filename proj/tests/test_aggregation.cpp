#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "archviz/aggregation.hpp"
#include "archviz/error.hpp"
#include "support.hpp"

using namespace archviz;
using testing::make_chain;
using testing::make_graph;

namespace {

AggregationDef def(std::string id, std::vector<std::string> seq, bool active = true) {
  return AggregationDef{id, id, std::move(seq), active, std::nullopt};
}

std::vector<Edge> sorted(std::vector<Edge> e) {
  std::sort(e.begin(), e.end());
  return e;
}

}  // namespace

TEST_CASE("greedy occurrences do not overlap") {
  CHECK(greedy_occurrences({"A", "A", "A"}, {"A", "A"}) == std::vector<std::size_t>{0});
  CHECK(greedy_occurrences({"C", "B", "C", "B", "C"}, {"C", "B"}) ==
        std::vector<std::size_t>{0, 2});
}

TEST_CASE("detection examples") {
  SUBCASE("repeated triple wins") {
    const auto g = make_chain({"C", "B", "R", "C", "B", "R", "C", "B", "R"});
    const auto c = detect_auto_aggregation(g);
    REQUIRE(c);
    CHECK(c->sequence == std::vector<std::string>{"C", "B", "R"});
    CHECK(c->count == 3);
  }
  SUBCASE("no repetition") { CHECK_FALSE(detect_auto_aggregation(make_chain({"C", "D"}))); }
  SUBCASE("counted across chains") {
    // Two [C,B] chains hanging off a split and joining again.
    const auto g = make_graph({"I", "C", "B", "C", "B", "J"},
                              {{0, 1}, {1, 2}, {0, 3}, {3, 4}, {2, 5}, {4, 5}});
    const auto c = detect_auto_aggregation(g);
    REQUIRE(c);
    CHECK(c->sequence == std::vector<std::string>{"C", "B"});
    CHECK(c->count == 2);
  }
}

TEST_CASE("apply replaces every greedy match") {
  SUBCASE("single block keeps outer shapes") {
    auto g = make_chain({"C", "B", "R"});
    g.node("n0").in_shape = testing::square(16, 3);
    g.node("n2").out_shape = testing::square(16, 64);
    const auto ag = apply_aggregations(g, AggregationState{}.add(def("blk", {"C", "B", "R"})));
    REQUIRE(ag.graph.size() == 1);
    const auto& n = ag.graph.nodes().front();
    CHECK(ag.is_aggregate(n.id));
    CHECK(n.layer_type == "blk");
    CHECK(n.in_shape == testing::square(16, 3));
    CHECK(n.out_shape == testing::square(16, 64));
    CHECK(ag.graph.inputs == std::vector<std::string>{n.id});
    CHECK(ag.graph.outputs == std::vector<std::string>{n.id});
  }
  SUBCASE("two aggregates plus trailing node") {
    const auto g = make_chain({"C", "B", "C", "B", "C"});
    const auto ag = apply_aggregations(g, AggregationState{}.add(def("cb", {"C", "B"})));
    REQUIRE(ag.graph.size() == 3);
    CHECK(ag.graph.nodes()[0].layer_type == "cb");
    CHECK(ag.graph.nodes()[1].layer_type == "cb");
    CHECK(ag.graph.nodes()[2].layer_type == "C");
  }
  SUBCASE("inactive defs are inert") {
    const auto g = make_chain({"C", "B", "C", "B"});
    const auto ag = apply_aggregations(g, AggregationState{}.add(def("cb", {"C", "B"}, false)));
    CHECK(ag.graph.size() == 4);
  }
  SUBCASE("nested defs apply children first") {
    const auto g = make_chain({"C", "B", "R", "C", "B", "R"});
    auto s = AggregationState{}.add(def("outer", {"cbr", "cbr"})).add(def("cbr", {"C", "B", "R"}));
    const auto ag = apply_aggregations(g, s);
    REQUIRE(ag.graph.size() == 1);
    CHECK(ag.graph.nodes()[0].layer_type == "outer");
    const auto back = expand_aggregates(ag);
    CHECK(back.nodes() == g.nodes());
    CHECK(sorted(back.edges) == sorted(g.edges));
  }
}

TEST_CASE("routing hop lets a block span a split and join") {
  // x -> R -> {C -> C, shortcut} -> Add -> R2 -> {C -> C, shortcut} -> Add
  const auto g = make_graph(
      {"Input", "Routing", "C", "C", "Add", "Routing", "C", "C", "Add"},
      {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {1, 4}, {4, 5}, {5, 6}, {6, 7}, {7, 8}, {5, 8}});
  auto gg = g;
  gg.node("n1").is_routing = true;
  gg.node("n5").is_routing = true;
  const auto runs = aggregation_runs(gg);
  REQUIRE(runs.size() >= 1);
  const auto& main = runs.front();
  CHECK(main.nodes == std::vector<std::string>{"n0", "n1", "n4", "n5", "n8"});
  CHECK(main.hop_interior[1] == std::vector<std::string>{"n2", "n3"});

  const auto ag = apply_aggregations(gg, AggregationState{}.add(def("res", {"Routing", "Add"})));
  CHECK(ag.graph.size() == 3);
  const auto back = expand_aggregates(ag);
  CHECK(back.size() == gg.size());
  CHECK(sorted(back.edges) == sorted(gg.edges));
}

TEST_CASE("state transitions") {
  auto s = AggregationState{}
               .add(def("X", {"Conv", "BN"}))
               .add(def("Y", {"X", "ReLU"}))
               .add(def("Z", {"Y", "Y"}));
  SUBCASE("deactivating a child deactivates dependents") {
    const auto t = s.set_active("X", false);
    CHECK_FALSE(t.def("X").active);
    CHECK_FALSE(t.def("Y").active);
    CHECK_FALSE(t.def("Z").active);
    const auto u = t.set_active("Z", true);
    CHECK(u.def("X").active);
    CHECK(u.def("Y").active);
    CHECK(u.def("Z").active);
  }
  SUBCASE("deactivating a parent leaves children alone") {
    const auto t = s.set_active("Z", false);
    CHECK(t.def("X").active);
    CHECK(t.def("Y").active);
    CHECK_FALSE(t.def("Z").active);
  }
  SUBCASE("removal cascades to parents") {
    const auto t = s.remove("Y");
    CHECK(t.contains("X"));
    CHECK_FALSE(t.contains("Y"));
    CHECK_FALSE(t.contains("Z"));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(s.set_active("nope", true), UnknownAggregationError);
    CHECK_THROWS_AS(s.remove("nope"), UnknownAggregationError);
    CHECK_THROWS_AS(s.add(def("X", {"a", "b"})), InvalidAggregationError);
    CHECK_THROWS_AS(s.add(def("W", {"a"})), InvalidAggregationError);
    CHECK_THROWS_AS(s.add(def("W", {"W", "a"})), InvalidAggregationError);
    const auto forward = AggregationState{}.add(def("P", {"Q", "a"}));
    CHECK_THROWS_AS(forward.add(def("Q", {"P", "b"})), InvalidAggregationError);
  }
  SUBCASE("dependency order puts children first") {
    CHECK(s.dependency_order() == std::vector<std::string>{"X", "Y", "Z"});
    const auto r = AggregationState{}.add(def("Z", {"Y", "Y"})).add(def("Y", {"a", "b"}));
    CHECK(r.dependency_order() == std::vector<std::string>{"Y", "Z"});
  }
}

TEST_CASE("auto aggregation rounds") {
  const auto g = make_chain({"C", "B", "R", "C", "B", "R", "P", "C", "B", "R", "C", "B", "R", "P"});
  const auto s = auto_aggregate(g, {}, 2);
  REQUIRE(s.defs().size() == 2);
  CHECK(s.defs()[0].sequence == std::vector<std::string>{"C", "B", "R"});
  CHECK(s.defs()[1].sequence == std::vector<std::string>{"auto_1", "auto_1", "P"});
  CHECK(apply_aggregations(g, s).graph.size() == 2);
  CHECK(auto_aggregate(make_chain({"A", "B"}), {}, 3).defs().empty());
}
