#include <doctest.h>

#include <nlohmann/json.hpp>

#include "edgeplace/error.hpp"
#include "edgeplace/fixtures.hpp"
#include "edgeplace/topology.hpp"
#include "oracles.hpp"

using namespace edgeplace;

namespace {

nlohmann::json toy4_doc() { return nlohmann::json::parse(toy4_topology_text()); }

}  // namespace

TEST_CASE("toy4 parses with four sites and three base stations") {
  NetworkGraph g = toy4_topology();
  CHECK(g.sites().size() == 4);
  CHECK(g.base_stations().size() == 3);
  CHECK(g.user_equipment().size() == 3);
  CHECK(g.node("E1").has_gpu);
  CHECK_FALSE(g.node("E3").has_gpu);
  CHECK(g.node("E4").capacity.cpu == 8.0);
}

TEST_CASE("toy4 shortest paths") {
  NetworkGraph g = toy4_topology();
  CHECK(shortest_path_latency(g, "B1", "B1").ms() == 0.0);
  CHECK(shortest_path_latency(g, "B1", "E4").ms() == doctest::Approx(0.10).epsilon(1e-12));
  CHECK(shortest_path_latency(g, "B3", "E1").ms() == doctest::Approx(0.30).epsilon(1e-12));
  CHECK_THROWS_AS((void)shortest_path_latency(g, "B1", "E9"), LookupError);
}

TEST_CASE("shortest paths equal Floyd-Warshall on the fixtures") {
  for (const NetworkGraph& g : {toy4_topology(), drone_topology()}) {
    auto fw = oracle::floyd_warshall(g);
    for (const auto& a : g.nodes()) {
      for (const auto& b : g.nodes()) {
        Latency l = shortest_path_latency(g, a.id, b.id);
        double want = fw[a.id][b.id];
        if (want == oracle::kInf) {
          CHECK_FALSE(l.finite());
        } else {
          REQUIRE(l.finite());
          CHECK(l.ms() == doctest::Approx(want).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("shortest paths are symmetric and satisfy the triangle inequality") {
  for (const NetworkGraph& g : {toy4_topology(), drone_topology()}) {
    const auto& nodes = g.nodes();
    for (const auto& a : nodes) {
      for (const auto& b : nodes) {
        Latency ab = shortest_path_latency(g, a.id, b.id);
        CHECK(ab == shortest_path_latency(g, b.id, a.id));
        for (const auto& c : nodes) {
          Latency via = shortest_path_latency(g, a.id, c.id) + shortest_path_latency(g, c.id, b.id);
          CHECK(ab.ms() <= via.ms() + 1e-12);
        }
      }
    }
  }
}

TEST_CASE("neighbors by latency") {
  NetworkGraph g = toy4_topology();
  auto n = neighbors_by_latency(g, "E2");
  REQUIRE(n.size() == 3);
  CHECK(n[0].first == "E1");
  CHECK(n[0].second.ms() == doctest::Approx(0.10));
  CHECK(n[1].first == "E3");
  CHECK(n[1].second.ms() == doctest::Approx(0.10));
  CHECK(n[2].first == "E4");
  CHECK(n[2].second.ms() == doctest::Approx(0.25));

  CHECK_THROWS_AS((void)neighbors_by_latency(g, "B1"), DomainError);
  CHECK_THROWS_AS((void)neighbors_by_latency(g, "E9"), LookupError);

  for (const NetworkGraph& gg : {toy4_topology(), drone_topology()}) {
    for (std::size_t s : gg.sites()) {
      auto list = neighbors_by_latency(gg, gg.node_at(s).id);
      for (std::size_t i = 1; i < list.size(); ++i) {
        bool ordered = list[i - 1].second < list[i].second ||
                       (list[i - 1].second == list[i].second && list[i - 1].first < list[i].first);
        CHECK(ordered);
      }
    }
  }
}

TEST_CASE("a graph with a single site has no neighbours") {
  auto doc = nlohmann::json::parse(R"({
    "nodes": [{"id": "B1", "kind": "bs", "region": "r"},
              {"id": "E1", "kind": "edge", "region": "r", "has_gpu": false,
               "capacity": {"cpu": 1, "mem_gb": 1, "storage_gb": 1}, "unit_cost": {"cpu": 1, "storage": 1}}],
    "links": [{"src": "B1", "dst": "E1", "latency_ms": 0.1}],
    "attachments": []})");
  CHECK(neighbors_by_latency(parse_topology(doc), "E1").empty());
}

TEST_CASE("topology parse errors") {
  SUBCASE("dangling link endpoint") {
    auto doc = toy4_doc();
    doc["links"].push_back({{"src", "E1"}, {"dst", "E9"}, {"latency_ms", 0.1}});
    CHECK_THROWS_AS(parse_topology(doc), ReferenceError);
  }
  SUBCASE("negative latency") {
    auto doc = toy4_doc();
    doc["links"][0]["latency_ms"] = -1;
    CHECK_THROWS_AS(parse_topology(doc), ValidationError);
  }
  SUBCASE("self loop") {
    auto doc = toy4_doc();
    doc["links"].push_back({{"src", "E1"}, {"dst", "E1"}, {"latency_ms", 0.1}});
    CHECK_THROWS_AS(parse_topology(doc), ValidationError);
  }
  SUBCASE("duplicate node id") {
    auto doc = toy4_doc();
    doc["nodes"].push_back(doc["nodes"][0]);
    CHECK_THROWS_AS(parse_topology(doc), ValidationError);
  }
  SUBCASE("base station cut off from every site") {
    auto doc = toy4_doc();
    doc["nodes"].push_back({{"id", "B9"}, {"kind", "bs"}, {"region", "west"}});
    CHECK_THROWS_AS(parse_topology(doc), ValidationError);
  }
  SUBCASE("ue without attachment") {
    auto doc = toy4_doc();
    doc["nodes"].push_back({{"id", "UE9"}, {"kind", "ue"}, {"region", "west"}});
    CHECK_THROWS_AS(parse_topology(doc), ValidationError);
  }
  SUBCASE("missing field names the field") {
    auto doc = toy4_doc();
    doc["links"][0].erase("latency_ms");
    try {
      (void)parse_topology(doc);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("latency_ms") != std::string::npos);
    }
  }
  SUBCASE("unknown kind") {
    auto doc = toy4_doc();
    doc["nodes"][0]["kind"] = "satellite";
    CHECK_THROWS_AS(parse_topology(doc), ParseError);
  }
  SUBCASE("not json") { CHECK_THROWS_AS(parse_topology(std::string_view("{nodes")), ParseError); }
}

TEST_CASE("topology json round trip") {
  for (const NetworkGraph& g : {toy4_topology(), drone_topology()}) {
    NetworkGraph back = parse_topology(topology_to_json(g));
    REQUIRE(back.nodes().size() == g.nodes().size());
    for (const auto& a : g.nodes()) {
      for (const auto& b : g.nodes()) {
        CHECK(shortest_path_latency(back, a.id, b.id) == shortest_path_latency(g, a.id, b.id));
      }
    }
  }
}
