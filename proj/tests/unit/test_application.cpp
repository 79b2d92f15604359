#include <doctest.h>

#include <algorithm>
#include <map>

#include <nlohmann/json.hpp>

#include "edgeplace/application.hpp"
#include "edgeplace/error.hpp"

using namespace edgeplace;

namespace {

nlohmann::json small_app() {
  return nlohmann::json::parse(R"({
    "microservices": [
      {"id": "a", "demand": {"cpu": 1, "mem_gb": 1, "storage_gb": 1}},
      {"id": "b", "demand": {"cpu": 1, "mem_gb": 1, "storage_gb": 1}, "colocate_with": "a"},
      {"id": "c", "demand": {"cpu": 1, "mem_gb": 1, "storage_gb": 1}, "needs_gpu": true}
    ],
    "chains": [
      {"id": "X", "services": ["a", "b"], "latency_limit_ms": 0.4},
      {"id": "Y", "services": ["c"], "latency_limit_ms": 0.2}
    ],
    "comm": [{"a": "b", "b": "a", "rate": 2.0}]
  })");
}

std::map<double, int> tier_counts(const Workload& w) {
  std::map<double, int> out;
  for (const auto& [chain, limit] : w.chain_limits) ++out[limit];
  return out;
}

}  // namespace

TEST_CASE("bundled drone application") {
  DroneScenario d = bundled_drone_scenario();
  CHECK(d.app.chains().size() == 13);
  CHECK(d.app.microservices().size() == 23);

  auto services = [&](std::string_view id) { return d.app.chain(id).services; };
  CHECK(services("Frontend") == std::vector<std::string>{"loadBal", "nginx", "cCtrl"});
  CHECK(services("Motion Control") == std::vector<std::string>{"cCtrl", "eCtrl", "mCtrl", "imgRecog", "obsAvoid"});

  int gpu = 0, regional = 0, paired = 0;
  for (const Microservice& m : d.app.microservices()) {
    gpu += m.needs_gpu ? 1 : 0;
    regional += m.regions_allowed ? 1 : 0;
    paired += m.colocate_with ? 1 : 0;
  }
  CHECK(gpu == 5);
  CHECK(regional == 5);
  CHECK(paired == 2);

  // Every microservice is used by some chain.
  for (const Microservice& m : d.app.microservices()) {
    bool used = std::any_of(d.app.chains().begin(), d.app.chains().end(), [&](const ServiceChain& c) {
      return std::find(c.services.begin(), c.services.end(), m.id) != c.services.end();
    });
    CHECK_MESSAGE(used, m.id);
  }

  // The databases carry the storage-heavy demand.
  for (const Microservice& m : d.app.microservices()) {
    bool db = m.id.size() > 2 && m.id.substr(m.id.size() - 2) == "DB";
    CHECK(m.demand.storage_gb == (db ? 10.0 : 1.0));
    CHECK(m.demand.cpu == 1.0);
  }
}

TEST_CASE("standard workloads") {
  DroneScenario d = bundled_drone_scenario();
  REQUIRE(d.workloads.size() == 3);
  CHECK(tier_counts(d.workloads[0]) == std::map<double, int>{{0.2, 4}, {0.4, 7}, {0.6, 2}});
  CHECK(tier_counts(d.workloads[1]) == std::map<double, int>{{0.2, 7}, {0.4, 4}, {0.6, 2}});
  CHECK(tier_counts(d.workloads[2]) == std::map<double, int>{{0.2, 9}, {0.4, 2}, {0.6, 2}});

  // Ascending chain id gets the strictest tier first.
  const Workload& w1 = d.workloads[0];
  std::vector<double> in_order;
  for (const ServiceChain& c : d.app.chains()) in_order.push_back(w1.limit(c.id));
  CHECK(std::is_sorted(in_order.begin(), in_order.end()));
  CHECK(w1.limit("Construct Route") == 0.2);
  CHECK(w1.limit("Video") == 0.6);
}

TEST_CASE("build_workload") {
  DroneScenario d = bundled_drone_scenario();
  Workload all = build_workload(d.app, {{LatencyTier::relaxed, 13}});
  for (const auto& [chain, limit] : all.chain_limits) CHECK(limit == 0.6);
  CHECK(all.chain_limits.size() == 13);

  CHECK_THROWS_AS(build_workload(d.app, {{LatencyTier::relaxed, 12}}), ArityError);

  TierComposition mix{{LatencyTier::relaxed, 3}, {LatencyTier::moderate, 5}, {LatencyTier::ultra_low, 5}};
  Workload a = build_workload(d.app, mix);
  Workload b = build_workload(d.app, mix);
  CHECK(a.chain_limits == b.chain_limits);
  CHECK(tier_counts(a) == std::map<double, int>{{0.2, 5}, {0.4, 5}, {0.6, 3}});
}

TEST_CASE("application parsing") {
  Application app = parse_application(small_app());
  CHECK(app.microservice("a").colocate_with == std::optional<std::string>("b"));
  CHECK(app.microservice("b").colocate_with == std::optional<std::string>("a"));
  REQUIRE(app.comm().size() == 1);
  CHECK(app.comm()[0].a == "a");
  CHECK(app.comm()[0].b == "b");

  SUBCASE("unknown chain member") {
    auto doc = small_app();
    doc["chains"][0]["services"].push_back("ghost");
    CHECK_THROWS_AS(parse_application(doc), ReferenceError);
  }
  SUBCASE("negative demand") {
    auto doc = small_app();
    doc["microservices"][0]["demand"]["cpu"] = -1;
    CHECK_THROWS_AS(parse_application(doc), ValidationError);
  }
  SUBCASE("no chains") {
    auto doc = small_app();
    doc["chains"] = nlohmann::json::array();
    CHECK_THROWS_AS(parse_application(doc), ValidationError);
  }
  SUBCASE("non-positive limit") {
    auto doc = small_app();
    doc["chains"][0]["latency_limit_ms"] = 0;
    CHECK_THROWS_AS(parse_application(doc), ValidationError);
  }
  SUBCASE("comm pair naming an unknown service") {
    auto doc = small_app();
    doc["comm"].push_back({{"a", "a"}, {"b", "zz"}, {"rate", 1.0}});
    CHECK_THROWS_AS(parse_application(doc), ReferenceError);
  }
  SUBCASE("collocation with an unknown service") {
    auto doc = small_app();
    doc["microservices"][2]["colocate_with"] = "zz";
    CHECK_THROWS_AS(parse_application(doc), ReferenceError);
  }
}

TEST_CASE("application json round trip") {
  Application app = bundled_drone_scenario().app;
  Application back = parse_application(application_to_json(app));
  CHECK(application_to_json(back) == application_to_json(app));
}

TEST_CASE("workload documents") {
  DroneScenario d = bundled_drone_scenario();
  for (const Workload& w : d.workloads) {
    Workload back = parse_workload(workload_to_json(w), d.app);
    CHECK(back.id == w.id);
    CHECK(back.chain_limits == w.chain_limits);
  }
  auto composed = nlohmann::json::parse(R"({"id": "mix", "composition": {"relaxed": 13}})");
  CHECK(parse_workload(composed, d.app).limit("Frontend") == 0.6);

  auto missing = workload_to_json(d.workloads[0]);
  missing["chain_limits"].erase("Video");
  CHECK_THROWS((void)parse_workload(missing, d.app));
}
