#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "edgeplace/topology.hpp"

namespace edgeplace {

struct Microservice {
  std::string id;
  ResourceVector demand;
  /// Hardware constraint: only gpu-equipped sites may host it.
  bool needs_gpu = false;
  /// Data-locality constraint; empty optional means any region.
  std::optional<std::set<std::string>> regions_allowed;
  /// Collocation constraint; symmetric after parsing.
  std::optional<std::string> colocate_with;

  [[nodiscard]] bool allows_region(std::string_view region) const {
    return !regions_allowed || regions_allowed->contains(std::string(region));
  }
};

struct ServiceChain {
  std::string id;
  std::vector<std::string> services;
  double latency_limit_ms = 0.0;
};

/// Undirected communication rate between two microservices, stored with a < b.
struct CommPair {
  std::string a;
  std::string b;
  double rate = 0.0;
};

class Application {
 public:
  Application() = default;
  /// Validates references and invariants; normalizes collocation symmetry and
  /// sorts microservices and chains by id.
  Application(std::vector<Microservice> microservices, std::vector<ServiceChain> chains,
              std::vector<CommPair> comm);

  [[nodiscard]] const std::vector<Microservice>& microservices() const { return microservices_; }
  [[nodiscard]] const std::vector<ServiceChain>& chains() const { return chains_; }
  [[nodiscard]] const std::vector<CommPair>& comm() const { return comm_; }

  [[nodiscard]] const Microservice& microservice(std::string_view id) const;
  [[nodiscard]] const ServiceChain& chain(std::string_view id) const;
  [[nodiscard]] bool has_microservice(std::string_view id) const;

 private:
  std::vector<Microservice> microservices_;
  std::vector<ServiceChain> chains_;
  std::vector<CommPair> comm_;
};

Application parse_application(const nlohmann::json& document);
Application parse_application(std::string_view text);
nlohmann::json application_to_json(const Application& app);

enum class LatencyTier { ultra_low, moderate, relaxed };

std::string_view to_string(LatencyTier tier);
LatencyTier latency_tier_from_string(std::string_view text);
/// 0.2, 0.4 and 0.6 ms.
double tier_limit_ms(LatencyTier tier);

using TierComposition = std::map<LatencyTier, int>;

/// Per-chain latency limits in force for one experiment.
struct Workload {
  std::string id = "custom";
  std::map<std::string, double> chain_limits;

  [[nodiscard]] double limit(std::string_view chain) const;
};

/// Chains sorted by id receive ultra-low limits first, then moderate, then
/// relaxed. Throws ArityError when the counts do not sum to the chain count.
Workload build_workload(const Application& app, const TierComposition& composition,
                        std::string id = "custom");

/// Tier counts of the named standard workloads W1, W2, W3.
TierComposition standard_composition(std::string_view workload_id);
Workload standard_workload(const Application& app, std::string_view workload_id);

/// The chain limits carried in the application document itself.
Workload workload_from_application(const Application& app);

/// Accepts `{"id", "chain_limits": {...}}` or `{"id", "composition": {...}}`.
Workload parse_workload(const nlohmann::json& document, const Application& app);
nlohmann::json workload_to_json(const Workload& workload);

/// Throws ReferenceError/ValidationError unless every chain has exactly one
/// positive limit and no unknown chains are named.
void validate_workload(const Application& app, const Workload& workload);

struct DroneScenario {
  Application app;
  std::vector<Workload> workloads;  // W1, W2, W3
};

/// Drone swarm coordination application: 13 chains over 23 microservices with
/// gpu, locality and collocation constraints assigned by sorted id.
DroneScenario bundled_drone_scenario();

}  // namespace edgeplace
