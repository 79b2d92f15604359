#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "edgeplace/application.hpp"
#include "edgeplace/latency.hpp"
#include "edgeplace/topology.hpp"

namespace edgeplace {

/// A network graph and an application bound together with dense indices.
///
/// Sites, microservices, base stations and chains are each numbered in id
/// order; every algorithm works on these indices and converts back to ids
/// only at the edges (serialization, reports).
class Scenario {
 public:
  Scenario(NetworkGraph graph, Application app);

  [[nodiscard]] const NetworkGraph& graph() const { return graph_; }
  [[nodiscard]] const Application& app() const { return app_; }

  [[nodiscard]] std::size_t site_count() const { return site_nodes_.size(); }
  [[nodiscard]] std::size_t micro_count() const { return app_.microservices().size(); }
  [[nodiscard]] std::size_t bs_count() const { return bs_nodes_.size(); }
  [[nodiscard]] std::size_t chain_count() const { return app_.chains().size(); }

  [[nodiscard]] const Node& site(std::size_t e) const { return graph_.node_at(site_nodes_[e]); }
  [[nodiscard]] const std::string& site_id(std::size_t e) const { return site(e).id; }
  [[nodiscard]] const Microservice& micro(std::size_t m) const { return app_.microservices()[m]; }
  [[nodiscard]] const std::string& micro_id(std::size_t m) const { return micro(m).id; }
  [[nodiscard]] const std::string& bs_id(std::size_t b) const { return graph_.node_at(bs_nodes_[b]).id; }
  [[nodiscard]] const ServiceChain& chain(std::size_t c) const { return app_.chains()[c]; }

  [[nodiscard]] std::size_t site_index(std::string_view id) const;
  [[nodiscard]] std::size_t micro_index(std::string_view id) const;
  [[nodiscard]] std::size_t bs_index(std::string_view id) const;
  [[nodiscard]] std::size_t chain_index(std::string_view id) const;

  [[nodiscard]] Latency bs_site_latency(std::size_t b, std::size_t e) const {
    return bs_site_[b * site_count() + e];
  }
  [[nodiscard]] Latency site_site_latency(std::size_t e1, std::size_t e2) const {
    return site_site_[e1 * site_count() + e2];
  }

  /// Distinct microservice indices of a chain, in chain order.
  [[nodiscard]] const std::vector<std::size_t>& chain_members(std::size_t c) const { return members_[c]; }
  [[nodiscard]] std::optional<std::size_t> partner(std::size_t m) const { return partners_[m]; }

  /// Hardware and data-locality admissibility of microservice m on site e.
  [[nodiscard]] bool site_allows(std::size_t e, std::size_t m) const;

  /// Limits by chain index; validates the workload against the application.
  [[nodiscard]] std::vector<double> limits(const Workload& workload) const;

 private:
  NetworkGraph graph_;
  Application app_;
  std::vector<std::size_t> site_nodes_;
  std::vector<std::size_t> bs_nodes_;
  std::vector<Latency> bs_site_;
  std::vector<Latency> site_site_;
  std::vector<std::vector<std::size_t>> members_;
  std::vector<std::optional<std::size_t>> partners_;
};

/// Microservice instances per site; at most one instance of a microservice on
/// a given site.
class Placement {
 public:
  Placement() = default;
  Placement(std::size_t sites, std::size_t micros) : sites_(sites), micros_(micros), cells_(sites * micros, 0) {}
  static Placement empty_for(const Scenario& sc) { return Placement(sc.site_count(), sc.micro_count()); }

  [[nodiscard]] std::size_t site_count() const { return sites_; }
  [[nodiscard]] std::size_t micro_count() const { return micros_; }

  [[nodiscard]] bool hosts(std::size_t e, std::size_t m) const { return cells_[e * micros_ + m] != 0; }
  [[nodiscard]] std::size_t instance_count() const;
  [[nodiscard]] std::size_t count_at(std::size_t e) const;
  [[nodiscard]] std::vector<std::size_t> hosts_of(std::size_t m) const;
  [[nodiscard]] bool empty() const { return instance_count() == 0; }

  /// In-place builders; throw StateError when the instance is already
  /// present (insert) or absent (erase).
  void insert(std::size_t e, std::size_t m);
  void erase(std::size_t e, std::size_t m);

  friend bool operator==(const Placement&, const Placement&) = default;

 private:
  std::size_t sites_ = 0;
  std::size_t micros_ = 0;
  std::vector<std::uint8_t> cells_;
};

[[nodiscard]] Placement add_replica(const Placement& p, std::size_t site, std::size_t micro);
[[nodiscard]] Placement evict_replica(const Placement& p, std::size_t site, std::size_t micro);

/// Summed demand of everything hosted on site e.
ResourceVector site_load(const Scenario& sc, const Placement& p, std::size_t e);

/// Sum over the chain's distinct microservices of the latency from the BS to
/// the nearest site hosting it; unreachable when any member is unhosted.
Latency chain_latency(const Scenario& sc, const Placement& p, std::size_t bs, std::size_t chain);
Latency chain_latency(const Scenario& sc, const Placement& p, std::string_view bs, std::string_view chain);

class AccessMatrix {
 public:
  AccessMatrix() = default;
  AccessMatrix(std::size_t bs, std::size_t chains)
      : chains_(chains), latency_(bs * chains, Latency::unreachable()), limit_(bs * chains, 0.0), ok_(bs * chains, 0) {}

  [[nodiscard]] std::size_t bs_count() const { return chains_ == 0 ? 0 : ok_.size() / chains_; }
  [[nodiscard]] std::size_t chain_count() const { return chains_; }

  [[nodiscard]] bool accessible(std::size_t b, std::size_t c) const { return ok_[b * chains_ + c] != 0; }
  [[nodiscard]] Latency latency(std::size_t b, std::size_t c) const { return latency_[b * chains_ + c]; }
  [[nodiscard]] double limit_ms(std::size_t b, std::size_t c) const { return limit_[b * chains_ + c]; }

  void set(std::size_t b, std::size_t c, Latency l, double limit) {
    latency_[b * chains_ + c] = l;
    limit_[b * chains_ + c] = limit;
    ok_[b * chains_ + c] = l.within(limit) ? 1 : 0;
  }

  [[nodiscard]] std::size_t accessible_count() const;
  [[nodiscard]] std::size_t accessible_at(std::size_t b) const;
  [[nodiscard]] std::size_t total() const { return ok_.size(); }
  /// Percentage of accessible (BS, chain) pairs; 100 for an empty matrix.
  [[nodiscard]] double coverage_pct() const;

 private:
  std::size_t chains_ = 0;
  std::vector<Latency> latency_;
  std::vector<double> limit_;
  std::vector<std::uint8_t> ok_;
};

AccessMatrix coverage(const Scenario& sc, const Placement& p, const Workload& workload);
AccessMatrix coverage(const Scenario& sc, const Placement& p, const std::vector<double>& limits);

struct Violation {
  std::string site;
  /// Microservice id, exceeded resource names, or "a+b" for a collocation pair.
  std::string subject;
  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidityReport {
  std::vector<Violation> capacity_violations;
  std::vector<Violation> gpu_violations;
  std::vector<Violation> locality_violations;
  std::vector<Violation> collocation_violations;

  [[nodiscard]] bool valid() const {
    return capacity_violations.empty() && gpu_violations.empty() && locality_violations.empty() &&
           collocation_violations.empty();
  }
};

ValidityReport validate_placement(const Scenario& sc, const Placement& p);

/// `{"assignments": {"E1": ["cCtrl", ...], ...}}` with sites and services sorted.
nlohmann::json placement_to_json(const Scenario& sc, const Placement& p);
Placement placement_from_json(const Scenario& sc, const nlohmann::json& document);
/// Canonical serialization used for hashing and byte-identity checks.
std::string canonical_placement(const Scenario& sc, const Placement& p);
/// 64-bit FNV-1a of the canonical serialization, as 16 hex digits.
std::string placement_hash(const Scenario& sc, const Placement& p);

}  // namespace edgeplace
