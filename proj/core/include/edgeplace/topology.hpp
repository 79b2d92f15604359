#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "edgeplace/latency.hpp"

namespace edgeplace {

enum class NodeKind { ue, bs, upf, edge, cloud };

std::string_view to_string(NodeKind kind);
NodeKind node_kind_from_string(std::string_view text);

/// CPU units, memory and storage in GB. Used both for site capacity and for
/// microservice demand.
struct ResourceVector {
  double cpu = 0.0;
  double mem_gb = 0.0;
  double storage_gb = 0.0;

  ResourceVector& operator+=(const ResourceVector& o) {
    cpu += o.cpu;
    mem_gb += o.mem_gb;
    storage_gb += o.storage_gb;
    return *this;
  }
  ResourceVector& operator-=(const ResourceVector& o) {
    cpu -= o.cpu;
    mem_gb -= o.mem_gb;
    storage_gb -= o.storage_gb;
    return *this;
  }
  friend ResourceVector operator+(ResourceVector a, const ResourceVector& b) { return a += b; }
  friend ResourceVector operator-(ResourceVector a, const ResourceVector& b) { return a -= b; }
  friend bool operator==(const ResourceVector&, const ResourceVector&) = default;

  /// Componentwise `*this <= capacity`, with a small slack for accumulated
  /// floating-point error.
  [[nodiscard]] bool fits_within(const ResourceVector& capacity) const;
  [[nodiscard]] bool non_negative() const { return cpu >= 0 && mem_gb >= 0 && storage_gb >= 0; }
  [[nodiscard]] double total() const { return cpu + mem_gb + storage_gb; }
};

struct UnitCost {
  double cpu_cost_per_unit = 0.0;
  double storage_cost_per_gb = 0.0;
};

struct Node {
  std::string id;
  NodeKind kind = NodeKind::ue;
  std::string region;
  ResourceVector capacity;
  UnitCost unit_cost;
  bool has_gpu = false;

  /// Edge and cloud nodes can host microservice instances.
  [[nodiscard]] bool hosts_services() const { return kind == NodeKind::edge || kind == NodeKind::cloud; }
};

struct Link {
  std::string src;
  std::string dst;
  double latency_ms = 0.0;
};

/// Validated, immutable mobile-network graph with all-pairs shortest-path
/// latencies computed at construction.
class NetworkGraph {
 public:
  NetworkGraph() = default;

  /// Validates every invariant and precomputes latencies. Throws
  /// ReferenceError for dangling ids and ValidationError otherwise.
  NetworkGraph(std::vector<Node> nodes, std::vector<Link> links,
               std::map<std::string, std::string> attachments);

  [[nodiscard]] const std::vector<Node>& nodes() const { return nodes_; }
  [[nodiscard]] const std::vector<Link>& links() const { return links_; }
  [[nodiscard]] const std::map<std::string, std::string>& attachments() const { return attachments_; }

  [[nodiscard]] bool contains(std::string_view id) const;
  [[nodiscard]] std::size_t index_of(std::string_view id) const;
  [[nodiscard]] const Node& node(std::string_view id) const { return nodes_[index_of(id)]; }
  [[nodiscard]] const Node& node_at(std::size_t index) const { return nodes_[index]; }

  /// Node indices of each kind, ordered by node id.
  [[nodiscard]] const std::vector<std::size_t>& base_stations() const { return base_stations_; }
  [[nodiscard]] const std::vector<std::size_t>& user_equipment() const { return ues_; }
  /// Edge and cloud nodes, ordered by id.
  [[nodiscard]] const std::vector<std::size_t>& sites() const { return sites_; }

  [[nodiscard]] Latency latency(std::size_t a, std::size_t b) const { return apsp_[a * nodes_.size() + b]; }

 private:
  void validate_and_index();
  void compute_all_pairs();

  std::vector<Node> nodes_;
  std::vector<Link> links_;
  std::map<std::string, std::string> attachments_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::vector<std::size_t> base_stations_;
  std::vector<std::size_t> ues_;
  std::vector<std::size_t> sites_;
  std::vector<Latency> apsp_;
};

NetworkGraph parse_topology(const nlohmann::json& document);
NetworkGraph parse_topology(std::string_view text);
nlohmann::json topology_to_json(const NetworkGraph& graph);

/// Minimal latency over any path; Latency::unreachable() when disconnected.
Latency shortest_path_latency(const NetworkGraph& graph, std::string_view a, std::string_view b);

/// Every other hosting site ordered by latency from `site`, ties by id.
std::vector<std::pair<std::string, Latency>> neighbors_by_latency(const NetworkGraph& graph,
                                                                  std::string_view site);

}  // namespace edgeplace
