#include "edgeplace/topology.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "edgeplace/error.hpp"
#include "json_util.hpp"

namespace edgeplace {

namespace {
constexpr double kFitSlack = 1e-9;
}

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::ue: return "ue";
    case NodeKind::bs: return "bs";
    case NodeKind::upf: return "upf";
    case NodeKind::edge: return "edge";
    case NodeKind::cloud: return "cloud";
  }
  return "?";
}

NodeKind node_kind_from_string(std::string_view text) {
  if (text == "ue") return NodeKind::ue;
  if (text == "bs") return NodeKind::bs;
  if (text == "upf") return NodeKind::upf;
  if (text == "edge") return NodeKind::edge;
  if (text == "cloud") return NodeKind::cloud;
  throw ParseError(fmt::format("nodes[].kind: unknown node kind '{}'", text));
}

bool ResourceVector::fits_within(const ResourceVector& capacity) const {
  return cpu <= capacity.cpu + kFitSlack && mem_gb <= capacity.mem_gb + kFitSlack &&
         storage_gb <= capacity.storage_gb + kFitSlack;
}

NetworkGraph::NetworkGraph(std::vector<Node> nodes, std::vector<Link> links,
                           std::map<std::string, std::string> attachments)
    : nodes_(std::move(nodes)), links_(std::move(links)), attachments_(std::move(attachments)) {
  validate_and_index();
  compute_all_pairs();

  // Every BS must reach at least one hosting site.
  for (std::size_t b : base_stations_) {
    bool reaches = std::any_of(sites_.begin(), sites_.end(),
                               [&](std::size_t s) { return latency(b, s).finite(); });
    if (!reaches) {
      throw ValidationError(
          fmt::format("base station '{}' cannot reach any edge site", nodes_[b].id));
    }
  }
}

void NetworkGraph::validate_and_index() {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (n.id.empty()) throw ValidationError("node id must not be empty");
    if (!index_.emplace(n.id, i).second) {
      throw ValidationError(fmt::format("duplicate node id '{}'", n.id));
    }
    if (n.hosts_services()) {
      if (!n.capacity.non_negative()) {
        throw ValidationError(fmt::format("node '{}': capacity must be non-negative", n.id));
      }
      if (n.unit_cost.cpu_cost_per_unit < 0 || n.unit_cost.storage_cost_per_gb < 0) {
        throw ValidationError(fmt::format("node '{}': unit costs must be non-negative", n.id));
      }
    } else if (n.capacity != ResourceVector{} || n.has_gpu) {
      throw ValidationError(
          fmt::format("node '{}': kind {} cannot carry capacity or gpu", n.id, to_string(n.kind)));
    }
  }

  std::set<std::pair<std::string, std::string>> seen;
  for (const Link& l : links_) {
    for (const std::string* end : {&l.src, &l.dst}) {
      if (!index_.contains(*end)) {
        throw ReferenceError(fmt::format("link {}-{} references unknown node '{}'", l.src, l.dst, *end));
      }
    }
    if (l.src == l.dst) throw ValidationError(fmt::format("self-loop on node '{}'", l.src));
    if (!(l.latency_ms > 0.0) || !std::isfinite(l.latency_ms)) {
      throw ValidationError(fmt::format("link {}-{}: latency_ms must be positive and finite, got {}",
                                        l.src, l.dst, l.latency_ms));
    }
    auto key = std::minmax(l.src, l.dst);
    if (!seen.emplace(key.first, key.second).second) {
      throw ValidationError(fmt::format("duplicate link {}-{}", l.src, l.dst));
    }
  }

  for (const auto& [ue, bs] : attachments_) {
    auto ue_it = index_.find(ue);
    if (ue_it == index_.end()) throw ReferenceError(fmt::format("attachment names unknown UE '{}'", ue));
    auto bs_it = index_.find(bs);
    if (bs_it == index_.end()) throw ReferenceError(fmt::format("attachment names unknown BS '{}'", bs));
    if (nodes_[ue_it->second].kind != NodeKind::ue) {
      throw ValidationError(fmt::format("attachment source '{}' is not a UE", ue));
    }
    if (nodes_[bs_it->second].kind != NodeKind::bs) {
      throw ValidationError(fmt::format("attachment target '{}' is not a BS", bs));
    }
  }

  for (const auto& [id, idx] : index_) {
    switch (nodes_[idx].kind) {
      case NodeKind::bs: base_stations_.push_back(idx); break;
      case NodeKind::ue:
        ues_.push_back(idx);
        if (!attachments_.contains(id)) {
          throw ValidationError(fmt::format("UE '{}' is not attached to a base station", id));
        }
        break;
      case NodeKind::edge:
      case NodeKind::cloud: sites_.push_back(idx); break;
      case NodeKind::upf: break;
    }
  }
}

void NetworkGraph::compute_all_pairs() {
  const std::size_t n = nodes_.size();
  std::vector<std::vector<std::pair<std::size_t, double>>> adj(n);
  for (const Link& l : links_) {
    std::size_t a = index_.find(l.src)->second;
    std::size_t b = index_.find(l.dst)->second;
    adj[a].emplace_back(b, l.latency_ms);
    adj[b].emplace_back(a, l.latency_ms);
  }

  apsp_.assign(n * n, Latency::unreachable());
  using Item = std::pair<double, std::size_t>;
  std::vector<double> dist(n);
  for (std::size_t src = 0; src < n; ++src) {
    std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
    std::priority_queue<Item, std::vector<Item>, std::greater<>> frontier;
    dist[src] = 0.0;
    frontier.emplace(0.0, src);
    while (!frontier.empty()) {
      auto [d, u] = frontier.top();
      frontier.pop();
      if (d > dist[u]) continue;
      for (auto [v, w] : adj[u]) {
        if (d + w < dist[v]) {
          dist[v] = d + w;
          frontier.emplace(dist[v], v);
        }
      }
    }
    for (std::size_t dst = 0; dst < n; ++dst) {
      if (std::isfinite(dist[dst])) apsp_[src * n + dst] = Latency(dist[dst]);
    }
  }
  // Dijkstra from both ends can differ in the last ulp; keep the matrix symmetric.
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      Latency m = std::min(apsp_[a * n + b], apsp_[b * n + a]);
      apsp_[a * n + b] = m;
      apsp_[b * n + a] = m;
    }
  }
}

bool NetworkGraph::contains(std::string_view id) const { return index_.find(id) != index_.end(); }

std::size_t NetworkGraph::index_of(std::string_view id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw LookupError(fmt::format("unknown node '{}'", id));
  return it->second;
}

NetworkGraph parse_topology(const nlohmann::json& doc) {
  using detail::require;
  using detail::optional_field;
  if (!doc.is_object()) throw ParseError("topology: document must be an object");

  std::vector<Node> nodes;
  const auto& jnodes = require(doc, "nodes", "topology");
  if (!jnodes.is_array()) throw ParseError("topology.nodes: must be an array");
  for (std::size_t i = 0; i < jnodes.size(); ++i) {
    const auto& jn = jnodes[i];
    const std::string where = fmt::format("nodes[{}]", i);
    if (!jn.is_object()) throw ParseError(where + ": must be an object");
    Node n;
    n.id = detail::get_string(require(jn, "id", where), where + ".id");
    n.kind = node_kind_from_string(detail::get_string(require(jn, "kind", where), where + ".kind"));
    if (const auto* r = optional_field(jn, "region")) n.region = detail::get_string(*r, where + ".region");
    if (n.hosts_services()) {
      const auto& cap = require(jn, "capacity", where);
      n.capacity = detail::parse_resources(cap, where + ".capacity");
      const auto& uc = require(jn, "unit_cost", where);
      n.unit_cost.cpu_cost_per_unit = detail::get_number(require(uc, "cpu", where + ".unit_cost"), where + ".unit_cost.cpu");
      n.unit_cost.storage_cost_per_gb =
          detail::get_number(require(uc, "storage", where + ".unit_cost"), where + ".unit_cost.storage");
      n.has_gpu = detail::get_bool(require(jn, "has_gpu", where), where + ".has_gpu");
    } else {
      if (const auto* cap = optional_field(jn, "capacity")) {
        n.capacity = detail::parse_resources(*cap, where + ".capacity");
      }
      if (const auto* g = optional_field(jn, "has_gpu")) n.has_gpu = detail::get_bool(*g, where + ".has_gpu");
    }
    nodes.push_back(std::move(n));
  }

  std::vector<Link> links;
  if (const auto* jlinks = optional_field(doc, "links")) {
    if (!jlinks->is_array()) throw ParseError("topology.links: must be an array");
    for (std::size_t i = 0; i < jlinks->size(); ++i) {
      const auto& jl = (*jlinks)[i];
      const std::string where = fmt::format("links[{}]", i);
      if (!jl.is_object()) throw ParseError(where + ": must be an object");
      Link l;
      l.src = detail::get_string(require(jl, "src", where), where + ".src");
      l.dst = detail::get_string(require(jl, "dst", where), where + ".dst");
      l.latency_ms = detail::get_number(require(jl, "latency_ms", where), where + ".latency_ms");
      links.push_back(std::move(l));
    }
  }

  std::map<std::string, std::string> attachments;
  if (const auto* jatt = optional_field(doc, "attachments")) {
    if (!jatt->is_array()) throw ParseError("topology.attachments: must be an array");
    for (std::size_t i = 0; i < jatt->size(); ++i) {
      const auto& ja = (*jatt)[i];
      const std::string where = fmt::format("attachments[{}]", i);
      if (!ja.is_object()) throw ParseError(where + ": must be an object");
      std::string ue = detail::get_string(require(ja, "ue", where), where + ".ue");
      std::string bs = detail::get_string(require(ja, "bs", where), where + ".bs");
      if (!attachments.emplace(ue, bs).second) {
        throw ValidationError(fmt::format("UE '{}' is attached to more than one base station", ue));
      }
    }
  }

  return NetworkGraph(std::move(nodes), std::move(links), std::move(attachments));
}

NetworkGraph parse_topology(std::string_view text) {
  return parse_topology(detail::parse_json_text(text, "topology"));
}

nlohmann::json topology_to_json(const NetworkGraph& graph) {
  nlohmann::json doc;
  doc["nodes"] = nlohmann::json::array();
  for (const Node& n : graph.nodes()) {
    nlohmann::json jn{{"id", n.id}, {"kind", to_string(n.kind)}, {"region", n.region}};
    if (n.hosts_services()) {
      jn["capacity"] = {{"cpu", n.capacity.cpu}, {"mem_gb", n.capacity.mem_gb}, {"storage_gb", n.capacity.storage_gb}};
      jn["unit_cost"] = {{"cpu", n.unit_cost.cpu_cost_per_unit}, {"storage", n.unit_cost.storage_cost_per_gb}};
      jn["has_gpu"] = n.has_gpu;
    }
    doc["nodes"].push_back(std::move(jn));
  }
  doc["links"] = nlohmann::json::array();
  for (const Link& l : graph.links()) {
    doc["links"].push_back({{"src", l.src}, {"dst", l.dst}, {"latency_ms", l.latency_ms}});
  }
  doc["attachments"] = nlohmann::json::array();
  for (const auto& [ue, bs] : graph.attachments()) doc["attachments"].push_back({{"ue", ue}, {"bs", bs}});
  return doc;
}

Latency shortest_path_latency(const NetworkGraph& graph, std::string_view a, std::string_view b) {
  return graph.latency(graph.index_of(a), graph.index_of(b));
}

std::vector<std::pair<std::string, Latency>> neighbors_by_latency(const NetworkGraph& graph,
                                                                  std::string_view site) {
  const std::size_t origin = graph.index_of(site);
  if (!graph.node_at(origin).hosts_services()) {
    throw DomainError(fmt::format("'{}' is not an edge site", site));
  }
  std::vector<std::pair<std::string, Latency>> out;
  for (std::size_t s : graph.sites()) {
    if (s == origin) continue;
    out.emplace_back(graph.node_at(s).id, graph.latency(origin, s));
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    if (x.second != y.second) return x.second < y.second;
    return x.first < y.first;
  });
  return out;
}

}  // namespace edgeplace
