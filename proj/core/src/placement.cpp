#include "edgeplace/placement.hpp"

#include <algorithm>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "edgeplace/error.hpp"
#include "json_util.hpp"

namespace edgeplace {

Scenario::Scenario(NetworkGraph graph, Application app) : graph_(std::move(graph)), app_(std::move(app)) {
  site_nodes_ = graph_.sites();
  bs_nodes_ = graph_.base_stations();
  const std::size_t ns = site_nodes_.size();

  bs_site_.resize(bs_nodes_.size() * ns);
  for (std::size_t b = 0; b < bs_nodes_.size(); ++b) {
    for (std::size_t e = 0; e < ns; ++e) bs_site_[b * ns + e] = graph_.latency(bs_nodes_[b], site_nodes_[e]);
  }
  site_site_.resize(ns * ns);
  for (std::size_t a = 0; a < ns; ++a) {
    for (std::size_t e = 0; e < ns; ++e) site_site_[a * ns + e] = graph_.latency(site_nodes_[a], site_nodes_[e]);
  }

  members_.resize(app_.chains().size());
  for (std::size_t c = 0; c < app_.chains().size(); ++c) {
    for (const std::string& s : app_.chains()[c].services) {
      std::size_t m = micro_index(s);
      if (std::find(members_[c].begin(), members_[c].end(), m) == members_[c].end()) members_[c].push_back(m);
    }
  }
  partners_.resize(micro_count());
  for (std::size_t m = 0; m < micro_count(); ++m) {
    if (micro(m).colocate_with) partners_[m] = micro_index(*micro(m).colocate_with);
  }
}

std::size_t Scenario::site_index(std::string_view id) const {
  std::size_t node = graph_.index_of(id);
  auto it = std::find(site_nodes_.begin(), site_nodes_.end(), node);
  if (it == site_nodes_.end()) throw DomainError(fmt::format("'{}' is not an edge site", id));
  return static_cast<std::size_t>(it - site_nodes_.begin());
}

std::size_t Scenario::micro_index(std::string_view id) const {
  const auto& ms = app_.microservices();
  auto it = std::lower_bound(ms.begin(), ms.end(), id, [](const Microservice& m, std::string_view k) { return m.id < k; });
  if (it == ms.end() || it->id != id) throw LookupError(fmt::format("unknown microservice '{}'", id));
  return static_cast<std::size_t>(it - ms.begin());
}

std::size_t Scenario::bs_index(std::string_view id) const {
  std::size_t node = graph_.index_of(id);
  auto it = std::find(bs_nodes_.begin(), bs_nodes_.end(), node);
  if (it == bs_nodes_.end()) throw DomainError(fmt::format("'{}' is not a base station", id));
  return static_cast<std::size_t>(it - bs_nodes_.begin());
}

std::size_t Scenario::chain_index(std::string_view id) const {
  const auto& cs = app_.chains();
  auto it = std::lower_bound(cs.begin(), cs.end(), id, [](const ServiceChain& c, std::string_view k) { return c.id < k; });
  if (it == cs.end() || it->id != id) throw LookupError(fmt::format("unknown chain '{}'", id));
  return static_cast<std::size_t>(it - cs.begin());
}

bool Scenario::site_allows(std::size_t e, std::size_t m) const {
  const Node& s = site(e);
  const Microservice& ms = micro(m);
  if (ms.needs_gpu && !s.has_gpu) return false;
  return ms.allows_region(s.region);
}

std::vector<double> Scenario::limits(const Workload& workload) const {
  validate_workload(app_, workload);
  std::vector<double> out(chain_count());
  for (std::size_t c = 0; c < chain_count(); ++c) out[c] = workload.limit(chain(c).id);
  return out;
}

std::size_t Placement::instance_count() const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
}

std::size_t Placement::count_at(std::size_t e) const {
  auto first = cells_.begin() + static_cast<std::ptrdiff_t>(e * micros_);
  return static_cast<std::size_t>(std::count(first, first + static_cast<std::ptrdiff_t>(micros_), std::uint8_t{1}));
}

std::vector<std::size_t> Placement::hosts_of(std::size_t m) const {
  std::vector<std::size_t> out;
  for (std::size_t e = 0; e < sites_; ++e) {
    if (hosts(e, m)) out.push_back(e);
  }
  return out;
}

void Placement::insert(std::size_t e, std::size_t m) {
  if (e >= sites_ || m >= micros_) throw ContractError(fmt::format("placement index ({}, {}) out of range", e, m));
  auto& cell = cells_[e * micros_ + m];
  if (cell) throw StateError(fmt::format("microservice #{} already deployed on site #{}", m, e));
  cell = 1;
}

void Placement::erase(std::size_t e, std::size_t m) {
  if (e >= sites_ || m >= micros_) throw ContractError(fmt::format("placement index ({}, {}) out of range", e, m));
  auto& cell = cells_[e * micros_ + m];
  if (!cell) throw StateError(fmt::format("microservice #{} is not deployed on site #{}", m, e));
  cell = 0;
}

Placement add_replica(const Placement& p, std::size_t site, std::size_t micro) {
  Placement out = p;
  out.insert(site, micro);
  return out;
}

Placement evict_replica(const Placement& p, std::size_t site, std::size_t micro) {
  Placement out = p;
  out.erase(site, micro);
  return out;
}

ResourceVector site_load(const Scenario& sc, const Placement& p, std::size_t e) {
  ResourceVector load;
  for (std::size_t m = 0; m < sc.micro_count(); ++m) {
    if (p.hosts(e, m)) load += sc.micro(m).demand;
  }
  return load;
}

Latency chain_latency(const Scenario& sc, const Placement& p, std::size_t bs, std::size_t chain) {
  Latency total = Latency::zero();
  for (std::size_t m : sc.chain_members(chain)) {
    Latency best = Latency::unreachable();
    for (std::size_t e = 0; e < sc.site_count(); ++e) {
      if (p.hosts(e, m)) best = std::min(best, sc.bs_site_latency(bs, e));
    }
    if (!best.finite()) return Latency::unreachable();
    total += best;
  }
  return total;
}

Latency chain_latency(const Scenario& sc, const Placement& p, std::string_view bs, std::string_view chain) {
  return chain_latency(sc, p, sc.bs_index(bs), sc.chain_index(chain));
}

std::size_t AccessMatrix::accessible_count() const {
  return static_cast<std::size_t>(std::count(ok_.begin(), ok_.end(), std::uint8_t{1}));
}

std::size_t AccessMatrix::accessible_at(std::size_t b) const {
  std::size_t n = 0;
  for (std::size_t c = 0; c < chains_; ++c) n += ok_[b * chains_ + c];
  return n;
}

double AccessMatrix::coverage_pct() const {
  if (ok_.empty()) return 100.0;
  return 100.0 * static_cast<double>(accessible_count()) / static_cast<double>(ok_.size());
}

AccessMatrix coverage(const Scenario& sc, const Placement& p, const std::vector<double>& limits) {
  AccessMatrix access(sc.bs_count(), sc.chain_count());
  for (std::size_t b = 0; b < sc.bs_count(); ++b) {
    for (std::size_t c = 0; c < sc.chain_count(); ++c) access.set(b, c, chain_latency(sc, p, b, c), limits[c]);
  }
  return access;
}

AccessMatrix coverage(const Scenario& sc, const Placement& p, const Workload& workload) {
  return coverage(sc, p, sc.limits(workload));
}

ValidityReport validate_placement(const Scenario& sc, const Placement& p) {
  ValidityReport report;
  for (std::size_t e = 0; e < sc.site_count(); ++e) {
    const Node& site = sc.site(e);
    ResourceVector load = site_load(sc, p, e);
    if (!load.fits_within(site.capacity)) {
      std::vector<std::string> over;
      if (!ResourceVector{load.cpu, 0, 0}.fits_within(site.capacity)) over.emplace_back("cpu");
      if (!ResourceVector{0, load.mem_gb, 0}.fits_within(site.capacity)) over.emplace_back("mem_gb");
      if (!ResourceVector{0, 0, load.storage_gb}.fits_within(site.capacity)) over.emplace_back("storage_gb");
      report.capacity_violations.push_back({site.id, fmt::format("{}", fmt::join(over, ","))});
    }
    for (std::size_t m = 0; m < sc.micro_count(); ++m) {
      if (!p.hosts(e, m)) continue;
      const Microservice& ms = sc.micro(m);
      if (ms.needs_gpu && !site.has_gpu) report.gpu_violations.push_back({site.id, ms.id});
      if (!ms.allows_region(site.region)) report.locality_violations.push_back({site.id, ms.id});
    }
    for (std::size_t m = 0; m < sc.micro_count(); ++m) {
      auto q = sc.partner(m);
      if (q && m < *q && p.hosts(e, m) != p.hosts(e, *q)) {
        report.collocation_violations.push_back({site.id, sc.micro_id(m) + "+" + sc.micro_id(*q)});
      }
    }
  }
  return report;
}

nlohmann::json placement_to_json(const Scenario& sc, const Placement& p) {
  nlohmann::json assignments = nlohmann::json::object();
  for (std::size_t e = 0; e < sc.site_count(); ++e) {
    nlohmann::json list = nlohmann::json::array();
    for (std::size_t m = 0; m < sc.micro_count(); ++m) {
      if (p.hosts(e, m)) list.push_back(sc.micro_id(m));
    }
    assignments[sc.site_id(e)] = std::move(list);
  }
  return {{"assignments", std::move(assignments)}};
}

Placement placement_from_json(const Scenario& sc, const nlohmann::json& doc) {
  const auto& assignments = detail::require(doc, "assignments", "placement");
  if (!assignments.is_object()) throw ParseError("placement.assignments: must be an object");
  Placement p = Placement::empty_for(sc);
  for (const auto& [site, list] : assignments.items()) {
    if (!sc.graph().contains(site)) throw ReferenceError(fmt::format("placement names unknown site '{}'", site));
    std::size_t e = sc.site_index(site);
    if (!list.is_array()) throw ParseError(fmt::format("placement.assignments.{}: must be an array", site));
    for (const auto& item : list) {
      std::string id = detail::get_string(item, "placement.assignments." + site + "[]");
      if (!sc.app().has_microservice(id)) {
        throw ReferenceError(fmt::format("placement names unknown microservice '{}'", id));
      }
      std::size_t m = sc.micro_index(id);
      if (p.hosts(e, m)) throw ValidationError(fmt::format("'{}' listed twice on site '{}'", id, site));
      p.insert(e, m);
    }
  }
  return p;
}

std::string canonical_placement(const Scenario& sc, const Placement& p) {
  // Sites and microservices are already indexed in id order.
  std::string out;
  for (std::size_t e = 0; e < sc.site_count(); ++e) {
    out += sc.site_id(e);
    out += ':';
    bool first = true;
    for (std::size_t m = 0; m < sc.micro_count(); ++m) {
      if (!p.hosts(e, m)) continue;
      if (!first) out += ',';
      out += sc.micro_id(m);
      first = false;
    }
    out += ';';
  }
  return out;
}

std::string placement_hash(const Scenario& sc, const Placement& p) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : canonical_placement(sc, p)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace edgeplace
