#include "edgeplace/application.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "edgeplace/error.hpp"
#include "json_util.hpp"

namespace edgeplace {

Application::Application(std::vector<Microservice> microservices, std::vector<ServiceChain> chains,
                         std::vector<CommPair> comm)
    : microservices_(std::move(microservices)), chains_(std::move(chains)), comm_(std::move(comm)) {
  std::sort(microservices_.begin(), microservices_.end(),
            [](const auto& x, const auto& y) { return x.id < y.id; });
  std::sort(chains_.begin(), chains_.end(), [](const auto& x, const auto& y) { return x.id < y.id; });

  for (std::size_t i = 0; i < microservices_.size(); ++i) {
    const Microservice& m = microservices_[i];
    if (m.id.empty()) throw ValidationError("microservice id must not be empty");
    if (i > 0 && microservices_[i - 1].id == m.id) {
      throw ValidationError(fmt::format("duplicate microservice '{}'", m.id));
    }
    if (!m.demand.non_negative()) {
      throw ValidationError(fmt::format("microservice '{}': demand must be non-negative", m.id));
    }
  }

  // Collocation is symmetric; a one-sided declaration is completed here.
  for (Microservice& m : microservices_) {
    if (!m.colocate_with) continue;
    if (*m.colocate_with == m.id) {
      throw ValidationError(fmt::format("microservice '{}' cannot colocate with itself", m.id));
    }
    if (!has_microservice(*m.colocate_with)) {
      throw ReferenceError(
          fmt::format("microservice '{}' colocates with unknown '{}'", m.id, *m.colocate_with));
    }
  }
  for (Microservice& m : microservices_) {
    if (!m.colocate_with) continue;
    auto partner_it = std::find_if(microservices_.begin(), microservices_.end(),
                                   [&](const Microservice& x) { return x.id == *m.colocate_with; });
    Microservice& partner = *partner_it;
    if (!partner.colocate_with) {
      partner.colocate_with = m.id;
    } else if (*partner.colocate_with != m.id) {
      throw ValidationError(fmt::format("collocation of '{}' with '{}' conflicts with '{}'", m.id,
                                        partner.id, *partner.colocate_with));
    }
  }

  if (chains_.empty()) throw ValidationError("application must declare at least one chain");
  for (std::size_t i = 0; i < chains_.size(); ++i) {
    const ServiceChain& c = chains_[i];
    if (c.id.empty()) throw ValidationError("chain id must not be empty");
    if (i > 0 && chains_[i - 1].id == c.id) throw ValidationError(fmt::format("duplicate chain '{}'", c.id));
    if (c.services.empty()) throw ValidationError(fmt::format("chain '{}' has no services", c.id));
    if (!(c.latency_limit_ms > 0.0) || !std::isfinite(c.latency_limit_ms)) {
      throw ValidationError(fmt::format("chain '{}': latency_limit_ms must be positive", c.id));
    }
    for (const std::string& s : c.services) {
      if (!has_microservice(s)) {
        throw ReferenceError(fmt::format("chain '{}' references unknown microservice '{}'", c.id, s));
      }
    }
  }

  for (CommPair& p : comm_) {
    for (const std::string* end : {&p.a, &p.b}) {
      if (!has_microservice(*end)) {
        throw ReferenceError(fmt::format("comm pair {}-{} references unknown microservice '{}'", p.a, p.b, *end));
      }
    }
    if (p.a == p.b) throw ValidationError(fmt::format("comm pair on '{}' with itself", p.a));
    if (!(p.rate >= 0.0) || !std::isfinite(p.rate)) {
      throw ValidationError(fmt::format("comm pair {}-{}: rate must be non-negative", p.a, p.b));
    }
    if (p.b < p.a) std::swap(p.a, p.b);
  }
  std::sort(comm_.begin(), comm_.end(), [](const auto& x, const auto& y) {
    return std::tie(x.a, x.b) < std::tie(y.a, y.b);
  });
  for (std::size_t i = 1; i < comm_.size(); ++i) {
    if (comm_[i - 1].a == comm_[i].a && comm_[i - 1].b == comm_[i].b) {
      throw ValidationError(fmt::format("duplicate comm pair {}-{}", comm_[i].a, comm_[i].b));
    }
  }
}

const Microservice& Application::microservice(std::string_view id) const {
  auto it = std::lower_bound(microservices_.begin(), microservices_.end(), id,
                             [](const Microservice& m, std::string_view key) { return m.id < key; });
  if (it == microservices_.end() || it->id != id) throw LookupError(fmt::format("unknown microservice '{}'", id));
  return *it;
}

bool Application::has_microservice(std::string_view id) const {
  auto it = std::lower_bound(microservices_.begin(), microservices_.end(), id,
                             [](const Microservice& m, std::string_view key) { return m.id < key; });
  return it != microservices_.end() && it->id == id;
}

const ServiceChain& Application::chain(std::string_view id) const {
  auto it = std::lower_bound(chains_.begin(), chains_.end(), id,
                             [](const ServiceChain& c, std::string_view key) { return c.id < key; });
  if (it == chains_.end() || it->id != id) throw LookupError(fmt::format("unknown chain '{}'", id));
  return *it;
}

Application parse_application(const nlohmann::json& doc) {
  using detail::optional_field;
  using detail::require;
  if (!doc.is_object()) throw ParseError("application: document must be an object");

  std::vector<Microservice> micros;
  const auto& jm = require(doc, "microservices", "application");
  if (!jm.is_array()) throw ParseError("application.microservices: must be an array");
  for (std::size_t i = 0; i < jm.size(); ++i) {
    const std::string where = fmt::format("microservices[{}]", i);
    const auto& j = jm[i];
    Microservice m;
    m.id = detail::get_string(require(j, "id", where), where + ".id");
    m.demand = detail::parse_resources(require(j, "demand", where), where + ".demand");
    if (const auto* g = optional_field(j, "needs_gpu")) m.needs_gpu = detail::get_bool(*g, where + ".needs_gpu");
    if (const auto* r = optional_field(j, "regions_allowed")) {
      if (r->is_string()) {
        if (r->get<std::string>() != "any") {
          throw ParseError(where + ".regions_allowed: expected \"any\" or an array of regions");
        }
      } else if (r->is_array()) {
        std::set<std::string> regions;
        for (const auto& reg : *r) regions.insert(detail::get_string(reg, where + ".regions_allowed[]"));
        m.regions_allowed = std::move(regions);
      } else {
        throw ParseError(where + ".regions_allowed: expected \"any\" or an array of regions");
      }
    }
    if (const auto* c = optional_field(j, "colocate_with")) m.colocate_with = detail::get_string(*c, where + ".colocate_with");
    micros.push_back(std::move(m));
  }

  std::vector<ServiceChain> chains;
  const auto& jc = require(doc, "chains", "application");
  if (!jc.is_array()) throw ParseError("application.chains: must be an array");
  for (std::size_t i = 0; i < jc.size(); ++i) {
    const std::string where = fmt::format("chains[{}]", i);
    const auto& j = jc[i];
    ServiceChain c;
    c.id = detail::get_string(require(j, "id", where), where + ".id");
    const auto& svcs = require(j, "services", where);
    if (!svcs.is_array()) throw ParseError(where + ".services: must be an array");
    for (const auto& s : svcs) c.services.push_back(detail::get_string(s, where + ".services[]"));
    c.latency_limit_ms = detail::get_number(require(j, "latency_limit_ms", where), where + ".latency_limit_ms");
    chains.push_back(std::move(c));
  }

  std::vector<CommPair> comm;
  if (const auto* jp = optional_field(doc, "comm")) {
    if (!jp->is_array()) throw ParseError("application.comm: must be an array");
    for (std::size_t i = 0; i < jp->size(); ++i) {
      const std::string where = fmt::format("comm[{}]", i);
      const auto& j = (*jp)[i];
      CommPair p;
      p.a = detail::get_string(require(j, "a", where), where + ".a");
      p.b = detail::get_string(require(j, "b", where), where + ".b");
      p.rate = detail::get_number(require(j, "rate", where), where + ".rate");
      comm.push_back(std::move(p));
    }
  }
  return Application(std::move(micros), std::move(chains), std::move(comm));
}

Application parse_application(std::string_view text) {
  return parse_application(detail::parse_json_text(text, "application"));
}

nlohmann::json application_to_json(const Application& app) {
  nlohmann::json doc;
  doc["microservices"] = nlohmann::json::array();
  for (const Microservice& m : app.microservices()) {
    nlohmann::json j{{"id", m.id},
                     {"demand", {{"cpu", m.demand.cpu}, {"mem_gb", m.demand.mem_gb}, {"storage_gb", m.demand.storage_gb}}},
                     {"needs_gpu", m.needs_gpu}};
    if (m.regions_allowed) {
      j["regions_allowed"] = *m.regions_allowed;
    } else {
      j["regions_allowed"] = "any";
    }
    if (m.colocate_with) j["colocate_with"] = *m.colocate_with;
    doc["microservices"].push_back(std::move(j));
  }
  doc["chains"] = nlohmann::json::array();
  for (const ServiceChain& c : app.chains()) {
    doc["chains"].push_back({{"id", c.id}, {"services", c.services}, {"latency_limit_ms", c.latency_limit_ms}});
  }
  doc["comm"] = nlohmann::json::array();
  for (const CommPair& p : app.comm()) doc["comm"].push_back({{"a", p.a}, {"b", p.b}, {"rate", p.rate}});
  return doc;
}

std::string_view to_string(LatencyTier tier) {
  switch (tier) {
    case LatencyTier::ultra_low: return "ultra_low";
    case LatencyTier::moderate: return "moderate";
    case LatencyTier::relaxed: return "relaxed";
  }
  return "?";
}

LatencyTier latency_tier_from_string(std::string_view text) {
  if (text == "ultra_low" || text == "ultra-low") return LatencyTier::ultra_low;
  if (text == "moderate") return LatencyTier::moderate;
  if (text == "relaxed") return LatencyTier::relaxed;
  throw ParseError(fmt::format("unknown latency tier '{}'", text));
}

double tier_limit_ms(LatencyTier tier) {
  switch (tier) {
    case LatencyTier::ultra_low: return 0.2;
    case LatencyTier::moderate: return 0.4;
    case LatencyTier::relaxed: return 0.6;
  }
  return 0.0;
}

double Workload::limit(std::string_view chain) const {
  auto it = chain_limits.find(std::string(chain));
  if (it == chain_limits.end()) throw LookupError(fmt::format("workload '{}' has no limit for chain '{}'", id, chain));
  return it->second;
}

Workload build_workload(const Application& app, const TierComposition& composition, std::string id) {
  int total = 0;
  for (const auto& [tier, count] : composition) {
    if (count < 0) throw ArityError(fmt::format("tier {} has negative count {}", to_string(tier), count));
    total += count;
  }
  if (total != static_cast<int>(app.chains().size())) {
    throw ArityError(fmt::format("tier counts sum to {} but the application has {} chains", total,
                                 app.chains().size()));
  }
  Workload w;
  w.id = std::move(id);
  // chains() is sorted by id; strictest tiers are handed out first.
  auto chain = app.chains().begin();
  for (LatencyTier tier : {LatencyTier::ultra_low, LatencyTier::moderate, LatencyTier::relaxed}) {
    auto it = composition.find(tier);
    int count = it == composition.end() ? 0 : it->second;
    for (int k = 0; k < count; ++k, ++chain) w.chain_limits[chain->id] = tier_limit_ms(tier);
  }
  return w;
}

TierComposition standard_composition(std::string_view workload_id) {
  if (workload_id == "W1") return {{LatencyTier::relaxed, 2}, {LatencyTier::moderate, 7}, {LatencyTier::ultra_low, 4}};
  if (workload_id == "W2") return {{LatencyTier::relaxed, 2}, {LatencyTier::moderate, 4}, {LatencyTier::ultra_low, 7}};
  if (workload_id == "W3") return {{LatencyTier::relaxed, 2}, {LatencyTier::moderate, 2}, {LatencyTier::ultra_low, 9}};
  throw LookupError(fmt::format("unknown standard workload '{}'", workload_id));
}

Workload standard_workload(const Application& app, std::string_view workload_id) {
  return build_workload(app, standard_composition(workload_id), std::string(workload_id));
}

Workload workload_from_application(const Application& app) {
  Workload w;
  for (const ServiceChain& c : app.chains()) w.chain_limits[c.id] = c.latency_limit_ms;
  return w;
}

void validate_workload(const Application& app, const Workload& workload) {
  for (const auto& [chain, limit] : workload.chain_limits) {
    (void)app.chain(chain);  // throws LookupError for unknown chains
    if (!(limit > 0.0) || !std::isfinite(limit)) {
      throw ValidationError(fmt::format("workload '{}': limit for '{}' must be positive", workload.id, chain));
    }
  }
  for (const ServiceChain& c : app.chains()) {
    if (!workload.chain_limits.contains(c.id)) {
      throw ValidationError(fmt::format("workload '{}' has no limit for chain '{}'", workload.id, c.id));
    }
  }
}

Workload parse_workload(const nlohmann::json& doc, const Application& app) {
  using detail::optional_field;
  if (!doc.is_object()) throw ParseError("workload: document must be an object");
  std::string id = "custom";
  if (const auto* j = optional_field(doc, "id")) id = detail::get_string(*j, "workload.id");

  Workload w;
  if (const auto* limits = optional_field(doc, "chain_limits")) {
    if (!limits->is_object()) throw ParseError("workload.chain_limits: must be an object");
    w.id = id;
    for (const auto& [chain, v] : limits->items()) {
      w.chain_limits[chain] = detail::get_number(v, "workload.chain_limits." + chain);
    }
  } else if (const auto* comp = optional_field(doc, "composition")) {
    if (!comp->is_object()) throw ParseError("workload.composition: must be an object");
    TierComposition tiers;
    for (const auto& [tier, v] : comp->items()) {
      if (!v.is_number_integer()) throw ParseError("workload.composition." + tier + ": expected an integer");
      tiers[latency_tier_from_string(tier)] = v.get<int>();
    }
    w = build_workload(app, tiers, id);
  } else {
    throw ParseError("workload: expected 'chain_limits' or 'composition'");
  }
  validate_workload(app, w);
  return w;
}

nlohmann::json workload_to_json(const Workload& workload) {
  return {{"id", workload.id}, {"chain_limits", workload.chain_limits}};
}

namespace {

// Rounds to nearest with ties up.
int percent_of(double pct, std::size_t n) {
  return static_cast<int>(std::floor(pct * static_cast<double>(n) / 100.0 + 0.5));
}

}  // namespace

DroneScenario bundled_drone_scenario() {
  const std::vector<std::pair<std::string, std::vector<std::string>>> table = {
      {"Frontend", {"loadBal", "nginx", "cCtrl"}},
      {"Controller Cloud", {"nginx", "cCtrl", "consRoute", "eCtrl"}},
      {"Controller Edge", {"cCtrl", "eCtrl", "mCtrl", "camVid", "camImg", "loc", "speed", "lum", "orient"}},
      {"Construct Route", {"cCtrl", "consRoute", "eCtrl", "targetDB"}},
      {"Image", {"cCtrl", "eCtrl", "camImg", "imageDB"}},
      {"Video", {"cCtrl", "eCtrl", "camVid", "videoDB"}},
      {"Location", {"cCtrl", "eCtrl", "loc", "locationDB"}},
      {"Speed", {"cCtrl", "eCtrl", "speed", "speedDB"}},
      {"Luminosity", {"cCtrl", "eCtrl", "lum", "luminosityDB"}},
      {"Orientation", {"cCtrl", "eCtrl", "orient", "orientationDB"}},
      {"Motion Control", {"cCtrl", "eCtrl", "mCtrl", "imgRecog", "obsAvoid"}},
      {"Image Recog", {"eCtrl", "mCtrl", "imgRecog", "stockImageDB"}},
      {"Obs Avoidance", {"eCtrl", "mCtrl", "obsAvoid", "log"}},
  };

  std::set<std::string> ids;
  for (const auto& [_, services] : table) ids.insert(services.begin(), services.end());

  std::vector<Microservice> micros;
  for (const std::string& id : ids) {
    Microservice m;
    m.id = id;
    bool is_db = id.size() > 2 && id.ends_with("DB");
    m.demand = ResourceVector{1.0, 1.0, is_db ? 10.0 : 1.0};
    micros.push_back(std::move(m));
  }

  // Constraint classes claim the first k ids in sorted order, gpu first, then
  // region, then collocation, each skipping ids already claimed.
  const int gpu_count = percent_of(20.0, micros.size());
  const int region_count = percent_of(20.0, micros.size());
  const int colloc_count = 2 * std::max(1, percent_of(10.0, micros.size()) / 2);
  std::vector<bool> claimed(micros.size(), false);
  auto claim = [&](int k, auto&& apply) {
    for (std::size_t i = 0; i < micros.size() && k > 0; ++i) {
      if (claimed[i]) continue;
      claimed[i] = true;
      apply(micros[i]);
      --k;
    }
  };
  claim(gpu_count, [](Microservice& m) { m.needs_gpu = true; });
  claim(region_count, [](Microservice& m) { m.regions_allowed = std::set<std::string>{"east"}; });
  std::vector<Microservice*> colloc;
  claim(colloc_count, [&](Microservice& m) { colloc.push_back(&m); });
  for (std::size_t i = 0; i + 1 < colloc.size(); i += 2) {
    colloc[i]->colocate_with = colloc[i + 1]->id;
    colloc[i + 1]->colocate_with = colloc[i]->id;
  }

  std::map<std::pair<std::string, std::string>, double> rates;
  std::vector<ServiceChain> chains;
  for (const auto& [id, services] : table) {
    chains.push_back(ServiceChain{id, services, tier_limit_ms(LatencyTier::relaxed)});
    for (std::size_t i = 0; i + 1 < services.size(); ++i) {
      auto key = std::minmax(services[i], services[i + 1]);
      rates[{key.first, key.second}] = 1.0;
    }
  }
  std::vector<CommPair> comm;
  for (const auto& [key, rate] : rates) comm.push_back(CommPair{key.first, key.second, rate});

  Application provisional(micros, chains, comm);
  Workload w1 = standard_workload(provisional, "W1");
  for (ServiceChain& c : chains) c.latency_limit_ms = w1.limit(c.id);

  DroneScenario scenario{Application(std::move(micros), std::move(chains), std::move(comm)), {}};
  for (const char* id : {"W1", "W2", "W3"}) scenario.workloads.push_back(standard_workload(scenario.app, id));
  return scenario;
}

}  // namespace edgeplace
