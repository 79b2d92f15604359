#include "edgeplace/costs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "edgeplace/error.hpp"

namespace edgeplace {

double compute_cost(const Scenario& sc, std::size_t m, std::size_t e) {
  const ResourceVector& d = sc.micro(m).demand;
  const UnitCost& u = sc.site(e).unit_cost;
  return d.cpu * u.cpu_cost_per_unit + d.storage_gb * u.storage_cost_per_gb;
}

double relocation_cost(const Scenario& sc, std::size_t m, std::size_t e) { return 0.5 * compute_cost(sc, m, e); }

CostMatrix build_tmatrix(const Scenario& sc, const std::optional<Placement>& prev) {
  CostMatrix t;
  t.micros = sc.micro_count();
  t.sites = sc.site_count();
  t.prev = prev;
  t.entries.assign(t.micros * t.sites, 0.0);

  double max_finite = 0.0;
  for (std::size_t m = 0; m < t.micros; ++m) {
    bool hosted_before = prev && !prev->hosts_of(m).empty();
    for (std::size_t e = 0; e < t.sites; ++e) {
      if (!sc.site_allows(e, m)) continue;
      double cost = compute_cost(sc, m, e);
      if (hosted_before && !prev->hosts(e, m)) cost += relocation_cost(sc, m, e);
      t.entries[m * t.sites + e] = cost;
      max_finite = std::max(max_finite, cost);
    }
  }
  t.kappa = 1e6 * (max_finite + 1.0);
  for (std::size_t m = 0; m < t.micros; ++m) {
    for (std::size_t e = 0; e < t.sites; ++e) {
      if (!sc.site_allows(e, m)) t.entries[m * t.sites + e] = t.kappa;
    }
  }
  return t;
}

void ScoreWeights::validate() const {
  const double w[] = {deploy, cpu, storage, comm, update};
  double sum = 0.0;
  for (double x : w) {
    if (!(x >= 0.0 && x <= 1.0)) throw ValidationError(fmt::format("score weight {} outside [0,1]", x));
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ValidationError(fmt::format("score weights sum to {}, expected 1", sum));
}

ScoreWeights ScoreWeights::parse(std::string_view text) {
  std::vector<double> values;
  std::stringstream in{std::string(text)};
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ParseError(fmt::format("weights: '{}' is not a number", item));
    }
  }
  if (values.size() != 5) throw ParseError(fmt::format("weights: expected 5 values, got {}", values.size()));
  ScoreWeights w{values[0], values[1], values[2], values[3], values[4]};
  w.validate();
  return w;
}

double score(const ScoreWeights& w, const CostBreakdown& b) {
  w.validate();
  return w.deploy * b.deploy + w.cpu * b.cpu + w.storage * b.storage + w.comm * b.comm + w.update * b.update;
}

std::vector<CostBreakdown> normalize(std::vector<CostBreakdown> raw) {
  auto scale = [&](double CostBreakdown::*field) {
    double hi = 0.0;
    for (const auto& b : raw) hi = std::max(hi, b.*field);
    for (auto& b : raw) b.*field = hi > 0.0 ? b.*field / hi : 0.0;
  };
  scale(&CostBreakdown::deploy);
  scale(&CostBreakdown::cpu);
  scale(&CostBreakdown::storage);
  scale(&CostBreakdown::comm);
  scale(&CostBreakdown::update);
  return raw;
}

CommunicationCost communication_cost(const Scenario& sc, const Placement& p) {
  CommunicationCost out;
  out.per_service.assign(sc.micro_count(), 0.0);
  for (const CommPair& pair : sc.app().comm()) {
    std::size_t a = sc.micro_index(pair.a);
    std::size_t b = sc.micro_index(pair.b);
    Latency best = Latency::unreachable();
    for (std::size_t ea = 0; ea < sc.site_count(); ++ea) {
      if (!p.hosts(ea, a)) continue;
      for (std::size_t eb = 0; eb < sc.site_count(); ++eb) {
        if (p.hosts(eb, b)) best = std::min(best, sc.site_site_latency(ea, eb));
      }
    }
    double cost = 0.0;
    if (best.finite()) {
      cost = pair.rate * best.ms();
      out.hosted_total += cost;
    } else if (!p.hosts_of(a).empty() || !p.hosts_of(b).empty()) {
      cost = std::numeric_limits<double>::infinity();
    }
    out.total += cost;
    out.per_service[a] += cost;
    out.per_service[b] += cost;
  }
  return out;
}

double deployment_cost(const Placement& p, const CostMatrix& t) {
  double sum = 0.0;
  for (std::size_t e = 0; e < t.sites; ++e) {
    for (std::size_t m = 0; m < t.micros; ++m) {
      if (p.hosts(e, m)) sum += t.at(m, e);
    }
  }
  return sum;
}

double placement_cost(const Scenario& sc, const Placement& p, const CostMatrix& t) {
  return deployment_cost(p, t) + communication_cost(sc, p).total;
}

}  // namespace edgeplace
