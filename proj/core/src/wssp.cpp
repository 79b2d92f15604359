#include "edgeplace/wssp.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "edgeplace/error.hpp"
#include "edgeplace/log.hpp"

namespace edgeplace {

namespace {

std::size_t new_elements(const CandidateSite& c, const std::set<std::size_t>& universe,
                         const std::set<std::size_t>& included) {
  std::size_t n = 0;
  for (std::size_t x : c.covered_bs) {
    if (universe.contains(x) && !included.contains(x)) ++n;
  }
  return n;
}

// Services from `services` that still need an instance on site e.
std::vector<std::size_t> missing_at(const Placement& p, std::span<const std::size_t> services, std::size_t e) {
  std::vector<std::size_t> out;
  for (std::size_t m : services) {
    if (!p.hosts(e, m)) out.push_back(m);
  }
  return out;
}

bool hardware_ok(const Scenario& sc, std::size_t e, std::size_t m) {
  return !sc.micro(m).needs_gpu || sc.site(e).has_gpu;
}

bool fits(const Scenario& sc, const Placement& p, std::span<const std::size_t> services, std::size_t e) {
  ResourceVector load = site_load(sc, p, e);
  for (std::size_t m : missing_at(p, services, e)) {
    if (!hardware_ok(sc, e, m)) return false;
    load += sc.micro(m).demand;
  }
  return load.fits_within(sc.site(e).capacity);
}

void apply_pieces(Placement& p, const std::vector<SitePiece>& pieces) {
  for (const SitePiece& piece : pieces) {
    for (std::size_t m : piece.services) {
      if (!p.hosts(piece.site, m)) p.insert(piece.site, m);
    }
  }
}

// Best case latency for the split (prefix on `site`, remainder on `other`)
// over all base stations.
Latency best_split_latency(const Scenario& sc, std::size_t site, std::size_t prefix_size, std::size_t other,
                           std::size_t remainder_size) {
  Latency best = Latency::unreachable();
  for (std::size_t b = 0; b < sc.bs_count(); ++b) {
    Latency l = Latency::zero();
    for (std::size_t i = 0; i < prefix_size; ++i) l += sc.bs_site_latency(b, site);
    for (std::size_t i = 0; i < remainder_size; ++i) l += sc.bs_site_latency(b, other);
    best = std::min(best, l);
  }
  return best;
}

}  // namespace

std::vector<CandidateSite> find_minimal_sites(const std::vector<CandidateSite>& candidates,
                                              const std::set<std::size_t>& universe) {
  std::set<std::size_t> reachable;
  for (const CandidateSite& c : candidates) reachable.insert(c.covered_bs.begin(), c.covered_bs.end());
  for (std::size_t x : universe) {
    if (!reachable.contains(x)) throw InfeasibleError(fmt::format("element {} is covered by no candidate", x));
  }

  std::vector<CandidateSite> picked;
  std::vector<bool> used(candidates.size(), false);
  std::set<std::size_t> included;
  while (included.size() < universe.size()) {
    std::size_t best = candidates.size();
    std::size_t best_gain = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (used[i]) continue;
      std::size_t gain = new_elements(candidates[i], universe, included);
      if (gain == 0) continue;
      if (best == candidates.size()) {
        best = i;
        best_gain = gain;
        continue;
      }
      // Compare W_i / gain_i without dividing.
      const CandidateSite& c = candidates[i];
      const CandidateSite& b = candidates[best];
      double lhs = c.weight * static_cast<double>(best_gain);
      double rhs = b.weight * static_cast<double>(gain);
      bool better = lhs < rhs || (lhs == rhs && (c.weight < b.weight || (c.weight == b.weight && c.site < b.site)));
      if (better) {
        best = i;
        best_gain = gain;
      }
    }
    if (best == candidates.size()) throw InfeasibleError("set cover stalled before covering the universe");
    used[best] = true;
    for (std::size_t x : candidates[best].covered_bs) {
      if (universe.contains(x)) included.insert(x);
    }
    picked.push_back(candidates[best]);
  }
  return picked;
}

std::vector<SitePiece> split_and_assign(const Scenario& sc, const Placement& current,
                                        std::span<const std::size_t> services, double limit_ms, std::size_t site) {
  if (fits(sc, current, services, site)) {
    throw ContractError(fmt::format("split_and_assign: site '{}' can host the whole chain", sc.site_id(site)));
  }

  std::vector<std::size_t> order(services.begin(), services.end());
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    double da = sc.micro(a).demand.total();
    double db = sc.micro(b).demand.total();
    if (da != db) return da > db;
    return a < b;
  });

  Placement tentative = current;
  SitePiece head{site, {}};
  std::vector<std::size_t> remainder;
  ResourceVector load = site_load(sc, tentative, site);
  for (std::size_t m : order) {
    if (tentative.hosts(site, m)) {
      head.services.push_back(m);
      continue;
    }
    ResourceVector next = load + sc.micro(m).demand;
    if (hardware_ok(sc, site, m) && next.fits_within(sc.site(site).capacity)) {
      load = next;
      head.services.push_back(m);
    } else {
      remainder.push_back(m);
    }
  }
  if (head.services.empty()) {
    throw InfeasibleError(fmt::format("site '{}' has no room for any part of the chain", sc.site_id(site)));
  }
  apply_pieces(tentative, {head});

  for (const auto& [neighbour_id, latency] : neighbors_by_latency(sc.graph(), sc.site_id(site))) {
    if (!latency.finite()) continue;
    std::size_t k = sc.site_index(neighbour_id);
    if (!best_split_latency(sc, site, head.services.size(), k, remainder.size()).within(limit_ms)) continue;
    if (fits(sc, tentative, remainder, k)) {
      return {head, SitePiece{k, remainder}};
    }
    try {
      std::vector<SitePiece> rest = split_and_assign(sc, tentative, remainder, limit_ms, k);
      rest.insert(rest.begin(), head);
      return rest;
    } catch (const InfeasibleError&) {
      continue;
    }
  }
  throw InfeasibleError(fmt::format("no neighbour of '{}' can take the rest of the chain", sc.site_id(site)));
}

Placement wssp_place(const Scenario& sc, const Workload& workload, const ScoreWeights& weights) {
  weights.validate();
  const std::vector<double> limits = sc.limits(workload);

  std::vector<std::size_t> chain_order(sc.chain_count());
  std::iota(chain_order.begin(), chain_order.end(), std::size_t{0});
  std::stable_sort(chain_order.begin(), chain_order.end(),
                   [&](std::size_t a, std::size_t b) { return limits[a] < limits[b]; });

  Placement placement = Placement::empty_for(sc);
  for (std::size_t c : chain_order) {
    const double limit = limits[c];
    const auto& members = sc.chain_members(c);

    while (true) {
      std::set<std::size_t> universe;
      for (std::size_t b = 0; b < sc.bs_count(); ++b) {
        if (!chain_latency(sc, placement, b, c).within(limit)) universe.insert(b);
      }
      if (universe.empty()) break;

      std::vector<CandidateSite> candidates;
      std::vector<CostBreakdown> raw;
      for (std::size_t e = 0; e < sc.site_count(); ++e) {
        Latency farthest = Latency::zero();
        for (std::size_t b = 0; b < sc.bs_count(); ++b) farthest = std::max(farthest, sc.bs_site_latency(b, e));
        if (!farthest.within(limit)) continue;

        std::vector<SitePiece> pieces;
        if (fits(sc, placement, members, e)) {
          pieces.push_back(SitePiece{e, std::vector<std::size_t>(members.begin(), members.end())});
        } else {
          try {
            pieces = split_and_assign(sc, placement, members, limit, e);
          } catch (const InfeasibleError&) {
            continue;
          }
        }

        Placement tentative = placement;
        apply_pieces(tentative, pieces);
        CandidateSite cand{sc.site_id(e), {}, 0.0, pieces};
        for (std::size_t b : universe) {
          if (chain_latency(sc, tentative, b, c).within(limit)) cand.covered_bs.insert(b);
        }
        if (cand.covered_bs.empty()) continue;

        CostBreakdown cost;
        for (const SitePiece& piece : pieces) {
          for (std::size_t m : missing_at(placement, piece.services, piece.site)) {
            const ResourceVector& d = sc.micro(m).demand;
            const UnitCost& u = sc.site(piece.site).unit_cost;
            cost.deploy += 1.0;
            cost.cpu += d.cpu * u.cpu_cost_per_unit;
            cost.storage += d.storage_gb * u.storage_cost_per_gb;
          }
        }
        cost.compute_raw = cost.cpu + cost.storage;
        // Communication inside the chain, between the pieces of this candidate.
        for (const CommPair& pair : sc.app().comm()) {
          std::size_t a = sc.micro_index(pair.a);
          std::size_t b = sc.micro_index(pair.b);
          std::optional<std::size_t> sa, sb;
          for (const SitePiece& piece : pieces) {
            if (std::find(piece.services.begin(), piece.services.end(), a) != piece.services.end()) sa = piece.site;
            if (std::find(piece.services.begin(), piece.services.end(), b) != piece.services.end()) sb = piece.site;
          }
          if (sa && sb) cost.comm += pair.rate * sc.site_site_latency(*sa, *sb).ms();
        }
        candidates.push_back(std::move(cand));
        raw.push_back(cost);
      }

      if (candidates.empty()) {
        throw InfeasibleError(fmt::format("wssp: no feasible cover for chain '{}'", sc.chain(c).id));
      }
      std::vector<CostBreakdown> normalized = normalize(raw);
      for (std::size_t i = 0; i < candidates.size(); ++i) candidates[i].weight = score(weights, normalized[i]);

      std::vector<CandidateSite> picked = find_minimal_sites(candidates, universe);
      bool progress = false;
      for (const CandidateSite& cand : picked) {
        bool ok = true;
        for (const SitePiece& piece : cand.pieces) ok = ok && fits(sc, placement, piece.services, piece.site);
        if (!ok) continue;
        apply_pieces(placement, cand.pieces);
        progress = true;
      }
      if (!progress) {
        throw InfeasibleError(fmt::format("wssp: chosen cover for chain '{}' no longer fits", sc.chain(c).id));
      }
      log().debug("wssp: chain '{}' placed with {} candidate(s)", sc.chain(c).id, picked.size());
    }
  }
  return placement;
}

}  // namespace edgeplace
