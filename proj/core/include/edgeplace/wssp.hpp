#pragma once

#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "edgeplace/costs.hpp"
#include "edgeplace/placement.hpp"

namespace edgeplace {

/// Microservices (by index) assigned to one site.
struct SitePiece {
  std::size_t site = 0;
  std::vector<std::size_t> services;
  friend bool operator==(const SitePiece&, const SitePiece&) = default;
};

/// One subset of the set-cover instance: a site (possibly with split pieces
/// on neighbours), the base stations it would serve and its weight.
struct CandidateSite {
  std::string site;
  std::set<std::size_t> covered_bs;
  double weight = 0.0;
  std::vector<SitePiece> pieces;
};

/// Greedy weighted set cover: repeatedly takes the candidate with the lowest
/// weight per newly covered element, ties by lower weight then site id.
/// Returns the picks in order. Throws InfeasibleError when the candidates do
/// not cover the universe.
std::vector<CandidateSite> find_minimal_sites(const std::vector<CandidateSite>& candidates,
                                              const std::set<std::size_t>& universe);

/// Splits `services` between `site` and its latency-ordered neighbours.
///
/// The services are ordered by total demand (descending, ties by id) and the
/// ones that fit on `site` stay there; the rest go to the first neighbour from
/// which at least one base station meets `limit_ms`, recursing when that
/// neighbour is short of capacity too. `current` supplies already-deployed
/// instances, which consume capacity.
///
/// Throws ContractError when `site` could take every service, and
/// InfeasibleError when no neighbour can absorb the remainder.
std::vector<SitePiece> split_and_assign(const Scenario& sc, const Placement& current,
                                        std::span<const std::size_t> services, double limit_ms, std::size_t site);

/// Weighted set-cover service placement.
///
/// Chains are handled strictest first. Hardware and capacity limits are
/// respected; collocation and data locality are not considered.
Placement wssp_place(const Scenario& sc, const Workload& workload, const ScoreWeights& weights = {});

}  // namespace edgeplace
