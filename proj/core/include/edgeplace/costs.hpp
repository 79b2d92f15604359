#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "edgeplace/placement.hpp"

namespace edgeplace {

/// Deployment cost of every (microservice, site) cell. Cells that break a
/// hardware or data-locality constraint hold exactly `kappa`.
struct CostMatrix {
  std::size_t micros = 0;
  std::size_t sites = 0;
  std::vector<double> entries;
  double kappa = 0.0;
  std::optional<Placement> prev;

  [[nodiscard]] double at(std::size_t m, std::size_t e) const { return entries[m * sites + e]; }
  [[nodiscard]] bool forbidden(std::size_t m, std::size_t e) const { return at(m, e) == kappa; }
};

/// gamma: cpu demand x cpu unit cost + storage demand x storage unit cost.
double compute_cost(const Scenario& sc, std::size_t m, std::size_t e);
/// rho: charged when a microservice hosted elsewhere in the previous placement
/// lands on `e`. Half the compute cost at the destination.
double relocation_cost(const Scenario& sc, std::size_t m, std::size_t e);

CostMatrix build_tmatrix(const Scenario& sc, const std::optional<Placement>& prev = std::nullopt);

struct ScoreWeights {
  double deploy = 0.2;
  double cpu = 0.2;
  double storage = 0.2;
  double comm = 0.2;
  double update = 0.2;

  /// Throws ValidationError unless each weight is in [0,1] and they sum to 1.
  void validate() const;
  /// Parses "a1,a2,a3,a4,a5".
  static ScoreWeights parse(std::string_view text);
};

/// Cost components. Raw values straight out of evaluation, or normalized to
/// [0,1] across a candidate set by `normalize`.
struct CostBreakdown {
  double deploy = 0.0;
  double cpu = 0.0;
  double storage = 0.0;
  double comm = 0.0;
  double update = 0.0;
  double compute_raw = 0.0;
  double relocation_raw = 0.0;
};

/// Weighted sum of the five components.
double score(const ScoreWeights& w, const CostBreakdown& b);

/// Divides each component by its maximum over the set; a zero maximum maps
/// that component to 0.
std::vector<CostBreakdown> normalize(std::vector<CostBreakdown> raw);

struct CommunicationCost {
  double total = 0.0;
  /// Sum over pairs whose endpoints are both hosted; always finite.
  double hosted_total = 0.0;
  /// Indexed by microservice: the sum of its incident pair costs.
  std::vector<double> per_service;
};

/// Each comm pair costs rate x latency between the closest hosting replicas of
/// its two endpoints. A pair with exactly one endpoint hosted costs +inf; a
/// pair with neither hosted carries no traffic and costs 0.
CommunicationCost communication_cost(const Scenario& sc, const Placement& p);

/// Sum of tau over deployed instances.
double deployment_cost(const Placement& p, const CostMatrix& t);

/// Deployment cost plus total communication cost.
double placement_cost(const Scenario& sc, const Placement& p, const CostMatrix& t);

}  // namespace edgeplace
