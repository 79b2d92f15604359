#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "edgeplace/costs.hpp"
#include "edgeplace/placement.hpp"

namespace edgeplace {

/// Generalized assignment: every item goes to exactly one bin, bins have
/// componentwise capacities, cost is the sum of the chosen cells.
struct AssignmentProblem {
  std::size_t items = 0;
  std::size_t bins = 0;
  std::vector<double> cost;  // item-major, items x bins
  std::vector<ResourceVector> demand;
  std::vector<ResourceVector> capacity;

  [[nodiscard]] double at(std::size_t i, std::size_t b) const { return cost[i * bins + b]; }
};

struct Assignment {
  std::vector<std::size_t> bin_of;
  double cost = 0.0;
};

/// Exact optimum by depth-first branch and bound. Among optimal assignments
/// (costs equal within 1e-9 relative) the lexicographically smallest `bin_of`
/// is returned. Small instances (items x bins <= 32) are enumerated outright.
/// Throws InfeasibleError when nothing fits.
Assignment solve_assignment(const AssignmentProblem& problem);

/// Plain enumeration of all bins^items assignments; the reference for the
/// branch and bound.
Assignment enumerate_assignment(const AssignmentProblem& problem);

/// One instance per microservice at minimum tau cost under site capacities.
/// Collocated pairs are merged into a single item before solving.
Placement mip_solve(const Scenario& sc, const CostMatrix& t);

/// Communication-driven migration of single microservices (with their
/// collocation partner) while the total cost strictly decreases. Considers
/// the three microservices with the highest communication cost per round,
/// at most 100 rounds.
Placement local_search(const Scenario& sc, const Placement& p, const CostMatrix& t);

struct LatencyRepair {
  Placement placement;
  /// (bs, chain) index pairs still over their limit.
  std::vector<std::pair<std::size_t, std::size_t>> unmet;
};

/// Adds replicas close to each base station until its chains meet their
/// limits. Never removes instances.
LatencyRepair ensure_latency(const Scenario& sc, const Placement& p, const std::vector<double>& limits,
                             const CostMatrix& t);

/// mip_solve, then local_search, then ensure_latency. Throws InfeasibleError
/// when capacity allows no constraint-respecting assignment.
Placement misp_place(const Scenario& sc, const Workload& workload,
                     const std::optional<Placement>& prev = std::nullopt);

}  // namespace edgeplace
