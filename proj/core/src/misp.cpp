#include "edgeplace/misp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "edgeplace/error.hpp"
#include "edgeplace/log.hpp"

namespace edgeplace {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Costs closer than this are treated as ties, so the lexicographic rule
// decides instead of summation order.
bool strictly_less(double a, double b) { return a < b - 1e-9 * std::max(1.0, std::abs(b)); }

class BranchAndBound {
 public:
  explicit BranchAndBound(const AssignmentProblem& pr) : pr_(pr), residual_(pr.capacity), current_(pr.items) {
    // Items with the same cost row and demand are interchangeable; forcing
    // their bins to be non-decreasing keeps the lexicographically smallest
    // optimum and prunes the permutations.
    twin_.assign(pr.items, kNone);
    for (std::size_t i = 0; i < pr.items; ++i) {
      for (std::size_t j = i; j-- > 0;) {
        if (pr.demand[j] == pr.demand[i] &&
            std::equal(pr.cost.begin() + static_cast<std::ptrdiff_t>(j * pr.bins),
                       pr.cost.begin() + static_cast<std::ptrdiff_t>((j + 1) * pr.bins),
                       pr.cost.begin() + static_cast<std::ptrdiff_t>(i * pr.bins))) {
          twin_[i] = j;
          break;
        }
      }
    }
  }

  Assignment run() {
    dfs(0, 0.0);
    if (best_.bin_of.empty() && pr_.items > 0) throw InfeasibleError("assignment: no capacity-feasible solution");
    return best_;
  }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  double bound(std::size_t from) const {
    double total = 0.0;
    for (std::size_t i = from; i < pr_.items; ++i) {
      double row = kInf;
      for (std::size_t b = 0; b < pr_.bins; ++b) {
        if (pr_.demand[i].fits_within(residual_[b])) row = std::min(row, pr_.at(i, b));
      }
      if (row == kInf) return kInf;
      total += row;
    }
    return total;
  }

  void dfs(std::size_t i, double partial) {
    if (i == pr_.items) {
      if (best_.bin_of.empty() || strictly_less(partial, best_.cost)) best_ = {current_, partial};
      return;
    }
    if (!best_.bin_of.empty() && !strictly_less(partial + bound(i), best_.cost)) return;
    std::size_t first = twin_[i] == kNone ? 0 : current_[twin_[i]];
    for (std::size_t b = first; b < pr_.bins; ++b) {
      if (!pr_.demand[i].fits_within(residual_[b])) continue;
      residual_[b] -= pr_.demand[i];
      current_[i] = b;
      dfs(i + 1, partial + pr_.at(i, b));
      residual_[b] += pr_.demand[i];
    }
  }

  const AssignmentProblem& pr_;
  std::vector<ResourceVector> residual_;
  std::vector<std::size_t> current_;
  std::vector<std::size_t> twin_;
  Assignment best_;
};

// Unit of assignment: one microservice or a collocated pair.
struct Unit {
  std::vector<std::size_t> members;
};

std::vector<Unit> units_of(const Scenario& sc) {
  std::vector<Unit> units;
  for (std::size_t m = 0; m < sc.micro_count(); ++m) {
    auto q = sc.partner(m);
    if (q && *q < m) continue;
    Unit u{{m}};
    if (q) u.members.push_back(*q);
    units.push_back(std::move(u));
  }
  return units;
}

std::vector<std::size_t> with_partner(const Scenario& sc, std::size_t m) {
  std::vector<std::size_t> out{m};
  if (auto q = sc.partner(m)) out.push_back(*q);
  return out;
}

}  // namespace

Assignment enumerate_assignment(const AssignmentProblem& pr) {
  Assignment best;
  std::vector<std::size_t> bins(pr.items, 0);
  if (pr.bins == 0 && pr.items > 0) throw InfeasibleError("assignment: no bins");
  while (true) {
    std::vector<ResourceVector> load(pr.bins);
    double cost = 0.0;
    bool ok = true;
    for (std::size_t i = 0; i < pr.items; ++i) {
      load[bins[i]] += pr.demand[i];
      cost += pr.at(i, bins[i]);
    }
    for (std::size_t b = 0; b < pr.bins && ok; ++b) ok = load[b].fits_within(pr.capacity[b]);
    if (ok && (best.bin_of.empty() || strictly_less(cost, best.cost))) best = {bins, cost};

    // Odometer increment with the last item fastest keeps lexicographic order.
    std::size_t k = pr.items;
    while (k > 0) {
      --k;
      if (++bins[k] < pr.bins) break;
      bins[k] = 0;
      if (k == 0) {
        k = pr.items + 1;
        break;
      }
    }
    if (pr.items == 0 || k == pr.items + 1) break;
  }
  if (best.bin_of.empty() && pr.items > 0) throw InfeasibleError("assignment: no capacity-feasible solution");
  return best;
}

Assignment solve_assignment(const AssignmentProblem& pr) {
  if (pr.items * pr.bins <= 32) return enumerate_assignment(pr);
  return BranchAndBound(pr).run();
}

Placement mip_solve(const Scenario& sc, const CostMatrix& t) {
  std::vector<Unit> units = units_of(sc);
  AssignmentProblem pr;
  pr.items = units.size();
  pr.bins = sc.site_count();
  pr.cost.resize(pr.items * pr.bins, 0.0);
  pr.demand.resize(pr.items);
  for (std::size_t e = 0; e < pr.bins; ++e) pr.capacity.push_back(sc.site(e).capacity);
  for (std::size_t i = 0; i < units.size(); ++i) {
    for (std::size_t m : units[i].members) pr.demand[i] += sc.micro(m).demand;
    for (std::size_t e = 0; e < pr.bins; ++e) {
      bool forbidden = false;
      double sum = 0.0;
      for (std::size_t m : units[i].members) {
        forbidden = forbidden || t.forbidden(m, e);
        sum += t.at(m, e);
      }
      pr.cost[i * pr.bins + e] = forbidden ? t.kappa : sum;
    }
  }

  Assignment a = solve_assignment(pr);
  Placement p = Placement::empty_for(sc);
  for (std::size_t i = 0; i < units.size(); ++i) {
    for (std::size_t m : units[i].members) p.insert(a.bin_of[i], m);
  }
  return p;
}

Placement local_search(const Scenario& sc, const Placement& input, const CostMatrix& t) {
  constexpr std::size_t kTop = 3;
  constexpr int kMaxRounds = 100;

  Placement p = input;
  double current = placement_cost(sc, p, t);
  for (int round = 0; round < kMaxRounds; ++round) {
    CommunicationCost comm = communication_cost(sc, p);
    std::vector<std::size_t> order(sc.micro_count());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return comm.per_service[a] > comm.per_service[b]; });

    std::optional<Placement> best;
    double best_cost = current;
    for (std::size_t k = 0; k < std::min(kTop, order.size()); ++k) {
      std::size_t m = order[k];
      if (!(comm.per_service[m] > 0.0)) break;
      std::vector<std::size_t> hosts = p.hosts_of(m);
      if (hosts.size() != 1) continue;
      std::size_t from = hosts.front();
      std::vector<std::size_t> unit = with_partner(sc, m);

      for (std::size_t e = 0; e < sc.site_count(); ++e) {
        if (e == from) continue;
        bool ok = true;
        Placement moved = p;
        for (std::size_t u : unit) {
          ok = ok && !t.forbidden(u, e) && moved.hosts(from, u) && !moved.hosts(e, u);
          if (!ok) break;
          moved.erase(from, u);
          moved.insert(e, u);
        }
        if (!ok || !site_load(sc, moved, e).fits_within(sc.site(e).capacity)) continue;
        double cost = placement_cost(sc, moved, t);
        if (cost < best_cost) {
          best_cost = cost;
          best = std::move(moved);
        }
      }
    }
    if (!best) break;
    log().debug("local search round {}: cost {:.6f} -> {:.6f}", round, current, best_cost);
    p = std::move(*best);
    current = best_cost;
  }
  return p;
}

LatencyRepair ensure_latency(const Scenario& sc, const Placement& input, const std::vector<double>& limits,
                             const CostMatrix& t) {
  LatencyRepair out{input, {}};
  Placement& p = out.placement;
  for (std::size_t b = 0; b < sc.bs_count(); ++b) {
    for (std::size_t c = 0; c < sc.chain_count(); ++c) {
      while (!chain_latency(sc, p, b, c).within(limits[c])) {
        std::vector<std::size_t> members = sc.chain_members(c);
        std::stable_sort(members.begin(), members.end(), [&](std::size_t x, std::size_t y) {
          double lx = sc.micro(x).demand.cpu;
          double ly = sc.micro(y).demand.cpu;
          return lx != ly ? lx < ly : x < y;
        });

        bool duplicated = false;
        for (std::size_t m : members) {
          Latency nearest = Latency::unreachable();
          for (std::size_t e : p.hosts_of(m)) nearest = std::min(nearest, sc.bs_site_latency(b, e));

          std::optional<std::size_t> target;
          for (std::size_t e = 0; e < sc.site_count(); ++e) {
            if (p.hosts(e, m)) continue;
            std::vector<std::size_t> unit;
            for (std::size_t u : with_partner(sc, m)) {
              if (!p.hosts(e, u)) unit.push_back(u);
            }
            bool ok = true;
            ResourceVector load = site_load(sc, p, e);
            for (std::size_t u : unit) {
              ok = ok && !t.forbidden(u, e);
              load += sc.micro(u).demand;
            }
            if (!ok || !load.fits_within(sc.site(e).capacity)) continue;
            if (!(sc.bs_site_latency(b, e) < nearest)) continue;
            if (!target || sc.bs_site_latency(b, e) < sc.bs_site_latency(b, *target)) target = e;
          }
          if (!target) continue;
          for (std::size_t u : with_partner(sc, m)) {
            if (!p.hosts(*target, u)) p.insert(*target, u);
          }
          duplicated = true;
          break;
        }
        if (!duplicated) {
          out.unmet.emplace_back(b, c);
          log().info("misp: chain '{}' stays over its limit at {}", sc.chain(c).id, sc.bs_id(b));
          break;
        }
      }
    }
  }
  return out;
}

Placement misp_place(const Scenario& sc, const Workload& workload, const std::optional<Placement>& prev) {
  const std::vector<double> limits = sc.limits(workload);
  CostMatrix t = build_tmatrix(sc, prev);
  Placement mip = mip_solve(sc, t);
  for (std::size_t m = 0; m < sc.micro_count(); ++m) {
    for (std::size_t e : mip.hosts_of(m)) {
      if (t.forbidden(m, e)) {
        throw InfeasibleError(
            fmt::format("misp: '{}' fits only on sites its constraints forbid", sc.micro_id(m)));
      }
    }
  }
  Placement searched = local_search(sc, mip, t);
  return ensure_latency(sc, searched, limits, t).placement;
}

}  // namespace edgeplace
