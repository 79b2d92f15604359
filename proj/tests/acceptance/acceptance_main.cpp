// Acceptance run: one PASS/FAIL line per criterion, exit status 1 when any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "edgeplace/fixtures.hpp"
#include "edgeplace/harness.hpp"
#include "edgeplace/misp.hpp"
#include "edgeplace/rlsp_agent.hpp"
#include "edgeplace/wssp.hpp"
#include "oracles.hpp"

using namespace edgeplace;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  std::printf("[%s] %2d %-26s %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

struct Drone {
  DroneScenario d = bundled_drone_scenario();
  Scenario sc{drone_topology(), d.app};
};

struct RlRun {
  std::uint64_t seed = 0;
  double train_s = 0.0;
  PolicyParameters policy;
  std::map<std::string, Extraction> per_workload;
};

RlRun train_rl(const Drone& s, std::uint64_t seed) {
  RlRun out;
  out.seed = seed;
  auto t0 = Clock::now();
  out.policy = train(s.sc, s.d.workloads, AgentConfig{}, seed).params;
  out.train_s = seconds_since(t0);
  for (const Workload& w : s.d.workloads) {
    PlacementEnv env(s.sc, w);
    env.reset(seed);
    out.per_workload.emplace(w.id, extract_placement(env, out.policy));
  }
  return out;
}

bool wssp_valid(const ValidityReport& r) { return r.capacity_violations.empty() && r.gpu_violations.empty(); }

}  // namespace

int main() {
  Drone s;
  const auto& W = s.d.workloads;

  // Heuristic placements.
  std::map<std::string, Placement> wssp, misp;
  auto t_heur = Clock::now();
  for (const Workload& w : W) {
    wssp.emplace(w.id, wssp_place(s.sc, w));
    misp.emplace(w.id, misp_place(s.sc, w));
  }
  const double heur_s = seconds_since(t_heur);

  // Two independently seeded agents at the default budget.
  std::vector<RlRun> rl;
  auto t_rl = Clock::now();
  for (std::uint64_t seed : {1, 2}) rl.push_back(train_rl(s, seed));
  const double rl_s = seconds_since(t_rl) / static_cast<double>(rl.size());

  auto rl_cov = [&](const RlRun& r, const Workload& w) { return coverage(s.sc, r.per_workload.at(w.id).placement, w); };

  // 1. Coverage
  {
    std::string detail;
    bool ok = heur_s < 60.0 && heur_s + rl_s < 15 * 60.0;
    for (const Workload& w : W) {
      double a = coverage(s.sc, wssp.at(w.id), w).coverage_pct();
      double b = coverage(s.sc, misp.at(w.id), w).coverage_pct();
      double c = rl_cov(rl[0], w).coverage_pct();
      ok = ok && a == 100.0 && b == 100.0 && c == 100.0;
      detail += fmt::format("{} wssp {:.1f}% misp {:.1f}% rlsp {:.1f}%; ", w.id, a, b, c);
    }
    detail += fmt::format("heuristics {:.3f}s, rlsp training {:.1f}s", heur_s, rl_s);
    report(1, "coverage", ok, detail);
  }

  // 2. Validity
  {
    bool ok = true;
    std::string detail;
    for (const Workload& w : W) {
      bool a = wssp_valid(validate_placement(s.sc, wssp.at(w.id)));
      bool b = validate_placement(s.sc, misp.at(w.id)).valid();
      bool c = validate_placement(s.sc, rl[0].per_workload.at(w.id).placement).valid();
      ok = ok && a && b && c;
      detail += fmt::format("{} {}/{}/{} ", w.id, a, b, c);
    }
    report(2, "validity", ok, detail + "(wssp capacity+gpu / misp / rlsp)");
  }

  // 3. Exact assignment against enumeration
  {
    std::mt19937_64 rng(2024);
    int checked = 0, agreed = 0;
    while (checked < 50) {
      Scenario sc(toy4_topology(), parse_application(oracle::random_app(rng, 1 + rng() % 6)));
      CostMatrix t = build_tmatrix(sc);
      double want = oracle::cheapest_assignment(sc, t);
      if (std::isinf(want)) continue;
      ++checked;
      double got = deployment_cost(mip_solve(sc, t), t);
      if (std::abs(got - want) <= 1e-9 * std::max(1.0, want)) ++agreed;
    }
    report(3, "mip_solve optimality", agreed == checked, fmt::format("{}/{} instances optimal", agreed, checked));
  }

  // 4. Set cover bound
  {
    std::mt19937_64 rng(77);
    int good = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      std::size_t n = 1 + rng() % 12, k = 1 + rng() % 8;
      std::set<std::size_t> universe;
      for (std::size_t i = 0; i < n; ++i) universe.insert(i);
      std::vector<CandidateSite> c;
      std::vector<std::set<std::size_t>> covers;
      std::vector<double> weights;
      for (std::size_t j = 0; j < k; ++j) {
        std::set<std::size_t> sub;
        for (std::size_t i = 0; i < n; ++i)
          if (rng() % 3 == 0) sub.insert(i);
        if (j == k - 1) sub = universe;
        if (sub.empty()) sub.insert(rng() % n);
        double w = 0.1 + static_cast<double>(rng() % 100) / 10.0;
        c.push_back({fmt::format("S{}", j), sub, w, {}});
        covers.push_back(sub);
        weights.push_back(w);
      }
      auto picks = find_minimal_sites(c, universe);
      std::set<std::size_t> got;
      double total = 0.0;
      for (const auto& p : picks) {
        got.insert(p.covered_bs.begin(), p.covered_bs.end());
        total += p.weight;
      }
      double opt = oracle::best_cover(covers, weights, universe);
      worst = std::max(worst, total / opt);
      if (got == universe && total <= oracle::harmonic(n) * opt + 1e-9) ++good;
    }
    std::vector<CandidateSite> doc{{"A", {1, 2, 3}, 1.5, {}}, {"B", {1, 2}, 0.8, {}}, {"C", {3, 4}, 1.0, {}},
                                   {"D", {4}, 0.3, {}}};
    double greedy = 0.0;
    for (const auto& p : find_minimal_sites(doc, {1, 2, 3, 4})) greedy += p.weight;
    double opt = oracle::best_cover({{1, 2, 3}, {1, 2}, {3, 4}, {4}}, {1.5, 0.8, 1.0, 0.3}, {1, 2, 3, 4});
    bool documented = std::abs(greedy - 2.1) < 1e-12 && std::abs(opt - 1.8) < 1e-12;
    report(4, "set cover bound", good == 50 && documented,
           fmt::format("{}/50 within H(n), worst ratio {:.3f}; documented instance {:.1f} vs {:.1f}", good, worst,
                       greedy, opt));
  }

  // 5. Determinism
  {
    bool ok = true;
    for (const Workload& w : W) {
      std::string first_w = canonical_placement(s.sc, wssp.at(w.id));
      std::string first_m = canonical_placement(s.sc, misp.at(w.id));
      for (int i = 0; i < 10; ++i) {
        ok = ok && canonical_placement(s.sc, wssp_place(s.sc, w)) == first_w;
        ok = ok && canonical_placement(s.sc, misp_place(s.sc, w)) == first_m;
      }
    }
    int rl_ok = 0;
    for (const RlRun& r : rl) {
      bool good = true;
      for (const Workload& w : W) {
        good = good && rl_cov(r, w).coverage_pct() == 100.0 &&
               validate_placement(s.sc, r.per_workload.at(w.id).placement).valid();
      }
      rl_ok += good ? 1 : 0;
    }
    report(5, "determinism", ok && rl_ok == 2,
           fmt::format("wssp/misp 10 runs identical: {}; rlsp seeds meeting 1-2: {}/2", ok, rl_ok));
  }

  // 6. Instance counts
  {
    bool ok = true;
    std::string detail;
    std::size_t last_w = 0, last_m = 0;
    for (const Workload& w : W) {
      std::size_t a = wssp.at(w.id).instance_count(), b = misp.at(w.id).instance_count();
      std::size_t c = rl[0].per_workload.at(w.id).placement.instance_count();
      bool full = rl_cov(rl[0], w).coverage_pct() == 100.0;
      ok = ok && full && c <= a && c <= b && a >= last_w && b >= last_m;
      last_w = a;
      last_m = b;
      detail += fmt::format("{} wssp {} misp {} rlsp {}{}; ", w.id, a, b, c, full ? "" : " (not covering)");
    }
    report(6, "instance counts", ok, detail);
  }

  // 7. Latency model
  {
    std::mt19937_64 rng(7);
    Scenario sc(toy4_topology(), parse_application(oracle::random_app(rng, 6)));
    auto fw = oracle::floyd_warshall(sc.graph());
    int monotone = 0, matched = 0, total = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      Placement p = Placement::empty_for(sc);
      for (std::size_t e = 0; e < sc.site_count(); ++e)
        for (std::size_t m = 0; m < sc.micro_count(); ++m)
          if (rng() % 3 == 0) p.insert(e, m);
      std::size_t e = rng() % sc.site_count(), m = rng() % sc.micro_count();
      while (p.hosts(e, m)) {
        e = rng() % sc.site_count();
        m = rng() % sc.micro_count();
        if (p.instance_count() == sc.site_count() * sc.micro_count()) p = Placement::empty_for(sc);
      }
      Placement q = add_replica(p, e, m);
      bool mono = true;
      for (std::size_t b = 0; b < sc.bs_count(); ++b) {
        mono = mono && chain_latency(sc, q, b, 0) <= chain_latency(sc, p, b, 0);
        double want = 0.0;
        for (std::size_t mm : sc.chain_members(0)) {
          double best = oracle::kInf;
          for (std::size_t ee : p.hosts_of(mm)) best = std::min(best, fw[sc.bs_id(b)][sc.site_id(ee)]);
          want += best;
        }
        Latency got = chain_latency(sc, p, b, 0);
        ++total;
        if (std::isinf(want) ? !got.finite() : (got.finite() && std::abs(got.ms() - want) <= 1e-12)) ++matched;
      }
      monotone += mono ? 1 : 0;
    }
    report(7, "latency monotonicity", monotone == 1000 && matched == total,
           fmt::format("{}/1000 monotone, {}/{} latencies match the oracle", monotone, matched, total));
  }

  // 8. Environment
  {
    std::mt19937_64 script_rng(50);
    std::vector<Action> script;
    for (int i = 0; i < 50; ++i) {
      script.push_back({static_cast<ActionType>(script_rng() % 3), script_rng() % s.sc.micro_count(),
                        script_rng() % s.sc.site_count()});
    }
    auto trace = [&](bool& untouched) {
      PlacementEnv env(s.sc, W[0]);
      env.reset(3);
      std::string out;
      for (const Action& a : script) {
        Placement before = env.placement();
        StepResult r = env.step(a);
        if (r.status != ActionStatus::valid && !(env.placement() == before)) untouched = false;
        out += fmt::format("{:a}|{}|{}|", r.reward, r.done, static_cast<int>(r.status));
        for (int x : r.obs.chains_per_bs) out += fmt::format("{},", x);
        for (int x : r.obs.micro_per_site) out += fmt::format("{},", x);
      }
      return out;
    };
    bool untouched = true;
    bool same = trace(untouched) == trace(untouched);

    PlacementEnv env(s.sc, W[2]);
    std::mt19937_64 rng(9);
    int steps = 0;
    auto t0 = Clock::now();
    for (int ep = 0; ep < 10; ++ep) {
      env.reset(static_cast<std::uint64_t>(ep));
      while (!env.done()) {
        env.step({static_cast<ActionType>(rng() % 3), rng() % s.sc.micro_count(), rng() % s.sc.site_count()});
        ++steps;
      }
    }
    double per_ms = seconds_since(t0) * 1000.0 / steps;
    report(8, "environment", same && untouched && per_ms <= 5.0,
           fmt::format("trace reproducible {}, rejected actions inert {}, {:.4f} ms/step", same, untouched, per_ms));
  }

  // 9. Gradients
  {
    PolicyParameters p = init_policy(2, {2, 3, 2}, {1.0, 1.0}, 3, 11);
    std::mt19937_64 rng(12);
    std::normal_distribution<double> n(0.0, 0.7);
    for (Eigen::Index i = 0; i < p.theta.size(); ++i) p.theta[i] = n(rng);
    RolloutBatch b;
    for (int k = 0; k < 24; ++k) {
      Observation o{{static_cast<int>(rng() % 3)}, {static_cast<int>(rng() % 4)}};
      Action a{static_cast<ActionType>(rng() % 2), rng() % 3, rng() % 2};
      PolicyOutput out = policy_forward(p, o);
      b.obs.push_back(o);
      b.progress.push_back(0.1 * k);
      b.actions.push_back(a);
      b.log_probs.push_back(out.joint_log_prob(a) + 0.3 * n(rng));
      b.rewards.push_back(n(rng));
      b.values.push_back(out.value);
      b.dones.push_back(0);
      b.advantages.push_back(n(rng));
      b.returns.push_back(n(rng));
    }
    std::vector<std::size_t> idx(b.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    AgentConfig cfg;
    cfg.entropy_coef = 0.05;
    Eigen::VectorXd grad, fd(p.theta.size());
    ppo_loss(p, b, idx, cfg, &grad);
    for (Eigen::Index i = 0; i < p.theta.size(); ++i) {
      PolicyParameters a = p, c = p;
      a.theta[i] += 1e-6;
      c.theta[i] -= 1e-6;
      fd[i] = (ppo_loss(a, b, idx, cfg, nullptr).total - ppo_loss(c, b, idx, cfg, nullptr).total) / 2e-6;
    }
    double rel = (grad - fd).norm() / std::max(1e-12, grad.norm() + fd.norm());

    double worst_sum = 0.0;
    for (const Observation& o : b.obs) {
      PolicyOutput out = policy_forward(p, o);
      for (const auto& head : out.probs) {
        double sum = 0.0;
        for (double x : head) sum += x;
        worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
      }
    }

    AgentConfig bare = cfg;
    bare.entropy_coef = 0.0;
    bare.value_coef = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
      double now = policy_forward(p, b.obs[i]).joint_log_prob(b.actions[i]);
      b.advantages[i] = 1.0 + static_cast<double>(i);
      b.log_probs[i] = now - 1.0;
    }
    ppo_loss(p, b, idx, bare, &grad);
    report(9, "gradients", rel < 1e-4 && worst_sum <= 1e-6 && grad.norm() == 0.0,
           fmt::format("finite-difference rel err {:.2e}, head sum err {:.1e}, clipped-branch grad {}", rel,
                       worst_sum, grad.norm()));
  }

  // 10. Convergence
  {
    bool ok = true;
    std::string detail;
    for (const Workload& w : W) {
      const Extraction& ex = rl[0].per_workload.at(w.id);
      double cov = rl_cov(rl[0], w).coverage_pct();
      ok = ok && cov == 100.0 && ex.changes <= 100;
      detail += fmt::format("{} {:.1f}% in {} changes/{} steps; ", w.id, cov, ex.changes, ex.steps);
    }
    report(10, "rlsp convergence", ok, detail);
  }

  // 11. Workload transitions
  {
    TransitionConfig cfg;
    bool ok = true;
    std::string detail;
    for (Algorithm a : {Algorithm::wssp, Algorithm::misp}) {
      TransitionTrace t = transition_run(a, s.sc, W, cfg);
      for (int b : t.boundaries) {
        double dip = t.points[static_cast<std::size_t>(b)].access_pct;
        int end = b + cfg.ticks_per_phase - 1;
        double after = t.points[static_cast<std::size_t>(end)].access_pct;
        ok = ok && dip < 100.0 && after == 100.0;
        detail += fmt::format("{}@{} {:.1f}%->{:.1f}%; ", to_string(a), b, dip, after);
      }
    }
    TransitionConfig rl_cfg = cfg;
    rl_cfg.run.policy = rl[0].policy;
    TransitionTrace t = transition_run(Algorithm::rlsp, s.sc, W, rl_cfg);
    double lowest = 100.0;
    for (const TransitionPoint& p : t.points)
      if (p.tick >= t.boundaries.front()) lowest = std::min(lowest, p.access_pct);
    ok = ok && lowest == 100.0;
    detail += fmt::format("rlsp lowest after first boundary {:.1f}%", lowest);
    report(11, "transitions", ok, detail);
  }

  // 12. Runtime
  {
    std::vector<double> tw, tm;
    for (int i = 0; i < 10; ++i) {
      for (const Workload& w : W) {
        tw.push_back(run_scenario(Algorithm::wssp, s.sc, w, RunConfig{}).report.wall_ms);
        tm.push_back(run_scenario(Algorithm::misp, s.sc, w, RunConfig{}).report.wall_ms);
      }
    }
    auto median = [](std::vector<double> v) {
      std::sort(v.begin(), v.end());
      return v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
    };
    double mw = median(tw), mm = median(tm);
    report(12, "runtime", mw <= mm, fmt::format("median wssp {:.3f} ms, misp {:.3f} ms", mw, mm));
  }

  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
