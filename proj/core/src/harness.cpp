#include "edgeplace/harness.hpp"

#include <algorithm>
#include <chrono>
#include <ostream>

#include <fmt/format.h>

#include "edgeplace/error.hpp"
#include "edgeplace/log.hpp"
#include "edgeplace/misp.hpp"
#include "edgeplace/wssp.hpp"

namespace edgeplace {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

Placement intersect(const Placement& a, const Placement& b) {
  Placement out(a.site_count(), a.micro_count());
  for (std::size_t e = 0; e < a.site_count(); ++e) {
    for (std::size_t m = 0; m < a.micro_count(); ++m) {
      if (a.hosts(e, m) && b.hosts(e, m)) out.insert(e, m);
    }
  }
  return out;
}

PolicyParameters policy_for(const Scenario& sc, const Workload& workload, const RunConfig& config) {
  if (config.policy) return *config.policy;
  std::vector<Workload> training = config.training_workloads;
  if (training.empty()) training.push_back(workload);
  return train(sc, training, config.agent, config.seed, config.env, std::nullopt, config.checkpoint).params;
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string_view to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::wssp: return "wssp";
    case Algorithm::misp: return "misp";
    case Algorithm::rlsp: return "rlsp";
  }
  return "?";
}

Algorithm algorithm_from_string(std::string_view text) {
  if (text == "wssp") return Algorithm::wssp;
  if (text == "misp") return Algorithm::misp;
  if (text == "rlsp") return Algorithm::rlsp;
  throw ParseError(fmt::format("unknown algorithm '{}' (expected wssp, misp or rlsp)", text));
}

std::optional<int> reference_instance_count(Algorithm algo, std::string_view workload) {
  int k = workload == "W1" ? 0 : workload == "W2" ? 1 : workload == "W3" ? 2 : -1;
  if (k < 0) return std::nullopt;
  switch (algo) {
    case Algorithm::wssp: return 34 + 4 * k;
    case Algorithm::misp: return 36 + 4 * k;
    case Algorithm::rlsp: return 23;
  }
  return std::nullopt;
}

MetricsReport evaluate(Algorithm algo, const Scenario& sc, const Workload& workload, const Placement& p,
                       const RunConfig& config, double wall_ms) {
  MetricsReport r;
  r.algo = algo;
  r.workload = workload.id;
  r.run = config.run;
  r.seed = config.seed;
  r.instances = p.instance_count();
  for (std::size_t e = 0; e < sc.site_count(); ++e) {
    r.per_site.push_back(p.count_at(e));
    r.contribution_pct.push_back(r.instances == 0 ? 0.0
                                                  : 100.0 * static_cast<double>(p.count_at(e)) /
                                                        static_cast<double>(r.instances));
  }
  r.access = coverage(sc, p, workload);
  r.coverage_pct = r.access.coverage_pct();
  r.cost = placement_cost(sc, p, build_tmatrix(sc, config.prev));
  r.wall_ms = wall_ms;
  r.hash = placement_hash(sc, p);
  r.validity = validate_placement(sc, p);
  r.reference_instances = reference_instance_count(algo, workload.id);
  return r;
}

ScenarioRun run_scenario(Algorithm algo, const Scenario& sc, const Workload& workload, const RunConfig& config) {
  auto start = Clock::now();
  std::optional<int> changes;
  Placement p = Placement::empty_for(sc);
  try {
    switch (algo) {
      case Algorithm::wssp: p = wssp_place(sc, workload, config.weights); break;
      case Algorithm::misp: p = misp_place(sc, workload, config.prev); break;
      case Algorithm::rlsp: {
        if (sc.micro_count() == 0 || sc.site_count() == 0) break;
        PolicyParameters policy = policy_for(sc, workload, config);
        PlacementEnv env(sc, workload, config.env);
        env.reset(config.seed);
        Extraction ex = extract_placement(env, policy);
        p = ex.placement;
        changes = ex.changes;
        break;
      }
    }
  } catch (const InfeasibleError& e) {
    MetricsReport partial = evaluate(algo, sc, workload, Placement::empty_for(sc), config, elapsed_ms(start));
    partial.error = e.what();
    throw RunFailure(e.what(), std::move(partial));
  }
  double wall = elapsed_ms(start);
  MetricsReport report = evaluate(algo, sc, workload, p, config, wall);
  report.rl_changes = changes;
  log().info("{} {}: {} instances, coverage {:.1f}%, {:.3f} ms", to_string(algo), workload.id, report.instances,
             report.coverage_pct, wall);
  return {std::move(p), std::move(report)};
}

TransitionTrace transition_run(Algorithm algo, const Scenario& sc, const std::vector<Workload>& workloads,
                               const TransitionConfig& config) {
  if (workloads.empty()) throw ContractError("transition_run: no workloads");
  if (config.ticks_per_phase < 1 || config.deployment_delay < 0) {
    throw ValidationError("transition_run: ticks_per_phase must be >= 1 and deployment_delay >= 0");
  }
  TransitionTrace trace;
  trace.algo = algo;
  std::optional<PolicyParameters> policy;
  if (algo == Algorithm::rlsp) policy = policy_for(sc, workloads.back(), config.run);

  Placement current = Placement::empty_for(sc);
  int tick = 0;
  for (std::size_t phase = 0; phase < workloads.size(); ++phase) {
    const Workload& w = workloads[phase];
    if (phase > 0) trace.boundaries.push_back(tick);
    auto emit = [&](const Placement& available) {
      trace.points.push_back({tick++, w.id, coverage(sc, available, w).coverage_pct(), available.instance_count()});
    };

    if (algo == Algorithm::rlsp && phase == 0) {
      // The first placement appears one greedy action per tick.
      PlacementEnv env(sc, w, config.run.env);
      env.reset(config.run.seed);
      Extraction ex = extract_placement(env, *policy);
      PlacementEnv replay(sc, w, config.run.env);
      replay.reset(config.run.seed);
      for (int t = 0; t < config.ticks_per_phase; ++t) {
        if (static_cast<std::size_t>(t) < ex.trajectory.size()) replay.step(ex.trajectory[static_cast<std::size_t>(t)].action);
        emit(replay.placement());
      }
      current = ex.placement;
      continue;
    }

    Placement next = current;
    switch (algo) {
      case Algorithm::wssp: next = wssp_place(sc, w, config.run.weights); break;
      case Algorithm::misp:
        next = misp_place(sc, w, phase == 0 ? config.run.prev : std::optional<Placement>(current));
        break;
      case Algorithm::rlsp: {
        PlacementEnv env(sc, w, config.run.env);
        env.reset(config.run.seed);
        next = extract_placement(env, *policy).placement;
        break;
      }
    }
    Placement carried = intersect(current, next);
    for (int t = 0; t < config.ticks_per_phase; ++t) emit(t < config.deployment_delay ? carried : next);
    current = std::move(next);
  }
  return trace;
}

DeterminismReport determinism_check(Algorithm algo, const Scenario& sc, const Workload& workload,
                                    const std::vector<RunConfig>& runs) {
  if (runs.size() < 2) throw ContractError("determinism_check: needs at least two runs");
  DeterminismReport out;
  out.algo = algo;
  for (const RunConfig& cfg : runs) {
    ScenarioRun r = run_scenario(algo, sc, workload, cfg);
    out.hashes.push_back(r.report.hash);
    out.coverage.push_back(r.report.coverage_pct);
    out.valid.push_back(r.report.validity.valid());
  }
  out.identical = std::all_of(out.hashes.begin(), out.hashes.end(), [&](const auto& h) { return h == out.hashes[0]; });
  if (algo == Algorithm::rlsp) {
    out.passed = true;
    for (std::size_t i = 0; i < runs.size(); ++i) out.passed = out.passed && out.valid[i] && out.coverage[i] == 100.0;
  } else {
    out.passed = out.identical;
  }
  return out;
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricsReport>& reports) {
  out << "algo,workload,run,seed,instances,coverage_pct,cost,wall_ms,hash\n";
  for (const MetricsReport& r : reports) {
    out << fmt::format("{},{},{},{},{},{:.4f},{:.6f},{:.4f},{}\n", to_string(r.algo), csv_field(r.workload), r.run,
                       r.seed, r.instances, r.coverage_pct, r.cost, r.wall_ms, r.hash);
  }
}

void write_transition_csv(std::ostream& out, const TransitionTrace& trace) {
  out << "tick,workload,access_pct,instances\n";
  for (const TransitionPoint& p : trace.points) {
    out << fmt::format("{},{},{:.4f},{}\n", p.tick, csv_field(p.workload), p.access_pct, p.instances);
  }
}

void write_latency_csv(std::ostream& out, const Scenario& sc, const std::vector<MetricsReport>& reports) {
  out << "algo,workload,bs,chain,latency_ms,limit_ms,accessible\n";
  for (const MetricsReport& r : reports) {
    for (std::size_t b = 0; b < r.access.bs_count(); ++b) {
      for (std::size_t c = 0; c < r.access.chain_count(); ++c) {
        Latency l = r.access.latency(b, c);
        out << fmt::format("{},{},{},{},{},{},{}\n", to_string(r.algo), csv_field(r.workload), sc.bs_id(b),
                           csv_field(sc.chain(c).id), l.finite() ? fmt::format("{:.6f}", l.ms()) : "inf",
                           r.access.limit_ms(b, c), r.access.accessible(b, c) ? 1 : 0);
      }
    }
  }
}

void write_access_csv(std::ostream& out, const Scenario& sc, const AccessMatrix& access) {
  out << "bs,chain,latency_ms,accessible\n";
  for (std::size_t b = 0; b < access.bs_count(); ++b) {
    for (std::size_t c = 0; c < access.chain_count(); ++c) {
      Latency l = access.latency(b, c);
      out << fmt::format("{},{},{},{}\n", sc.bs_id(b), csv_field(sc.chain(c).id),
                         l.finite() ? fmt::format("{:.6f}", l.ms()) : "inf", access.accessible(b, c) ? 1 : 0);
    }
  }
}

}  // namespace edgeplace
