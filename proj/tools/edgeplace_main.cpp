#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "edgeplace/application.hpp"
#include "edgeplace/error.hpp"
#include "edgeplace/fixtures.hpp"
#include "edgeplace/harness.hpp"
#include "edgeplace/io.hpp"
#include "edgeplace/log.hpp"

namespace fs = std::filesystem;
using namespace edgeplace;

namespace {

enum Exit { kOk = 0, kInfeasible = 1, kInput = 2, kInternal = 3 };

struct Common {
  std::string topology;
  std::string app;
  std::string workload = "W1";
  std::string weights;
  std::uint64_t seed = 1;
  std::string checkpoint;
  int episodes = -1;
  std::string out = "out";
  int jobs = 1;
};

void add_inputs(CLI::App* cmd, Common& c) {
  cmd->add_option("--topology", c.topology, "Topology JSON (default: bundled drone topology)");
  cmd->add_option("--app", c.app, "Application JSON (default: bundled drone application)");
  cmd->add_option("--seed", c.seed, "Seed for every stochastic step");
  cmd->add_option("--jobs", c.jobs, "Worker cap")->check(CLI::PositiveNumber);
}

struct Inputs {
  NetworkGraph graph;
  Application app;
};

Inputs load_inputs(const Common& c) {
  Inputs in;
  in.graph = c.topology.empty() ? drone_topology() : parse_topology(std::string_view(read_file(c.topology)));
  in.app = c.app.empty() ? bundled_drone_scenario().app : parse_application(std::string_view(read_file(c.app)));
  return in;
}

Workload load_workload(const Application& app, const std::string& arg) {
  if (arg == "W1" || arg == "W2" || arg == "W3") return standard_workload(app, arg);
  try {
    return parse_workload(nlohmann::json::parse(read_file(arg)), app);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(fmt::format("workload '{}': {}", arg, e.what()));
  }
}

std::vector<Workload> load_workloads(const Application& app, const std::string& list) {
  std::vector<Workload> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(load_workload(app, item));
  }
  if (out.empty()) throw ParseError("no workloads given");
  return out;
}

RunConfig run_config(const Common& c, const Scenario& sc, const std::vector<Workload>& training) {
  RunConfig cfg;
  if (!c.weights.empty()) cfg.weights = ScoreWeights::parse(c.weights);
  cfg.weights.validate();
  cfg.seed = c.seed;
  if (c.episodes >= 0) cfg.agent.episodes = c.episodes;
  cfg.training_workloads = training;
  if (!c.checkpoint.empty() && fs::exists(c.checkpoint)) {
    cfg.policy = load_checkpoint(c.checkpoint);
    if (cfg.policy->obs_size != sc.bs_count() + sc.site_count() ||
        cfg.policy->heads != std::array<std::size_t, 3>{3, sc.micro_count(), sc.site_count()}) {
      throw ValidationError(fmt::format("checkpoint '{}' does not match the scenario's dimensions", c.checkpoint));
    }
  } else if (!c.checkpoint.empty()) {
    cfg.checkpoint = fs::path(c.checkpoint);
  }
  return cfg;
}

std::string to_text(const auto& writer) {
  std::ostringstream os;
  writer(os);
  return os.str();
}

int cmd_place(const Common& c, const std::string& algo_name, const std::string& prev_path) {
  Algorithm algo = algorithm_from_string(algo_name);
  Inputs in = load_inputs(c);
  Scenario sc(in.graph, in.app);
  Workload w = load_workload(in.app, c.workload);
  RunConfig cfg = run_config(c, sc, {});
  if (!prev_path.empty()) cfg.prev = placement_from_json(sc, nlohmann::json::parse(read_file(prev_path)));

  ScenarioRun r = run_scenario(algo, sc, w, cfg);
  std::string placement = placement_to_json(sc, r.placement).dump(2) + "\n";
  std::string metrics = to_text([&](std::ostream& os) { write_metrics_csv(os, {r.report}); });
  std::string latency = to_text([&](std::ostream& os) { write_latency_csv(os, sc, {r.report}); });

  fs::create_directories(c.out);
  write_file_atomic(fs::path(c.out) / "placement.json", placement);
  write_file_atomic(fs::path(c.out) / "metrics.csv", metrics);
  write_file_atomic(fs::path(c.out) / "latency.csv", latency);
  std::cout << fmt::format("{} {}: {} instances, coverage {:.1f}%, valid {}, hash {}\n", algo_name, w.id,
                           r.report.instances, r.report.coverage_pct, r.report.validity.valid() ? "yes" : "no",
                           r.report.hash);
  return kOk;
}

int cmd_train(const Common& c, const std::string& workloads) {
  if (c.checkpoint.empty()) throw ParseError("train: --checkpoint is required");
  Inputs in = load_inputs(c);
  Scenario sc(in.graph, in.app);
  std::vector<Workload> ws = load_workloads(in.app, workloads);
  AgentConfig agent;
  if (c.episodes >= 0) agent.episodes = c.episodes;
  std::optional<PolicyParameters> initial;
  if (fs::exists(c.checkpoint)) initial = load_checkpoint(c.checkpoint);
  TrainResult r = train(sc, ws, agent, c.seed, {}, initial, fs::path(c.checkpoint));

  std::cout << fmt::format("trained {} steps ({} episodes), recent return {:.2f}\n", r.steps, r.episodes,
                           r.recent_return);
  for (const Workload& w : ws) {
    PlacementEnv env(sc, w);
    env.reset(c.seed);
    Extraction ex = extract_placement(env, r.params);
    std::cout << fmt::format("  {}: greedy placement {} instances, coverage {:.1f}%, {} changes\n", w.id,
                             ex.placement.instance_count(), coverage(sc, ex.placement, w).coverage_pct(), ex.changes);
  }
  return kOk;
}

int cmd_simulate(const Common& c, const std::string& algo_name, const std::string& workloads, int ticks, int delay) {
  Algorithm algo = algorithm_from_string(algo_name);
  Inputs in = load_inputs(c);
  Scenario sc(in.graph, in.app);
  std::vector<Workload> ws = load_workloads(in.app, workloads);
  TransitionConfig tc;
  tc.ticks_per_phase = ticks;
  tc.deployment_delay = delay;
  tc.run = run_config(c, sc, ws);
  TransitionTrace trace = transition_run(algo, sc, ws, tc);
  std::string csv = to_text([&](std::ostream& os) { write_transition_csv(os, trace); });
  fs::create_directories(c.out);
  write_file_atomic(fs::path(c.out) / "transition.csv", csv);
  for (int b : trace.boundaries) {
    double low = 100.0;
    for (int t = b; t < b + ticks && t < static_cast<int>(trace.points.size()); ++t) {
      low = std::min(low, trace.points[static_cast<std::size_t>(t)].access_pct);
    }
    std::cout << fmt::format("boundary at tick {}: lowest access {:.1f}%\n", b, low);
  }
  return kOk;
}

int cmd_bench(const Common& c, const std::string& algo_name, int runs) {
  Inputs in = load_inputs(c);
  Scenario sc(in.graph, in.app);
  Workload w = load_workload(in.app, c.workload);
  std::vector<Algorithm> algos;
  if (algo_name == "all") {
    algos = {Algorithm::wssp, Algorithm::misp};
  } else {
    algos = {algorithm_from_string(algo_name)};
  }
  std::vector<MetricsReport> reports;
  int status = kOk;
  for (Algorithm algo : algos) {
    std::vector<double> times;
    std::vector<std::string> hashes;
    for (int k = 0; k < runs; ++k) {
      RunConfig cfg = run_config(c, sc, {});
      cfg.run = k;
      if (algo == Algorithm::rlsp) cfg.seed = c.seed + static_cast<std::uint64_t>(k);
      ScenarioRun r = run_scenario(algo, sc, w, cfg);
      times.push_back(r.report.wall_ms);
      hashes.push_back(r.report.hash);
      reports.push_back(r.report);
    }
    std::sort(times.begin(), times.end());
    bool identical = std::all_of(hashes.begin(), hashes.end(), [&](const auto& h) { return h == hashes[0]; });
    std::cout << fmt::format("{} {}: median {:.3f} ms over {} runs, placements {}\n", to_string(algo), w.id,
                             times[times.size() / 2], runs, identical ? "identical" : "differ");
    if (!identical && algo != Algorithm::rlsp) status = kInternal;
  }
  std::string csv = to_text([&](std::ostream& os) { write_metrics_csv(os, reports); });
  fs::create_directories(c.out);
  write_file_atomic(fs::path(c.out) / "metrics.csv", csv);
  return status;
}

int cmd_gen(const std::string& out) {
  DroneScenario d = bundled_drone_scenario();
  fs::create_directories(out);
  write_file_atomic(fs::path(out) / "drone_topology.json",
                    topology_to_json(drone_topology()).dump(2) + "\n");
  write_file_atomic(fs::path(out) / "toy4.json", topology_to_json(toy4_topology()).dump(2) + "\n");
  write_file_atomic(fs::path(out) / "drone_app.json", application_to_json(d.app).dump(2) + "\n");
  for (const Workload& w : d.workloads) {
    write_file_atomic(fs::path(out) / (w.id + ".json"), workload_to_json(w).dump(2) + "\n");
  }
  std::cout << "wrote bundled scenario to " << out << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Service placement for mobile edge clouds"};
  cli.require_subcommand(1);
  Common c;
  std::string algo = "wssp";
  std::string prev;
  std::string workloads = "W1,W2,W3";
  int ticks = 100;
  int delay = 5;
  int runs = 10;

  auto* place = cli.add_subcommand("place", "Compute one placement");
  add_inputs(place, c);
  place->add_option("--algo", algo, "wssp, misp or rlsp")->check(CLI::IsMember({"wssp", "misp", "rlsp"}));
  place->add_option("--workload", c.workload, "W1, W2, W3 or a workload JSON file");
  place->add_option("--weights", c.weights, "Score weights a1,a2,a3,a4,a5");
  place->add_option("--prev", prev, "Previous placement JSON (relocation costs)");
  place->add_option("--checkpoint", c.checkpoint, "rlsp policy checkpoint (loaded if present, else written)");
  place->add_option("--episodes", c.episodes, "rlsp training episodes when no checkpoint exists");
  place->add_option("--out", c.out, "Output directory");

  auto* trn = cli.add_subcommand("train", "Train the placement agent");
  add_inputs(trn, c);
  trn->add_option("--workload", workloads, "Comma-separated workloads trained round-robin");
  trn->add_option("--episodes", c.episodes, "Training episodes");
  trn->add_option("--checkpoint", c.checkpoint, "Checkpoint path (resumed from if it exists)")->required();

  auto* sim = cli.add_subcommand("simulate", "Replay workload transitions");
  add_inputs(sim, c);
  sim->add_option("--algo", algo, "wssp, misp or rlsp")->check(CLI::IsMember({"wssp", "misp", "rlsp"}));
  sim->add_option("--workload", workloads, "Comma-separated workload sequence");
  sim->add_option("--weights", c.weights, "Score weights a1,a2,a3,a4,a5");
  sim->add_option("--ticks", ticks, "Ticks per phase")->check(CLI::PositiveNumber);
  sim->add_option("--delay", delay, "Deployment delay in ticks")->check(CLI::NonNegativeNumber);
  sim->add_option("--checkpoint", c.checkpoint, "rlsp policy checkpoint");
  sim->add_option("--episodes", c.episodes, "rlsp training episodes when no checkpoint exists");
  sim->add_option("--out", c.out, "Output directory");

  auto* bench = cli.add_subcommand("bench", "Repeat runs for determinism and timing");
  add_inputs(bench, c);
  bench->add_option("--algo", algo, "wssp, misp, rlsp or all")->check(CLI::IsMember({"wssp", "misp", "rlsp", "all"}));
  bench->add_option("--workload", c.workload, "W1, W2, W3 or a workload JSON file");
  bench->add_option("--weights", c.weights, "Score weights a1,a2,a3,a4,a5");
  bench->add_option("--runs", runs, "Repetitions")->check(CLI::Range(2, 10000));
  bench->add_option("--checkpoint", c.checkpoint, "rlsp policy checkpoint");
  bench->add_option("--episodes", c.episodes, "rlsp training episodes when no checkpoint exists");
  bench->add_option("--out", c.out, "Output directory");

  auto* gen = cli.add_subcommand("gen-scenario", "Write the bundled fixtures as JSON");
  gen->add_option("--out", c.out, "Output directory");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = cli.exit(e);
    return code == 0 ? kOk : kInput;
  }

  try {
    (void)log();
    if (place->parsed()) return cmd_place(c, algo, prev);
    if (trn->parsed()) return cmd_train(c, workloads);
    if (sim->parsed()) return cmd_simulate(c, algo, workloads, ticks, delay);
    if (bench->parsed()) return cmd_bench(c, algo, runs);
    if (gen->parsed()) return cmd_gen(c.out);
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const ReferenceError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const ValidationError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const LookupError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const ArityError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const DomainError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kInternal;
}
