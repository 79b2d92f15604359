#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "edgeplace/costs.hpp"
#include "edgeplace/error.hpp"
#include "edgeplace/placement.hpp"
#include "edgeplace/rlsp_agent.hpp"

namespace edgeplace {

enum class Algorithm { wssp, misp, rlsp };

std::string_view to_string(Algorithm algo);
Algorithm algorithm_from_string(std::string_view text);

struct RunConfig {
  ScoreWeights weights;
  std::uint64_t seed = 1;
  int run = 0;
  /// Previous placement (relocation costs for misp).
  std::optional<Placement> prev;
  AgentConfig agent;
  EnvConfig env;
  /// Pretrained policy for rlsp; when absent one is trained first.
  std::optional<PolicyParameters> policy;
  /// Workloads to train on when no policy is given; empty means the run's own.
  std::vector<Workload> training_workloads;
  std::optional<std::filesystem::path> checkpoint;
};

struct MetricsReport {
  Algorithm algo = Algorithm::wssp;
  std::string workload;
  int run = 0;
  std::uint64_t seed = 0;
  std::size_t instances = 0;
  std::vector<std::size_t> per_site;
  /// Share of all instances hosted per site, in percent.
  std::vector<double> contribution_pct;
  double coverage_pct = 0.0;
  AccessMatrix access;
  double cost = 0.0;
  double wall_ms = 0.0;
  std::string hash;
  ValidityReport validity;
  /// Reference instance count for the drone scenario, for side-by-side logs.
  std::optional<int> reference_instances;
  /// Placement-changing actions of the rlsp extraction.
  std::optional<int> rl_changes;
  std::string error;
};

struct ScenarioRun {
  Placement placement;
  MetricsReport report;
};

/// Thrown by run_scenario when the algorithm finds no placement; carries the
/// report filled as far as it got.
class RunFailure : public InfeasibleError {
 public:
  RunFailure(const std::string& what, MetricsReport report) : InfeasibleError(what), report_(std::move(report)) {}
  [[nodiscard]] const MetricsReport& report() const { return report_; }

 private:
  MetricsReport report_;
};

std::optional<int> reference_instance_count(Algorithm algo, std::string_view workload);

MetricsReport evaluate(Algorithm algo, const Scenario& sc, const Workload& workload, const Placement& p,
                       const RunConfig& config, double wall_ms);

ScenarioRun run_scenario(Algorithm algo, const Scenario& sc, const Workload& workload, const RunConfig& config);

struct TransitionPoint {
  int tick = 0;
  std::string workload;
  double access_pct = 0.0;
  std::size_t instances = 0;
};

struct TransitionTrace {
  Algorithm algo = Algorithm::wssp;
  std::vector<TransitionPoint> points;
  /// First tick of every phase after the first.
  std::vector<int> boundaries;
};

struct TransitionConfig {
  int ticks_per_phase = 100;
  /// Ticks during which newly placed instances are not yet serving.
  int deployment_delay = 5;
  RunConfig run;
};

/// Replays a workload sequence. At each phase start the algorithm is re-run
/// (misp with the current placement as prior); until the deployment delay
/// passes only instances present both before and after are available. rlsp
/// builds its first placement one greedy action per tick and re-extracts at
/// later boundaries.
TransitionTrace transition_run(Algorithm algo, const Scenario& sc, const std::vector<Workload>& workloads,
                               const TransitionConfig& config);

struct DeterminismReport {
  Algorithm algo = Algorithm::wssp;
  std::vector<std::string> hashes;
  std::vector<double> coverage;
  std::vector<bool> valid;
  bool identical = false;
  /// wssp/misp: identical hashes. rlsp: every run valid with full coverage.
  bool passed = false;
};

/// Runs the algorithm once per config; wssp/misp configs are usually copies.
DeterminismReport determinism_check(Algorithm algo, const Scenario& sc, const Workload& workload,
                                    const std::vector<RunConfig>& runs);

/// `algo,workload,run,seed,instances,coverage_pct,cost,wall_ms,hash`
void write_metrics_csv(std::ostream& out, const std::vector<MetricsReport>& reports);
/// `tick,workload,access_pct,instances`
void write_transition_csv(std::ostream& out, const TransitionTrace& trace);
/// `algo,workload,bs,chain,latency_ms,limit_ms,accessible`
void write_latency_csv(std::ostream& out, const Scenario& sc, const std::vector<MetricsReport>& reports);
/// `bs,chain,latency_ms,accessible`
void write_access_csv(std::ostream& out, const Scenario& sc, const AccessMatrix& access);

}  // namespace edgeplace
