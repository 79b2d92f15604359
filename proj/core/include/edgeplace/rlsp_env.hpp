#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "edgeplace/costs.hpp"
#include "edgeplace/placement.hpp"

namespace edgeplace {

enum class ActionType : int { deploy = 0, evict = 1, hold = 2 };

std::string_view to_string(ActionType type);

struct Action {
  ActionType type = ActionType::hold;
  std::size_t micro = 0;
  std::size_t site = 0;
  friend bool operator==(const Action&, const Action&) = default;
};

enum class ActionStatus { valid, invalid, forbidden };

std::string_view to_string(ActionStatus status);

/// Accessible chains per base station followed by instances per site.
struct Observation {
  std::vector<int> chains_per_bs;
  std::vector<int> micro_per_site;

  [[nodiscard]] std::size_t size() const { return chains_per_bs.size() + micro_per_site.size(); }
  friend bool operator==(const Observation&, const Observation&) = default;
};

struct RewardConfig {
  double valid_bonus = 1.0;
  double invalid_penalty = -1.0;
  double constraint_penalty = -10.0;
  double per_access_bonus = 5.0;
  double cost_scale = 1.0;

  /// Throws ValidationError on a non-positive bonus or non-negative penalty.
  void validate() const;
};

struct EnvConfig {
  RewardConfig reward;
  int max_steps = 200;
};

struct StepResult {
  Observation obs;
  double reward = 0.0;
  bool done = false;
  ActionStatus status = ActionStatus::valid;
};

/// Episodic placement environment. Deploying or evicting a microservice that
/// has a collocation partner acts on both together.
///
/// Holds a reference to the scenario, which must outlive the environment.
class PlacementEnv {
 public:
  PlacementEnv(const Scenario& sc, const Workload& workload, EnvConfig config = {});

  Observation reset(std::uint64_t seed);
  /// Applies the action to the placement without advancing the episode.
  std::pair<ActionStatus, double> take_action(const Action& a);
  StepResult step(const Action& a);
  [[nodiscard]] Observation next_observation() const;

  [[nodiscard]] const Scenario& scenario() const { return *sc_; }
  [[nodiscard]] const Placement& placement() const { return placement_; }
  [[nodiscard]] const AccessMatrix& access() const { return access_; }
  [[nodiscard]] const std::vector<double>& limits() const { return limits_; }
  [[nodiscard]] const EnvConfig& config() const { return config_; }
  [[nodiscard]] int counter() const { return counter_; }
  [[nodiscard]] bool done() const { return counter_ >= config_.max_steps; }
  [[nodiscard]] double reward_accum() const { return reward_accum_; }
  [[nodiscard]] std::uint64_t seed() const { return seed_; }

  /// Deployment plus communication cost of the current placement, divided by
  /// the cost of hosting every allowed (microservice, site) cell with every
  /// pair as far apart as possible.
  [[nodiscard]] double normalized_cost() const;

  /// Replaces the workload; the placement is kept and access recomputed.
  void set_workload(const Workload& workload);

  [[nodiscard]] std::size_t observation_size() const { return sc_->bs_count() + sc_->site_count(); }

 private:
  void refresh_access();

  const Scenario* sc_;
  EnvConfig config_;
  std::vector<double> limits_;
  CostMatrix tau_;
  double max_cost_ = 0.0;

  Placement placement_;
  AccessMatrix access_;
  int counter_ = 0;
  double reward_accum_ = 0.0;
  std::uint64_t seed_ = 0;
};

struct TrajectoryRow {
  int step = 0;
  Action action;
  ActionStatus status = ActionStatus::valid;
  double reward = 0.0;
  std::size_t accessible = 0;
  std::size_t deployed = 0;
};

/// CSV with header `step,act_type,micro,site,status,reward,accessible,deployed`.
void write_trajectory_csv(std::ostream& out, const Scenario& sc, const std::vector<TrajectoryRow>& rows);

}  // namespace edgeplace
