#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "edgeplace/rlsp_env.hpp"

namespace edgeplace {

struct AgentConfig {
  double clip_eps = 0.2;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double learning_rate = 3e-4;
  int epochs = 4;
  int minibatch = 64;
  int horizon = 2048;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  double max_grad_norm = 0.5;
  int hidden = 64;
  /// Training budget in episodes of `EnvConfig::max_steps` steps.
  int episodes = 1500;

  void validate() const;
};

nlohmann::json agent_config_to_json(const AgentConfig& config);
AgentConfig agent_config_from_json(const nlohmann::json& document);

/// Two tanh MLPs: a policy trunk from the observation to the concatenated
/// logits of the three heads, and a value trunk ending in one scalar. The
/// value trunk also sees the episode progress (counter / max_steps), since
/// the reward scales with it and the observation does not carry it. All
/// weights live in one flat vector.
struct PolicyParameters {
  std::size_t obs_size = 0;
  std::array<std::size_t, 3> heads{};
  std::size_t hidden = 0;
  /// Inputs are divided elementwise by this before the first layer.
  std::vector<double> obs_scale;
  Eigen::VectorXd theta;

  [[nodiscard]] std::size_t logits_size() const { return heads[0] + heads[1] + heads[2]; }
  [[nodiscard]] std::size_t policy_size() const;
  [[nodiscard]] std::size_t value_size() const;
};

/// Hidden layers get Xavier-uniform weights, the policy output layer starts at
/// zero (uniform heads), biases at zero.
PolicyParameters init_policy(std::size_t obs_size, std::array<std::size_t, 3> heads, std::vector<double> obs_scale,
                             std::size_t hidden, std::uint64_t seed);
/// Heads (3, |S|, |E|); inputs scaled by |C| and |S|.
PolicyParameters init_policy(const Scenario& sc, std::size_t hidden, std::uint64_t seed);

struct PolicyOutput {
  std::array<std::vector<double>, 3> probs;
  std::array<std::vector<double>, 3> log_probs;
  double value = 0.0;

  /// Sum of the three heads' log-probabilities.
  [[nodiscard]] double joint_log_prob(const Action& a) const;
};

/// `progress` only feeds the value estimate; the heads depend on `obs` alone.
PolicyOutput policy_forward(const PolicyParameters& params, const Observation& obs, double progress = 0.0);

struct RolloutBatch {
  std::vector<Observation> obs;
  /// Episode progress at each observation; missing entries count as 0.
  std::vector<double> progress;
  std::vector<Action> actions;
  std::vector<double> log_probs;
  std::vector<double> rewards;  // already scaled
  std::vector<double> values;
  std::vector<std::uint8_t> dones;
  std::vector<double> advantages;
  std::vector<double> returns;

  [[nodiscard]] std::size_t size() const { return obs.size(); }
};

/// Steps one or more environments with the current policy. Episodes rotate
/// through the environments in order, so a list of workloads is trained as
/// a round-robin mixture.
class RolloutCollector {
 public:
  RolloutCollector(std::vector<PlacementEnv> envs, const AgentConfig& config, std::uint64_t seed,
                   double reward_scale);

  RolloutBatch collect(const PolicyParameters& params, std::size_t horizon);
  [[nodiscard]] long episodes_finished() const { return episodes_; }
  [[nodiscard]] const std::vector<double>& episode_returns() const { return returns_; }

 private:
  PlacementEnv& env() { return envs_[current_]; }

  std::vector<PlacementEnv> envs_;
  AgentConfig config_;
  std::mt19937_64 rng_;
  double reward_scale_;
  std::size_t current_ = 0;
  long episodes_ = 0;
  double running_return_ = 0.0;
  std::vector<double> returns_;
  Observation obs_;
};

/// Reward scale used during training: 1 / (per_access_bonus x |B| x |C|).
double default_reward_scale(const Scenario& sc, const RewardConfig& reward);

/// Single-batch rollout from a fresh copy of `env`, sampling with `seed`.
RolloutBatch collect_rollout(const PlacementEnv& env, const PolicyParameters& params, std::size_t horizon,
                             std::uint64_t seed, const AgentConfig& config = {}, double reward_scale = 1.0);

/// Generalized advantage estimation over a batch whose values are set;
/// `last_value` bootstraps the step after the end.
void compute_gae(RolloutBatch& batch, double last_value, double gamma, double lambda);

struct LossTerms {
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double total = 0.0;
  double clip_fraction = 0.0;
};

/// Clipped-surrogate loss over samples `index` of the batch, using the
/// batch's advantages as given. Writes d(total)/d(theta) to `grad` when set.
LossTerms ppo_loss(const PolicyParameters& params, const RolloutBatch& batch, const std::vector<std::size_t>& index,
                   const AgentConfig& config, Eigen::VectorXd* grad);

class AdamOptimizer {
 public:
  AdamOptimizer(std::size_t size, double learning_rate);
  void step(Eigen::VectorXd& theta, const Eigen::VectorXd& grad);

 private:
  double lr_;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-5;
  long t_ = 0;
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
};

/// Epochs of shuffled minibatch updates, advantages normalized per minibatch,
/// gradients clipped to `max_grad_norm`. Throws DivergenceError on a
/// non-finite loss or gradient; `params` then still holds the last finite
/// state.
LossTerms ppo_update(PolicyParameters& params, const RolloutBatch& batch, const AgentConfig& config,
                     AdamOptimizer& optimizer, std::mt19937_64& rng);
/// Convenience form with a fresh optimizer.
PolicyParameters ppo_update(const PolicyParameters& params, const RolloutBatch& batch, const AgentConfig& config,
                            std::uint64_t seed);

struct TrainResult {
  PolicyParameters params;
  long steps = 0;
  long episodes = 0;
  /// Mean unscaled return of the last ten finished episodes.
  double recent_return = 0.0;
};

/// Alternates rollouts and updates until `config.episodes` episodes worth of
/// steps are spent. Starts from `initial` when given. Writes the final
/// parameters to `checkpoint` when set (and the last finite ones on
/// divergence, before rethrowing).
TrainResult train(const Scenario& sc, const std::vector<Workload>& workloads, const AgentConfig& config,
                  std::uint64_t seed, const EnvConfig& env_config = {},
                  const std::optional<PolicyParameters>& initial = std::nullopt,
                  const std::optional<std::filesystem::path>& checkpoint = std::nullopt);

struct Extraction {
  Placement placement;
  int steps = 0;
  /// Actions that changed the placement.
  int changes = 0;
  /// Coverage percentage after each step.
  std::vector<double> coverage_trace;
  std::vector<TrajectoryRow> trajectory;
};

/// Greedy rollout (argmax per head) from a reset until the episode ends or
/// the placement has not changed for `window` steps.
Extraction extract_placement(PlacementEnv& env, const PolicyParameters& params, int window = 20);

nlohmann::json checkpoint_to_json(const PolicyParameters& params, const AgentConfig& config, std::uint64_t seed);
PolicyParameters checkpoint_from_json(const nlohmann::json& document);
void save_checkpoint(const std::filesystem::path& path, const PolicyParameters& params, const AgentConfig& config,
                     std::uint64_t seed);
PolicyParameters load_checkpoint(const std::filesystem::path& path);

}  // namespace edgeplace
