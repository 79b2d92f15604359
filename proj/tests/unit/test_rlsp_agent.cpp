#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include <nlohmann/json.hpp>

#include "edgeplace/error.hpp"
#include "edgeplace/fixtures.hpp"
#include "edgeplace/rlsp_agent.hpp"

using namespace edgeplace;

namespace {

struct Drone {
  DroneScenario d = bundled_drone_scenario();
  Scenario sc{drone_topology(), d.app};
};

Scenario tiny() {
  return Scenario(toy4_topology(), parse_application(nlohmann::json::parse(R"({
    "microservices": [{"id": "a", "demand": {"cpu": 1, "mem_gb": 1, "storage_gb": 1}},
                      {"id": "b", "demand": {"cpu": 1, "mem_gb": 1, "storage_gb": 1}}],
    "chains": [{"id": "C", "services": ["a", "b"], "latency_limit_ms": 0.5}]})")));
}

PolicyParameters randomized(PolicyParameters p, std::uint64_t seed, double scale = 0.5) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, scale);
  for (Eigen::Index i = 0; i < p.theta.size(); ++i) p.theta[i] = n(rng);
  return p;
}

// Batch of random observations and actions with old log-probs near the
// current ones, so both clipping branches are exercised.
RolloutBatch synthetic_batch(const PolicyParameters& p, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.3);
  RolloutBatch b;
  const std::size_t half = p.obs_size / 2;
  for (std::size_t k = 0; k < n; ++k) {
    Observation o;
    for (std::size_t i = 0; i < half; ++i) o.chains_per_bs.push_back(static_cast<int>(rng() % 3));
    for (std::size_t i = half; i < p.obs_size; ++i) o.micro_per_site.push_back(static_cast<int>(rng() % 4));
    Action a{static_cast<ActionType>(rng() % p.heads[0]), rng() % p.heads[1], rng() % p.heads[2]};
    PolicyOutput out = policy_forward(p, o, 0.1 * static_cast<double>(k % 10));
    b.obs.push_back(o);
    b.progress.push_back(0.1 * static_cast<double>(k % 10));
    b.actions.push_back(a);
    b.log_probs.push_back(out.joint_log_prob(a) + noise(rng));
    b.rewards.push_back(noise(rng));
    b.values.push_back(out.value);
    b.dones.push_back(0);
    b.advantages.push_back(noise(rng) * 3.0);
    b.returns.push_back(noise(rng));
  }
  return b;
}

std::vector<std::size_t> all_of(const RolloutBatch& b) {
  std::vector<std::size_t> idx(b.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return idx;
}

}  // namespace

TEST_CASE("initial heads are uniform and normalized") {
  Drone s;
  PolicyParameters p = init_policy(s.sc, 64, 1);
  CHECK(p.heads == std::array<std::size_t, 3>{3, 23, 4});
  PlacementEnv env(s.sc, s.d.workloads[0]);
  PolicyOutput out = policy_forward(p, env.reset(0));
  for (const auto& head : out.probs) {
    double sum = 0.0;
    for (double x : head) {
      sum += x;
      CHECK(std::abs(x * static_cast<double>(head.size()) - 1.0) <= 0.1);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  }
  CHECK(std::isfinite(out.value));
}

TEST_CASE("trained-looking parameters still give normalized heads") {
  Drone s;
  PolicyParameters p = randomized(init_policy(s.sc, 16, 2), 3, 2.0);
  PlacementEnv env(s.sc, s.d.workloads[1]);
  std::mt19937_64 rng(4);
  Observation obs = env.reset(0);
  for (int i = 0; i < 50; ++i) {
    PolicyOutput out = policy_forward(p, obs);
    for (const auto& head : out.probs) {
      double sum = 0.0;
      for (double x : head) sum += x;
      CHECK(std::abs(sum - 1.0) <= 1e-6);
    }
    PolicyOutput again = policy_forward(p, obs);
    CHECK(again.probs == out.probs);
    CHECK(again.value == out.value);
    obs = env.step({ActionType::deploy, rng() % s.sc.micro_count(), rng() % s.sc.site_count()}).obs;
  }
}

TEST_CASE("joint log-probability factorizes") {
  Scenario sc = tiny();
  PolicyParameters p = randomized(init_policy(sc, 8, 5), 6);
  PlacementEnv env(sc, workload_from_application(sc.app()));
  PolicyOutput out = policy_forward(p, env.reset(0));
  double total = 0.0;
  for (int t = 0; t < 3; ++t) {
    for (std::size_t m = 0; m < sc.micro_count(); ++m) {
      for (std::size_t e = 0; e < sc.site_count(); ++e) {
        Action a{static_cast<ActionType>(t), m, e};
        double joint = std::exp(out.joint_log_prob(a));
        CHECK(joint == doctest::Approx(out.probs[0][t] * out.probs[1][m] * out.probs[2][e]).epsilon(1e-12));
        total += joint;
      }
    }
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("horizon-one rollout is the advantage base case") {
  Scenario sc = tiny();
  PolicyParameters p = randomized(init_policy(sc, 8, 7), 8, 0.3);
  PlacementEnv env(sc, workload_from_application(sc.app()));
  AgentConfig cfg;
  RolloutBatch b = collect_rollout(env, p, 1, 9, cfg);
  REQUIRE(b.size() == 1);

  PlacementEnv replay = env;
  replay.reset(9);
  StepResult r = replay.step(b.actions[0]);
  double v_next = policy_forward(p, r.obs, 1.0 / replay.config().max_steps).value;
  double want = b.rewards[0] + cfg.gamma * v_next - b.values[0];
  CHECK(b.rewards[0] == r.reward);
  CHECK(b.advantages[0] == doctest::Approx(want).epsilon(1e-12));
  CHECK(b.returns[0] == doctest::Approx(want + b.values[0]).epsilon(1e-12));

  RolloutBatch again = collect_rollout(env, p, 64, 9, cfg);
  RolloutBatch twice = collect_rollout(env, p, 64, 9, cfg);
  CHECK(again.actions == twice.actions);
  CHECK(again.advantages == twice.advantages);
}

TEST_CASE("zero rewards and a zero value head give zero returns") {
  RolloutBatch b;
  b.rewards.assign(5, 0.0);
  b.values.assign(5, 0.0);
  b.dones = {0, 0, 1, 0, 0};
  b.obs.resize(5);
  compute_gae(b, 0.0, 0.99, 0.95);
  for (double x : b.returns) CHECK(x == 0.0);
  for (double x : b.advantages) CHECK(x == 0.0);
}

TEST_CASE("zero advantages leave only the value and entropy terms") {
  Scenario sc = tiny();
  PolicyParameters p = randomized(init_policy(sc, 8, 10), 11);
  RolloutBatch b = synthetic_batch(p, 32, 12);
  for (double& a : b.advantages) a = 0.0;
  AgentConfig cfg;
  cfg.entropy_coef = 0.0;
  cfg.value_coef = 0.0;
  Eigen::VectorXd grad;
  LossTerms l = ppo_loss(p, b, all_of(b), cfg, &grad);
  CHECK(l.policy == 0.0);
  CHECK(grad.norm() == 0.0);
}

TEST_CASE("clipped samples contribute no policy gradient") {
  Scenario sc = tiny();
  PolicyParameters p = randomized(init_policy(sc, 8, 13), 14);
  RolloutBatch b = synthetic_batch(p, 32, 15);
  AgentConfig cfg;
  cfg.entropy_coef = 0.0;
  cfg.value_coef = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    double now = policy_forward(p, b.obs[i]).joint_log_prob(b.actions[i]);
    // Positive advantage with r = e, or negative advantage with r = 1/e.
    b.advantages[i] = i % 2 ? 1.0 + static_cast<double>(i) : -1.0 - static_cast<double>(i);
    b.log_probs[i] = i % 2 ? now - 1.0 : now + 1.0;
  }
  Eigen::VectorXd grad;
  LossTerms l = ppo_loss(p, b, all_of(b), cfg, &grad);
  CHECK(grad.norm() == 0.0);
  CHECK(l.clip_fraction == 1.0);
}

TEST_CASE("analytic gradient matches central differences") {
  // obs 2, hidden 3, heads (2, 3, 2)
  PolicyParameters p = randomized(init_policy(2, {2, 3, 2}, {1.0, 1.0}, 3, 16), 17, 0.7);
  RolloutBatch b = synthetic_batch(p, 24, 18);
  AgentConfig cfg;
  cfg.entropy_coef = 0.05;
  Eigen::VectorXd grad;
  ppo_loss(p, b, all_of(b), cfg, &grad);

  Eigen::VectorXd fd(p.theta.size());
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < p.theta.size(); ++i) {
    PolicyParameters plus = p, minus = p;
    plus.theta[i] += h;
    minus.theta[i] -= h;
    fd[i] = (ppo_loss(plus, b, all_of(b), cfg, nullptr).total - ppo_loss(minus, b, all_of(b), cfg, nullptr).total) /
            (2.0 * h);
  }
  double rel = (grad - fd).norm() / std::max(1e-12, grad.norm() + fd.norm());
  CHECK(rel < 1e-4);
}

TEST_CASE("ppo_update moves the parameters and rejects empty batches") {
  Scenario sc = tiny();
  PolicyParameters p = randomized(init_policy(sc, 8, 19), 20, 0.3);
  RolloutBatch b = synthetic_batch(p, 64, 21);
  AgentConfig cfg;
  PolicyParameters q = ppo_update(p, b, cfg, 1);
  CHECK((q.theta - p.theta).norm() > 0.0);
  CHECK(ppo_update(p, b, cfg, 1).theta == q.theta);
  CHECK_THROWS_AS((void)ppo_update(p, RolloutBatch{}, cfg, 1), ContractError);
}

TEST_CASE("training budget and determinism") {
  Drone s;
  AgentConfig cfg;
  cfg.horizon = 128;
  cfg.episodes = 0;
  TrainResult zero = train(s.sc, s.d.workloads, cfg, 42);
  CHECK(zero.params.theta == init_policy(s.sc, 64, 42).theta);
  CHECK(zero.steps == 0);

  cfg.episodes = 3;
  auto dir = std::filesystem::temp_directory_path() / "edgeplace_agent_test";
  std::filesystem::create_directories(dir);
  TrainResult a = train(s.sc, s.d.workloads, cfg, 42, {}, std::nullopt, dir / "a.json");
  TrainResult b = train(s.sc, s.d.workloads, cfg, 42, {}, std::nullopt, dir / "b.json");
  CHECK(a.steps == 600);
  CHECK(a.params.theta == b.params.theta);
  CHECK(checkpoint_to_json(a.params, cfg, 42).dump() == checkpoint_to_json(b.params, cfg, 42).dump());

  PolicyParameters loaded = load_checkpoint(dir / "a.json");
  CHECK(loaded.theta == a.params.theta);
  CHECK(loaded.heads == a.params.heads);
  CHECK(loaded.obs_scale == a.params.obs_scale);
  std::filesystem::remove_all(dir);
}

TEST_CASE("checkpoint format errors") {
  CHECK_THROWS_AS((void)checkpoint_from_json(nlohmann::json{{"format", "other"}}), ParseError);
  Scenario sc = tiny();
  auto j = checkpoint_to_json(init_policy(sc, 4, 1), AgentConfig{}, 1);
  j["version"] = 1;
  CHECK_THROWS_AS((void)checkpoint_from_json(j), ParseError);
  CHECK_THROWS((void)load_checkpoint("/nonexistent/edgeplace.json"));
}

TEST_CASE("extraction stops once the placement is stationary") {
  Drone s;
  PolicyParameters p = init_policy(s.sc, 8, 1);
  // Bias the type head towards hold: nothing is ever deployed.
  const std::size_t b3 = p.policy_size() - p.logits_size();
  p.theta[static_cast<Eigen::Index>(b3 + static_cast<std::size_t>(ActionType::hold))] = 5.0;
  PlacementEnv env(s.sc, s.d.workloads[0]);
  Extraction ex = extract_placement(env, p);
  CHECK(ex.steps == 20);
  CHECK(ex.changes == 0);
  CHECK(ex.placement.empty());

  // Deploy micro 0 on site 0, then hold it forever.
  p.theta[static_cast<Eigen::Index>(b3 + static_cast<std::size_t>(ActionType::hold))] = 0.0;
  p.theta[static_cast<Eigen::Index>(b3 + static_cast<std::size_t>(ActionType::deploy))] = 1.0;
  Extraction one = extract_placement(env, p);
  CHECK(one.changes == 1);
  CHECK(one.steps == 21);
  CHECK(one.placement.instance_count() >= 1);
}

TEST_CASE("extracted placements are always valid") {
  Drone s;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    PolicyParameters p = randomized(init_policy(s.sc, 16, seed), seed + 100, 1.5);
    for (const Workload& w : s.d.workloads) {
      PlacementEnv env(s.sc, w);
      Extraction ex = extract_placement(env, p);
      CHECK(validate_placement(s.sc, ex.placement).valid());
      CHECK(ex.coverage_trace.size() == static_cast<std::size_t>(ex.steps));
    }
  }
}
