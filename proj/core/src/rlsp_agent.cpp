#include "edgeplace/rlsp_agent.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "edgeplace/error.hpp"
#include "edgeplace/io.hpp"
#include "edgeplace/log.hpp"

namespace edgeplace {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using ConstMap = Eigen::Map<const MatrixXd>;
using ConstVec = Eigen::Map<const VectorXd>;
using Map = Eigen::Map<MatrixXd>;
using Vec = Eigen::Map<VectorXd>;

constexpr int kCheckpointVersion = 2;

// Offsets of the six tensors of one trunk: W1 b1 W2 b2 W3 b3.
struct Trunk {
  std::size_t in, hidden, out, base;

  [[nodiscard]] std::size_t w1() const { return base; }
  [[nodiscard]] std::size_t b1() const { return w1() + hidden * in; }
  [[nodiscard]] std::size_t w2() const { return b1() + hidden; }
  [[nodiscard]] std::size_t b2() const { return w2() + hidden * hidden; }
  [[nodiscard]] std::size_t w3() const { return b2() + hidden; }
  [[nodiscard]] std::size_t b3() const { return w3() + out * hidden; }
  [[nodiscard]] std::size_t end() const { return b3() + out; }
  [[nodiscard]] std::size_t size() const { return end() - base; }
};

Trunk policy_trunk(const PolicyParameters& p) { return {p.obs_size, p.hidden, p.logits_size(), 0}; }
Trunk value_trunk(const PolicyParameters& p) {
  return {p.obs_size + 1, p.hidden, 1, policy_trunk(p).end()};
}

struct TrunkCache {
  MatrixXd h1, h2, out;
};

TrunkCache forward(const VectorXd& theta, const Trunk& t, const MatrixXd& x) {
  const double* d = theta.data();
  ConstMap w1(d + t.w1(), static_cast<Eigen::Index>(t.hidden), static_cast<Eigen::Index>(t.in));
  ConstVec b1(d + t.b1(), static_cast<Eigen::Index>(t.hidden));
  ConstMap w2(d + t.w2(), static_cast<Eigen::Index>(t.hidden), static_cast<Eigen::Index>(t.hidden));
  ConstVec b2(d + t.b2(), static_cast<Eigen::Index>(t.hidden));
  ConstMap w3(d + t.w3(), static_cast<Eigen::Index>(t.out), static_cast<Eigen::Index>(t.hidden));
  ConstVec b3(d + t.b3(), static_cast<Eigen::Index>(t.out));

  TrunkCache c;
  c.h1 = ((w1 * x).colwise() + b1).array().tanh().matrix();
  c.h2 = ((w2 * c.h1).colwise() + b2).array().tanh().matrix();
  c.out = (w3 * c.h2).colwise() + b3;
  return c;
}

void backward(const VectorXd& theta, const Trunk& t, const MatrixXd& x, const TrunkCache& c, const MatrixXd& d_out,
              VectorXd& grad) {
  const double* d = theta.data();
  ConstMap w2(d + t.w2(), static_cast<Eigen::Index>(t.hidden), static_cast<Eigen::Index>(t.hidden));
  ConstMap w3(d + t.w3(), static_cast<Eigen::Index>(t.out), static_cast<Eigen::Index>(t.hidden));
  double* g = grad.data();
  const auto h = static_cast<Eigen::Index>(t.hidden);
  const auto in = static_cast<Eigen::Index>(t.in);
  const auto out = static_cast<Eigen::Index>(t.out);

  Map(g + t.w3(), out, h) += d_out * c.h2.transpose();
  Vec(g + t.b3(), out) += d_out.rowwise().sum();
  MatrixXd dz2 = ((w3.transpose() * d_out).array() * (1.0 - c.h2.array().square())).matrix();
  Map(g + t.w2(), h, h) += dz2 * c.h1.transpose();
  Vec(g + t.b2(), h) += dz2.rowwise().sum();
  MatrixXd dz1 = ((w2.transpose() * dz2).array() * (1.0 - c.h1.array().square())).matrix();
  Map(g + t.w1(), h, in) += dz1 * x.transpose();
  Vec(g + t.b1(), h) += dz1.rowwise().sum();
}

MatrixXd input_matrix(const PolicyParameters& p, const std::vector<const Observation*>& obs) {
  MatrixXd x(static_cast<Eigen::Index>(p.obs_size), static_cast<Eigen::Index>(obs.size()));
  for (std::size_t n = 0; n < obs.size(); ++n) {
    const Observation& o = *obs[n];
    if (o.size() != p.obs_size) {
      throw ContractError(fmt::format("observation has {} entries, policy expects {}", o.size(), p.obs_size));
    }
    std::size_t i = 0;
    for (int v : o.chains_per_bs) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n)) = v / p.obs_scale[i];
      ++i;
    }
    for (int v : o.micro_per_site) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n)) = v / p.obs_scale[i];
      ++i;
    }
  }
  return x;
}

MatrixXd with_progress(const MatrixXd& x, const std::vector<double>& progress) {
  MatrixXd v(x.rows() + 1, x.cols());
  v.topRows(x.rows()) = x;
  for (Eigen::Index n = 0; n < x.cols(); ++n) v(x.rows(), n) = progress[static_cast<std::size_t>(n)];
  return v;
}

// Log-softmax of logits[offset, offset+n) of column `col`.
void log_softmax(const MatrixXd& logits, Eigen::Index col, std::size_t offset, std::size_t n,
                 std::vector<double>& logp, std::vector<double>& prob) {
  logp.resize(n);
  prob.resize(n);
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) mx = std::max(mx, logits(static_cast<Eigen::Index>(offset + j), col));
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) sum += std::exp(logits(static_cast<Eigen::Index>(offset + j), col) - mx);
  double lse = mx + std::log(sum);
  for (std::size_t j = 0; j < n; ++j) {
    logp[j] = logits(static_cast<Eigen::Index>(offset + j), col) - lse;
    prob[j] = std::exp(logp[j]);
  }
}

std::size_t action_index(const Action& a, std::size_t head) {
  switch (head) {
    case 0: return static_cast<std::size_t>(a.type);
    case 1: return a.micro;
    default: return a.site;
  }
}

std::size_t sample(const std::vector<double>& prob, std::mt19937_64& rng) {
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  for (std::size_t j = 0; j < prob.size(); ++j) {
    acc += prob[j];
    if (u < acc) return j;
  }
  return prob.size() - 1;
}

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

bool all_finite(const VectorXd& v) { return v.allFinite(); }

}  // namespace

void AgentConfig::validate() const {
  if (!(clip_eps > 0.0 && clip_eps < 1.0)) throw ValidationError("agent: clip_eps must be in (0,1)");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ValidationError("agent: gamma must be in [0,1]");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) throw ValidationError("agent: gae_lambda must be in [0,1]");
  if (!(learning_rate > 0.0)) throw ValidationError("agent: learning_rate must be positive");
  if (epochs < 1 || minibatch < 1 || horizon < 1) {
    throw ValidationError("agent: epochs, minibatch and horizon must be at least 1");
  }
  if (!(entropy_coef >= 0.0) || !(value_coef >= 0.0)) throw ValidationError("agent: loss coefficients must be >= 0");
  if (!(max_grad_norm > 0.0)) throw ValidationError("agent: max_grad_norm must be positive");
  if (hidden < 1) throw ValidationError("agent: hidden must be at least 1");
  if (episodes < 0) throw ValidationError("agent: episodes must be >= 0");
}

nlohmann::json agent_config_to_json(const AgentConfig& c) {
  return {{"clip_eps", c.clip_eps},         {"gamma", c.gamma},
          {"gae_lambda", c.gae_lambda},     {"learning_rate", c.learning_rate},
          {"epochs", c.epochs},             {"minibatch", c.minibatch},
          {"horizon", c.horizon},           {"entropy_coef", c.entropy_coef},
          {"value_coef", c.value_coef},     {"max_grad_norm", c.max_grad_norm},
          {"hidden", c.hidden},             {"episodes", c.episodes}};
}

AgentConfig agent_config_from_json(const nlohmann::json& j) {
  AgentConfig c;
  auto take = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  take("clip_eps", c.clip_eps);
  take("gamma", c.gamma);
  take("gae_lambda", c.gae_lambda);
  take("learning_rate", c.learning_rate);
  take("epochs", c.epochs);
  take("minibatch", c.minibatch);
  take("horizon", c.horizon);
  take("entropy_coef", c.entropy_coef);
  take("value_coef", c.value_coef);
  take("max_grad_norm", c.max_grad_norm);
  take("hidden", c.hidden);
  take("episodes", c.episodes);
  c.validate();
  return c;
}

std::size_t PolicyParameters::policy_size() const { return policy_trunk(*this).size(); }
std::size_t PolicyParameters::value_size() const { return value_trunk(*this).size(); }

PolicyParameters init_policy(std::size_t obs_size, std::array<std::size_t, 3> heads, std::vector<double> obs_scale,
                             std::size_t hidden, std::uint64_t seed) {
  if (obs_scale.size() != obs_size) throw ContractError("init_policy: obs_scale size differs from obs_size");
  PolicyParameters p;
  p.obs_size = obs_size;
  p.heads = heads;
  p.hidden = hidden;
  p.obs_scale = std::move(obs_scale);
  for (double& s : p.obs_scale) s = s > 0.0 ? s : 1.0;
  p.theta = VectorXd::Zero(static_cast<Eigen::Index>(value_trunk(p).end()));

  std::mt19937_64 rng(seed);
  auto fill = [&](std::size_t offset, std::size_t rows, std::size_t cols) {
    double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (std::size_t k = 0; k < rows * cols; ++k) p.theta[static_cast<Eigen::Index>(offset + k)] = u(rng);
  };
  Trunk pt = policy_trunk(p);
  fill(pt.w1(), pt.hidden, pt.in);
  fill(pt.w2(), pt.hidden, pt.hidden);
  Trunk vt = value_trunk(p);
  fill(vt.w1(), vt.hidden, vt.in);
  fill(vt.w2(), vt.hidden, vt.hidden);
  fill(vt.w3(), vt.out, vt.hidden);
  return p;
}

PolicyParameters init_policy(const Scenario& sc, std::size_t hidden, std::uint64_t seed) {
  std::vector<double> scale(sc.bs_count(), static_cast<double>(sc.chain_count()));
  scale.insert(scale.end(), sc.site_count(), static_cast<double>(sc.micro_count()));
  return init_policy(sc.bs_count() + sc.site_count(), {3, sc.micro_count(), sc.site_count()}, std::move(scale),
                     hidden, seed);
}

double PolicyOutput::joint_log_prob(const Action& a) const {
  double total = 0.0;
  for (std::size_t h = 0; h < 3; ++h) total += log_probs[h][action_index(a, h)];
  return total;
}

PolicyOutput policy_forward(const PolicyParameters& params, const Observation& obs, double progress) {
  MatrixXd x = input_matrix(params, {&obs});
  TrunkCache pc = forward(params.theta, policy_trunk(params), x);
  TrunkCache vc = forward(params.theta, value_trunk(params), with_progress(x, {progress}));
  PolicyOutput out;
  std::size_t offset = 0;
  for (std::size_t h = 0; h < 3; ++h) {
    log_softmax(pc.out, 0, offset, params.heads[h], out.log_probs[h], out.probs[h]);
    offset += params.heads[h];
  }
  out.value = vc.out(0, 0);
  return out;
}

double default_reward_scale(const Scenario& sc, const RewardConfig& reward) {
  double denom = reward.per_access_bonus * static_cast<double>(sc.bs_count() * sc.chain_count());
  return denom > 0.0 ? 1.0 / denom : 1.0;
}

RolloutCollector::RolloutCollector(std::vector<PlacementEnv> envs, const AgentConfig& config, std::uint64_t seed,
                                   double reward_scale)
    : envs_(std::move(envs)), config_(config), rng_(seed), reward_scale_(reward_scale) {
  if (envs_.empty()) throw ContractError("rollout collector needs at least one environment");
  obs_ = env().reset(seed);
}

RolloutBatch RolloutCollector::collect(const PolicyParameters& params, std::size_t horizon) {
  if (horizon < 1) throw ContractError("collect: horizon must be at least 1");
  RolloutBatch batch;
  for (std::size_t t = 0; t < horizon; ++t) {
    const double progress = static_cast<double>(env().counter()) / env().config().max_steps;
    PolicyOutput out = policy_forward(params, obs_, progress);
    Action a{static_cast<ActionType>(sample(out.probs[0], rng_)), sample(out.probs[1], rng_),
             sample(out.probs[2], rng_)};
    StepResult r = env().step(a);
    running_return_ += r.reward;

    batch.obs.push_back(obs_);
    batch.progress.push_back(progress);
    batch.actions.push_back(a);
    batch.log_probs.push_back(out.joint_log_prob(a));
    batch.rewards.push_back(r.reward * reward_scale_);
    batch.values.push_back(out.value);
    batch.dones.push_back(r.done ? 1 : 0);

    if (r.done) {
      ++episodes_;
      returns_.push_back(running_return_);
      running_return_ = 0.0;
      current_ = (current_ + 1) % envs_.size();
      obs_ = env().reset(static_cast<std::uint64_t>(episodes_));
    } else {
      obs_ = std::move(r.obs);
    }
  }
  double last_value =
      batch.dones.back() ? 0.0
                         : policy_forward(params, obs_, static_cast<double>(env().counter()) / env().config().max_steps)
                               .value;
  compute_gae(batch, last_value, config_.gamma, config_.gae_lambda);
  return batch;
}

RolloutBatch collect_rollout(const PlacementEnv& env, const PolicyParameters& params, std::size_t horizon,
                             std::uint64_t seed, const AgentConfig& config, double reward_scale) {
  RolloutCollector collector({env}, config, seed, reward_scale);
  return collector.collect(params, horizon);
}

void compute_gae(RolloutBatch& batch, double last_value, double gamma, double lambda) {
  const std::size_t n = batch.size();
  batch.advantages.assign(n, 0.0);
  batch.returns.assign(n, 0.0);
  double next_adv = 0.0;
  double next_value = last_value;
  for (std::size_t k = n; k-- > 0;) {
    double live = batch.dones[k] ? 0.0 : 1.0;
    double delta = batch.rewards[k] + gamma * next_value * live - batch.values[k];
    next_adv = delta + gamma * lambda * live * next_adv;
    batch.advantages[k] = next_adv;
    batch.returns[k] = next_adv + batch.values[k];
    next_value = batch.values[k];
  }
}

LossTerms ppo_loss(const PolicyParameters& params, const RolloutBatch& batch, const std::vector<std::size_t>& index,
                   const AgentConfig& config, VectorXd* grad) {
  const std::size_t n = index.size();
  if (n == 0) throw ContractError("ppo_loss: empty minibatch");
  std::vector<const Observation*> obs;
  std::vector<double> progress;
  obs.reserve(n);
  for (std::size_t i : index) {
    obs.push_back(&batch.obs[i]);
    progress.push_back(i < batch.progress.size() ? batch.progress[i] : 0.0);
  }
  MatrixXd x = input_matrix(params, obs);
  MatrixXd xv = with_progress(x, progress);
  Trunk pt = policy_trunk(params);
  Trunk vt = value_trunk(params);
  TrunkCache pc = forward(params.theta, pt, x);
  TrunkCache vc = forward(params.theta, vt, xv);

  const double inv_n = 1.0 / static_cast<double>(n);
  LossTerms loss;
  MatrixXd d_logits = MatrixXd::Zero(pc.out.rows(), pc.out.cols());
  MatrixXd d_value(1, static_cast<Eigen::Index>(n));
  std::vector<double> logp, prob;

  for (std::size_t k = 0; k < n; ++k) {
    const auto col = static_cast<Eigen::Index>(k);
    const std::size_t i = index[k];
    const Action& a = batch.actions[i];

    double logp_new = 0.0;
    std::array<std::vector<double>, 3> probs, logps;
    std::size_t offset = 0;
    double entropy = 0.0;
    for (std::size_t h = 0; h < 3; ++h) {
      log_softmax(pc.out, col, offset, params.heads[h], logp, prob);
      logp_new += logp[action_index(a, h)];
      double hh = 0.0;
      for (std::size_t j = 0; j < prob.size(); ++j) hh -= prob[j] * logp[j];
      entropy += hh;
      probs[h] = prob;
      logps[h] = logp;
      offset += params.heads[h];
    }

    const double adv = batch.advantages[i];
    const double ratio = std::exp(logp_new - batch.log_probs[i]);
    const double clipped = std::clamp(ratio, 1.0 - config.clip_eps, 1.0 + config.clip_eps);
    const double s1 = ratio * adv;
    const double s2 = clipped * adv;
    const bool unclipped = s1 <= s2;
    loss.policy -= std::min(s1, s2) * inv_n;
    loss.entropy -= config.entropy_coef * entropy * inv_n;
    if (std::abs(ratio - 1.0) > config.clip_eps) loss.clip_fraction += inv_n;

    const double v = vc.out(0, col);
    const double err = v - batch.returns[i];
    loss.value += config.value_coef * err * err * inv_n;
    d_value(0, col) = 2.0 * config.value_coef * err * inv_n;

    // d(-min(s1, s2))/d(logp_new) is -ratio*adv on the unclipped branch and 0
    // on the clipped one.
    const double g_logp = unclipped ? -ratio * adv * inv_n : 0.0;
    offset = 0;
    for (std::size_t h = 0; h < 3; ++h) {
      double hh = 0.0;
      for (std::size_t j = 0; j < probs[h].size(); ++j) hh -= probs[h][j] * logps[h][j];
      const std::size_t chosen = action_index(a, h);
      for (std::size_t j = 0; j < probs[h].size(); ++j) {
        const double p = probs[h][j];
        double g = g_logp * ((j == chosen ? 1.0 : 0.0) - p);
        // Entropy term: d(-c H)/dz_j = c p_j (log p_j + H).
        g += config.entropy_coef * inv_n * p * (logps[h][j] + hh);
        d_logits(static_cast<Eigen::Index>(offset + j), col) = g;
      }
      offset += params.heads[h];
    }
  }
  loss.total = loss.policy + loss.value + loss.entropy;

  if (grad != nullptr) {
    *grad = VectorXd::Zero(params.theta.size());
    backward(params.theta, pt, x, pc, d_logits, *grad);
    backward(params.theta, vt, xv, vc, d_value, *grad);
  }
  return loss;
}

AdamOptimizer::AdamOptimizer(std::size_t size, double learning_rate)
    : lr_(learning_rate),
      m_(VectorXd::Zero(static_cast<Eigen::Index>(size))),
      v_(VectorXd::Zero(static_cast<Eigen::Index>(size))) {}

void AdamOptimizer::step(VectorXd& theta, const VectorXd& grad) {
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  theta.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

LossTerms ppo_update(PolicyParameters& params, const RolloutBatch& batch, const AgentConfig& config,
                     AdamOptimizer& optimizer, std::mt19937_64& rng) {
  if (batch.size() == 0) throw ContractError("ppo_update: empty batch");
  std::vector<std::size_t> order(batch.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t mb = static_cast<std::size_t>(config.minibatch);

  LossTerms last;
  RolloutBatch normalized = batch;
  VectorXd grad;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += mb) {
      std::vector<std::size_t> index(order.begin() + static_cast<std::ptrdiff_t>(start),
                                     order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), start + mb)));
      if (index.size() > 1) {
        double mean = 0.0;
        for (std::size_t i : index) mean += batch.advantages[i];
        mean /= static_cast<double>(index.size());
        double var = 0.0;
        for (std::size_t i : index) var += (batch.advantages[i] - mean) * (batch.advantages[i] - mean);
        double sd = std::sqrt(var / static_cast<double>(index.size() - 1));
        for (std::size_t i : index) normalized.advantages[i] = (batch.advantages[i] - mean) / (sd + 1e-8);
      }
      last = ppo_loss(params, normalized, index, config, &grad);
      if (!std::isfinite(last.total) || !all_finite(grad)) {
        throw DivergenceError(fmt::format("ppo_update: non-finite loss or gradient (loss {})", last.total));
      }
      double norm = grad.norm();
      if (norm > config.max_grad_norm) grad *= config.max_grad_norm / norm;
      VectorXd next = params.theta;
      optimizer.step(next, grad);
      if (!all_finite(next)) throw DivergenceError("ppo_update: parameters became non-finite");
      params.theta = std::move(next);
    }
  }
  return last;
}

PolicyParameters ppo_update(const PolicyParameters& params, const RolloutBatch& batch, const AgentConfig& config,
                            std::uint64_t seed) {
  PolicyParameters out = params;
  AdamOptimizer opt(static_cast<std::size_t>(params.theta.size()), config.learning_rate);
  std::mt19937_64 rng(seed);
  ppo_update(out, batch, config, opt, rng);
  return out;
}

TrainResult train(const Scenario& sc, const std::vector<Workload>& workloads, const AgentConfig& config,
                  std::uint64_t seed, const EnvConfig& env_config, const std::optional<PolicyParameters>& initial,
                  const std::optional<std::filesystem::path>& checkpoint) {
  config.validate();
  if (workloads.empty()) throw ContractError("train: at least one workload is required");

  TrainResult result{initial ? *initial : init_policy(sc, static_cast<std::size_t>(config.hidden), seed), 0, 0, 0.0};
  std::vector<PlacementEnv> envs;
  for (const Workload& w : workloads) envs.emplace_back(sc, w, env_config);
  const long budget = static_cast<long>(config.episodes) * env_config.max_steps;

  RolloutCollector collector(std::move(envs), config, seed ^ 0x9e3779b97f4a7c15ULL,
                             default_reward_scale(sc, env_config.reward));
  AdamOptimizer optimizer(static_cast<std::size_t>(result.params.theta.size()), config.learning_rate);
  std::mt19937_64 rng(seed + 1);

  try {
    while (result.steps < budget) {
      auto n = static_cast<std::size_t>(std::min<long>(config.horizon, budget - result.steps));
      RolloutBatch batch = collector.collect(result.params, n);
      LossTerms loss = ppo_update(result.params, batch, config, optimizer, rng);
      result.steps += static_cast<long>(n);
      const auto& returns = collector.episode_returns();
      if (!returns.empty()) {
        std::size_t k = std::min<std::size_t>(10, returns.size());
        result.recent_return = std::accumulate(returns.end() - static_cast<std::ptrdiff_t>(k), returns.end(), 0.0) /
                               static_cast<double>(k);
      }
      log().debug("train: steps {} episodes {} return {:.2f} loss {:.4f} clip {:.3f}", result.steps,
                  collector.episodes_finished(), result.recent_return, loss.total, loss.clip_fraction);
    }
  } catch (const DivergenceError&) {
    if (checkpoint) save_checkpoint(*checkpoint, result.params, config, seed);
    throw;
  }
  result.episodes = collector.episodes_finished();
  if (checkpoint) save_checkpoint(*checkpoint, result.params, config, seed);
  return result;
}

Extraction extract_placement(PlacementEnv& env, const PolicyParameters& params, int window) {
  Extraction out;
  Observation obs = env.reset(env.seed());
  int still = 0;
  while (!env.done() && still < window) {
    PolicyOutput po = policy_forward(params, obs);
    Action a{static_cast<ActionType>(argmax(po.probs[0])), argmax(po.probs[1]), argmax(po.probs[2])};
    Placement before = env.placement();
    StepResult r = env.step(a);
    ++out.steps;
    bool changed = !(before == env.placement());
    if (changed) {
      ++out.changes;
      still = 0;
    } else {
      ++still;
    }
    out.coverage_trace.push_back(env.access().coverage_pct());
    out.trajectory.push_back(
        {env.counter(), a, r.status, r.reward, env.access().accessible_count(), env.placement().instance_count()});
    obs = std::move(r.obs);
  }
  out.placement = env.placement();
  return out;
}

nlohmann::json checkpoint_to_json(const PolicyParameters& params, const AgentConfig& config, std::uint64_t seed) {
  std::vector<double> theta(params.theta.data(), params.theta.data() + params.theta.size());
  return {{"format", "edgeplace-policy"},
          {"version", kCheckpointVersion},
          {"seed", seed},
          {"config", agent_config_to_json(config)},
          {"obs_size", params.obs_size},
          {"heads", params.heads},
          {"hidden", params.hidden},
          {"obs_scale", params.obs_scale},
          {"params", theta}};
}

PolicyParameters checkpoint_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "edgeplace-policy") throw ParseError("checkpoint: unexpected format");
    int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) throw ParseError(fmt::format("checkpoint: unsupported version {}", version));
    PolicyParameters p;
    p.obs_size = j.at("obs_size").get<std::size_t>();
    p.heads = j.at("heads").get<std::array<std::size_t, 3>>();
    p.hidden = j.at("hidden").get<std::size_t>();
    p.obs_scale = j.at("obs_scale").get<std::vector<double>>();
    auto theta = j.at("params").get<std::vector<double>>();
    if (p.obs_scale.size() != p.obs_size) throw ParseError("checkpoint: obs_scale size mismatch");
    p.theta = VectorXd::Zero(0);
    p.theta.resize(static_cast<Eigen::Index>(value_trunk(p).end()));
    if (theta.size() != static_cast<std::size_t>(p.theta.size())) {
      throw ParseError(fmt::format("checkpoint: {} parameters, layout needs {}", theta.size(), p.theta.size()));
    }
    for (std::size_t k = 0; k < theta.size(); ++k) p.theta[static_cast<Eigen::Index>(k)] = theta[k];
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("checkpoint: {}", e.what()));
  }
}

void save_checkpoint(const std::filesystem::path& path, const PolicyParameters& params, const AgentConfig& config,
                     std::uint64_t seed) {
  write_file_atomic(path, checkpoint_to_json(params, config, seed).dump() + "\n");
}

PolicyParameters load_checkpoint(const std::filesystem::path& path) {
  try {
    return checkpoint_from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(fmt::format("checkpoint '{}': {}", path.string(), e.what()));
  }
}

}  // namespace edgeplace
