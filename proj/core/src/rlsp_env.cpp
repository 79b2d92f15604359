#include "edgeplace/rlsp_env.hpp"

#include <algorithm>
#include <ostream>

#include <fmt/format.h>

#include "edgeplace/error.hpp"

namespace edgeplace {

std::string_view to_string(ActionType type) {
  switch (type) {
    case ActionType::deploy: return "deploy";
    case ActionType::evict: return "evict";
    case ActionType::hold: return "hold";
  }
  return "?";
}

std::string_view to_string(ActionStatus status) {
  switch (status) {
    case ActionStatus::valid: return "valid";
    case ActionStatus::invalid: return "invalid";
    case ActionStatus::forbidden: return "forbidden";
  }
  return "?";
}

void RewardConfig::validate() const {
  if (!(valid_bonus > 0.0)) throw ValidationError("reward: valid_bonus must be positive");
  if (!(invalid_penalty < 0.0)) throw ValidationError("reward: invalid_penalty must be negative");
  if (!(constraint_penalty < 0.0)) throw ValidationError("reward: constraint_penalty must be negative");
  if (!(per_access_bonus > 0.0)) throw ValidationError("reward: per_access_bonus must be positive");
  if (!(cost_scale >= 0.0)) throw ValidationError("reward: cost_scale must be non-negative");
}

PlacementEnv::PlacementEnv(const Scenario& sc, const Workload& workload, EnvConfig config)
    : sc_(&sc), config_(config), limits_(sc.limits(workload)), tau_(build_tmatrix(sc)) {
  config_.reward.validate();
  if (config_.max_steps < 1) throw ValidationError("env: max_steps must be at least 1");

  for (std::size_t m = 0; m < sc.micro_count(); ++m) {
    for (std::size_t e = 0; e < sc.site_count(); ++e) {
      if (!tau_.forbidden(m, e)) max_cost_ += tau_.at(m, e);
    }
  }
  double widest = 0.0;
  for (std::size_t a = 0; a < sc.site_count(); ++a) {
    for (std::size_t b = 0; b < sc.site_count(); ++b) {
      Latency l = sc.site_site_latency(a, b);
      if (l.finite()) widest = std::max(widest, l.ms());
    }
  }
  for (const CommPair& pair : sc.app().comm()) max_cost_ += pair.rate * widest;

  reset(0);
}

Observation PlacementEnv::reset(std::uint64_t seed) {
  seed_ = seed;
  placement_ = Placement::empty_for(*sc_);
  counter_ = 0;
  reward_accum_ = 0.0;
  refresh_access();
  return next_observation();
}

void PlacementEnv::set_workload(const Workload& workload) {
  limits_ = sc_->limits(workload);
  refresh_access();
}

void PlacementEnv::refresh_access() { access_ = coverage(*sc_, placement_, limits_); }

double PlacementEnv::normalized_cost() const {
  if (max_cost_ <= 0.0) return 0.0;
  double cost = deployment_cost(placement_, tau_) + communication_cost(*sc_, placement_).hosted_total;
  return cost / max_cost_;
}

std::pair<ActionStatus, double> PlacementEnv::take_action(const Action& a) {
  if (a.micro >= sc_->micro_count() || a.site >= sc_->site_count()) {
    throw ContractError(fmt::format("action index out of range: micro {} site {}", a.micro, a.site));
  }
  const RewardConfig& r = config_.reward;
  const bool present = placement_.hosts(a.site, a.micro);
  std::vector<std::size_t> unit{a.micro};
  if (auto q = sc_->partner(a.micro)) unit.push_back(*q);

  switch (a.type) {
    case ActionType::hold:
      return present ? std::pair{ActionStatus::valid, r.valid_bonus} : std::pair{ActionStatus::invalid, r.invalid_penalty};

    case ActionType::evict:
      if (!present) return {ActionStatus::invalid, r.invalid_penalty};
      for (std::size_t u : unit) {
        if (placement_.hosts(a.site, u)) placement_.erase(a.site, u);
      }
      return {ActionStatus::valid, r.valid_bonus};

    case ActionType::deploy: {
      if (present) return {ActionStatus::invalid, r.invalid_penalty};
      ResourceVector load = site_load(*sc_, placement_, a.site);
      for (std::size_t u : unit) {
        if (placement_.hosts(a.site, u)) continue;
        if (tau_.forbidden(u, a.site)) return {ActionStatus::forbidden, r.constraint_penalty};
        load += sc_->micro(u).demand;
      }
      if (!load.fits_within(sc_->site(a.site).capacity)) return {ActionStatus::forbidden, r.constraint_penalty};
      for (std::size_t u : unit) {
        if (!placement_.hosts(a.site, u)) placement_.insert(a.site, u);
      }
      return {ActionStatus::valid, r.valid_bonus};
    }
  }
  throw ContractError("unknown action type");
}

StepResult PlacementEnv::step(const Action& a) {
  if (done()) throw ContractError("step called on a finished episode");
  auto [status, delta] = take_action(a);
  ++counter_;
  refresh_access();
  const RewardConfig& r = config_.reward;
  double modifier = static_cast<double>(counter_) / static_cast<double>(config_.max_steps);
  double base = delta + r.per_access_bonus * static_cast<double>(access_.accessible_count()) -
                r.cost_scale * normalized_cost();
  StepResult out{next_observation(), base * modifier, done(), status};
  reward_accum_ += out.reward;
  return out;
}

Observation PlacementEnv::next_observation() const {
  Observation obs;
  obs.chains_per_bs.resize(sc_->bs_count());
  obs.micro_per_site.resize(sc_->site_count());
  for (std::size_t b = 0; b < sc_->bs_count(); ++b) obs.chains_per_bs[b] = static_cast<int>(access_.accessible_at(b));
  for (std::size_t e = 0; e < sc_->site_count(); ++e) obs.micro_per_site[e] = static_cast<int>(placement_.count_at(e));
  return obs;
}

void write_trajectory_csv(std::ostream& out, const Scenario& sc, const std::vector<TrajectoryRow>& rows) {
  out << "step,act_type,micro,site,status,reward,accessible,deployed\n";
  for (const TrajectoryRow& row : rows) {
    out << fmt::format("{},{},{},{},{},{:.17g},{},{}\n", row.step, to_string(row.action.type),
                       sc.micro_id(row.action.micro), sc.site_id(row.action.site), to_string(row.status), row.reward,
                       row.accessible, row.deployed);
  }
}

}  // namespace edgeplace
