// Copyright 2026 The SVR-MPC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "svr/mpc.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <string>
#include <thread>
#include <utility>

namespace svr {

void MpcConfig::validate() const {
  if (horizon < 1) throw InvalidArgument("horizon T must be >= 1");
  if (timeout < 1) throw InvalidArgument("timeout Y must be >= 1");
  if (slowdown < 1) throw InvalidArgument("slowdown must be >= 1");
  if (!(timestep > 0.0)) throw InvalidArgument("timestep must be > 0");
  if (!(virtual_cost_per_eval >= 0.0) || !std::isfinite(virtual_cost_per_eval)) {
    throw InvalidArgument("virtual_cost_per_eval must be finite and >= 0");
  }
  policy.validate();
}

bool SuccessPredicate::inside(const Vector& state) const {
  if (x_dofs.empty()) return false;
  double cx = 0.0;
  double cy = 0.0;
  for (int dof : x_dofs) {
    cx += state[dof];
    cy += state[dof + 1];
  }
  cx /= static_cast<double>(x_dofs.size());
  cy /= static_cast<double>(x_dofs.size());
  return std::hypot(cx - target_x, cy - target_y) <= radius;
}

double MpcRecord::mean_dofs() const {
  if (iterations.empty()) return 0.0;
  double sum = 0.0;
  for (const IterationLog& it : iterations) sum += it.dofs_optimised;
  return sum / static_cast<double>(iterations.size());
}

double MpcRecord::mean_tick_cost() const {
  if (iterations.empty()) return 0.0;
  double sum = 0.0;
  for (const IterationLog& it : iterations) sum += it.tick_cost;
  return sum / static_cast<double>(iterations.size());
}

double MpcRecord::mean_wallclock_ms() const {
  if (iterations.empty()) return 0.0;
  double sum = 0.0;
  for (const IterationLog& it : iterations) sum += it.stats.wallclock;
  return 1e3 * sum / static_cast<double>(iterations.size());
}

AgentTick agent_tick(const DynamicsModel& model, std::vector<Vector>& plan, const Vector& state) {
  if (plan.empty()) throw InvalidArgument("agent_tick: empty plan");
  AgentTick out{plan.front(), model.step(state, plan.front())};
  plan.erase(plan.begin());
  plan.push_back(plan.empty() ? out.control : plan.back());
  return out;
}

std::vector<Vector> realign_plan(std::vector<Vector> plan, int elapsed, int horizon) {
  if (plan.empty()) throw InvalidArgument("realign_plan: empty plan");
  const Vector last = plan.back();
  const std::size_t drop = std::min<std::size_t>(static_cast<std::size_t>(std::max(elapsed, 0)), plan.size());
  plan.erase(plan.begin(), plan.begin() + static_cast<std::ptrdiff_t>(drop));
  plan.resize(static_cast<std::size_t>(horizon), last);
  return plan;
}

int virtual_tick_cost(const MpcConfig& config, long evals) {
  const double ticks = config.virtual_cost_per_eval * static_cast<double>(evals) / config.slowdown;
  return static_cast<int>(std::ceil(ticks));
}

namespace {

Rng planner_rng(const SelectionPolicy& policy) { return Rng(policy.seed ^ 0x5851f42d4c957f2dULL); }

}  // namespace

Planner::Planner(const MpcConfig& config, std::shared_ptr<const DynamicsModel> model, const CostSpec& cost)
    : config_(config),
      model_(std::move(model)),
      cost_(cost),
      rng_(planner_rng(config.policy)),
      set_(DofSet::full(model_->layout_ptr())) {
  config_.validate();
  cost_.validate(model_->state_size(), model_->control_dim());
  set_ = initial_set(config_.policy, model_->layout_ptr(), cost_, rng_);
}

Planner::Output Planner::iterate(const Vector& x0, const std::vector<Vector>& controls, std::size_t t0) {
  const SelectionPolicy& policy = config_.policy;
  IterationLog log;
  log.index = iterations_++;
  log.dofs_before = set_.size();

  if (policy.method == Method::kRandom) {
    // resampled every iteration
    if (log.index > 0) set_ = initial_set(policy, model_->layout_ptr(), cost_, rng_);
  } else if (policy.reduces_online()) {
    const std::vector<int> unused = set_.complement();
    log.added = identify_dofs_to_add(unused, policy.theta, rng_);
    set_ = set_.with_added(log.added);
  }
  log.dofs_optimised = set_.size();

  OptimiseResult result = optimise_iteration(*model_, cost_, x0, controls, set_, config_.optimiser, t0);
  log.stats = result.stats;

  if (policy.reduces_online() && !result.stats.backward_pass_failed) {
    std::optional<ImportanceScores> scores;
    if (policy.method == Method::kSvrSvd) {
      scores = importance_svd(result.gains, policy.g, policy.signed_importance);
    }
    if (!scores) scores = importance_sum(result.gains, policy.signed_importance);
    log.removed = identify_dofs_to_remove(*scores, policy, set_.layout());
    set_ = set_.with_removed(log.removed);
  }
  log.dofs_after = set_.size();
  return {std::move(result.controls), std::move(log), std::move(result.gains)};
}

namespace {

class Episode {
 public:
  Episode(const MpcConfig& config, const MpcTask& task) : config_(config), task_(task) {
    record_.states.push_back(task.x0);
    state_ = task.x0;
  }

  // Advances the agent one step; returns false once the episode has ended.
  bool tick(std::vector<Vector>& plan) {
    if (done_) return false;
    AgentTick r = agent_tick(*task_.model, plan, state_);
    if (!r.state.allFinite()) {
      record_.diverged = true;
      done_ = true;
      return false;
    }
    record_.controls.push_back(std::move(r.control));
    record_.states.push_back(r.state);
    state_ = std::move(r.state);
    ++step_;
    if (task_.success) {
      hold_ = task_.success->inside(state_) ? hold_ + 1 : 0;
      if (hold_ >= task_.success->hold_steps) {
        record_.success = true;
        record_.success_step = step_;
        done_ = true;
      }
    }
    if (step_ >= config_.timeout) done_ = true;
    return !done_;
  }

  bool done() const { return done_; }
  int step() const { return step_; }
  const Vector& state() const { return state_; }
  MpcRecord& record() { return record_; }

  MpcRecord finish() {
    record_.mpc_cost = mpc_cost(task_.cost, record_.states, record_.controls);
    return std::move(record_);
  }

 private:
  const MpcConfig& config_;
  const MpcTask& task_;
  MpcRecord record_;
  Vector state_;
  int step_ = 0;
  int hold_ = 0;
  bool done_ = false;
};

MpcRecord run_virtual(const MpcConfig& config, const MpcTask& task) {
  const int m = task.model->control_dim();
  std::vector<Vector> plan(static_cast<std::size_t>(config.horizon), Vector::Zero(m));
  Planner planner(config, task.model, task.cost);
  Episode episode(config, task);

  while (!episode.done()) {
    const int snapshot = episode.step();
    Planner::Output out = planner.iterate(episode.state(), plan, static_cast<std::size_t>(snapshot));
    const int lag = virtual_tick_cost(config, out.log.stats.dynamics_evals);
    out.log.snapshot_step = snapshot;
    out.log.tick_cost = lag;
    out.log.publish_step = snapshot + lag;
    for (int i = 0; i < lag && episode.tick(plan); ++i) {
    }
    if (episode.done() && episode.step() < snapshot + lag) {
      out.log.published = false;
      episode.record().iterations.push_back(std::move(out.log));
      break;
    }
    plan = realign_plan(std::move(out.controls), lag, config.horizon);
    episode.record().iterations.push_back(std::move(out.log));
    if (lag == 0) episode.tick(plan);
  }
  return episode.finish();
}

MpcRecord run_real_async(const MpcConfig& config, const MpcTask& task) {
  const int m = task.model->control_dim();
  std::vector<Vector> plan(static_cast<std::size_t>(config.horizon), Vector::Zero(m));
  Planner planner(config, task.model, task.cost);
  Episode episode(config, task);
  std::mutex mutex;
  std::atomic<bool> finished{false};

  const auto period = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double>(config.slowdown * config.timestep));
  std::jthread agent([&] {
    auto next = std::chrono::steady_clock::now();
    while (!finished.load()) {
      next += period;
      std::this_thread::sleep_until(next);
      std::lock_guard lock(mutex);
      if (!episode.tick(plan)) finished.store(true);
    }
  });

  while (!finished.load()) {
    Vector x0;
    std::vector<Vector> snapshot_plan;
    int snapshot = 0;
    {
      std::lock_guard lock(mutex);
      if (episode.done()) break;
      x0 = episode.state();
      snapshot_plan = plan;
      snapshot = episode.step();
    }
    Planner::Output out = planner.iterate(x0, snapshot_plan, static_cast<std::size_t>(snapshot));
    std::lock_guard lock(mutex);
    out.log.snapshot_step = snapshot;
    out.log.publish_step = episode.step();
    out.log.tick_cost = out.log.publish_step - snapshot;
    if (episode.done()) {
      out.log.published = false;
      episode.record().iterations.push_back(std::move(out.log));
      break;
    }
    plan = realign_plan(std::move(out.controls), out.log.tick_cost, config.horizon);
    episode.record().iterations.push_back(std::move(out.log));
  }
  agent.join();
  return episode.finish();
}

}  // namespace

MpcRecord run_mpc(const MpcConfig& config, const MpcTask& task) {
  config.validate();
  if (!task.model) throw InvalidArgument("run_mpc: task has no model");
  if (task.x0.size() != task.model->state_size()) throw InvalidArgument("run_mpc: x0 has wrong length");
  if (std::abs(task.model->timestep() - config.timestep) > 1e-12) {
    throw InvalidArgument("run_mpc: config timestep differs from the model timestep");
  }
  return config.mode == MpcMode::kVirtualTime ? run_virtual(config, task) : run_real_async(config, task);
}

}  // namespace svr
