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

#ifndef SVR_MPC_HPP_
#define SVR_MPC_HPP_

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "svr/cost.hpp"
#include "svr/dynamics.hpp"
#include "svr/optimizer.hpp"
#include "svr/random.hpp"
#include "svr/selection.hpp"

namespace svr {

enum class MpcMode { kVirtualTime, kRealAsync };

struct MpcConfig {
  int horizon = 80;        // T
  double timestep = 0.004;  // dt of the model
  int timeout = 2000;      // Y, agent steps
  int slowdown = 1;        // agent tick = slowdown * dt of wall time
  SelectionPolicy policy;
  MpcMode mode = MpcMode::kVirtualTime;
  // Virtual mode: agent ticks charged per dynamics evaluation (before the
  // slowdown division).
  double virtual_cost_per_eval = 1.0 / 144.0;
  OptimiserOptions optimiser;

  void validate() const;
};

// Centroid of a group of planar points (pairs of x/y DoFs) lies within
// `radius` of `target` for `hold_steps` consecutive agent steps.
struct SuccessPredicate {
  std::vector<int> x_dofs;  // y DoF is x + 1
  double target_x = 0.0;
  double target_y = 0.0;
  double radius = 0.02;
  int hold_steps = 10;

  bool inside(const Vector& state) const;
};

struct MpcTask {
  std::shared_ptr<const DynamicsModel> model;
  CostSpec cost;
  Vector x0;
  std::optional<SuccessPredicate> success;
};

struct IterationLog {
  int index = 0;
  int dofs_before = 0;     // |C| entering the iteration
  int dofs_optimised = 0;  // |C| after reintroduction, used by the optimiser
  int dofs_after = 0;      // |C| after removal
  std::vector<int> added;
  std::vector<int> removed;
  OptimiserStats stats;
  int snapshot_step = 0;
  int publish_step = 0;
  int tick_cost = 0;
  bool published = true;
};

struct MpcRecord {
  std::vector<Vector> states;    // executed x_0..x_Y
  std::vector<Vector> controls;  // executed u_0..u_{Y-1}
  std::vector<IterationLog> iterations;
  double mpc_cost = 0.0;
  bool success = false;
  std::optional<int> success_step;
  bool diverged = false;

  int steps() const { return static_cast<int>(controls.size()); }
  double mean_dofs() const;
  double mean_tick_cost() const;
  double mean_wallclock_ms() const;
};

// Executes plan[0] on the model, drops it and pads with a copy of the final
// control so the plan length is unchanged.
struct AgentTick {
  Vector control;
  Vector state;
};
AgentTick agent_tick(const DynamicsModel& model, std::vector<Vector>& plan, const Vector& state);

// Drops the first `elapsed` controls of a freshly optimised plan and pads with
// its last control back to `horizon`.
std::vector<Vector> realign_plan(std::vector<Vector> plan, int elapsed, int horizon);

// Planner side of the loop: owns C, L and the reintroduction RNG.
class Planner {
 public:
  Planner(const MpcConfig& config, std::shared_ptr<const DynamicsModel> model, const CostSpec& cost);

  struct Output {
    std::vector<Vector> controls;
    IterationLog log;
    GainSchedule gains;
  };

  // add -> optimise -> remove. `t0` is the agent step of the snapshot.
  Output iterate(const Vector& x0, const std::vector<Vector>& controls, std::size_t t0);

  const DofSet& current_set() const { return set_; }
  int iterations() const { return iterations_; }

 private:
  MpcConfig config_;
  std::shared_ptr<const DynamicsModel> model_;
  CostSpec cost_;
  Rng rng_;
  DofSet set_;
  int iterations_ = 0;
};

// Ticks charged for an iteration that used `evals` dynamics evaluations.
int virtual_tick_cost(const MpcConfig& config, long evals);

MpcRecord run_mpc(const MpcConfig& config, const MpcTask& task);

}  // namespace svr

#endif  // SVR_MPC_HPP_
