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

#ifndef SVR_TASK_HPP_
#define SVR_TASK_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "svr/models.hpp"
#include "svr/mpc.hpp"
#include "svr/selection.hpp"

namespace svr {

inline constexpr std::string_view kClutterKind = "clutter";
inline constexpr std::string_view kSoftKind = "soft";
inline constexpr std::string_view kSoftRigidKind = "soft-rigid";

struct ModelSpec {
  std::string kind{kClutterKind};
  int num_objects = 8;            // clutter
  bool unreachable_disc = false;  // clutter
  LatticeParams lattice;          // soft, soft-rigid
  DiscParams disc;
  PusherParams pusher;
  ContactParams contact;
  ArenaParams arena;
  double start_x = -0.15;  // lattice centroid (soft, soft-rigid)
  double start_y = 0.0;
  double target_x = 0.25;
  double target_y = 0.0;

  bool operator==(const ModelSpec&) const = default;
};

// Weights of the quadratic task cost. "goal" is the goal disc (clutter,
// soft-rigid) or every particle of the soft body (soft). The pusher tracks a
// station just behind the goal reference.
struct CostParams {
  double goal_position = 1000.0;
  double goal_velocity = 1.0;
  double distractor_position = 50.0;  // held at initial positions
  double distractor_velocity = 0.0;
  double lattice_position = 0.0;  // soft-rigid lattice
  double pusher_position = 20.0;  // towards a station behind the target
  double pusher_velocity = 0.5;
  double control = 0.1;
  double terminal_scale = 10.0;  // W_f = terminal_scale * W
  // Speed (m/s) of the straight-line reference the goal and pusher track on
  // the way to the target; 0 asks for the target from the first step.
  double goal_speed = 0.05;

  bool operator==(const CostParams&) const = default;
};

struct SuccessParams {
  double radius = 0.03;
  int hold_steps = 10;

  bool operator==(const SuccessParams&) const = default;
};

struct MpcSettings {
  int horizon = 80;
  double timestep = 0.004;
  int timeout = 2000;
  int slowdown = 1;
  MpcMode mode = MpcMode::kVirtualTime;
  double virtual_cost_per_eval = 1.0 / 144.0;

  bool operator==(const MpcSettings&) const = default;
};

// One method row of an experiment grid.
struct MethodSpec {
  Method method = Method::kBaselineFull;
  int theta = 0;
  double rho = 0.0;
  int g = 3;
  bool signed_importance = false;

  std::string label() const;
  SelectionPolicy policy(std::uint64_t seed) const;
  bool operator==(const MethodSpec&) const = default;
};

struct SweepSpec {
  Method method = Method::kSvrSum;
  std::vector<int> thetas{0, 5, 10};
  std::vector<double> rhos{0, 0.1, 0.5, 1, 5, 10, 20, 50, 100, 500};

  bool operator==(const SweepSpec&) const = default;
};

struct TaskConfig {
  std::string name{kClutterKind};
  ModelSpec model;
  CostParams cost;
  SuccessParams success;
  MpcSettings mpc;
  std::vector<MethodSpec> methods;
  SweepSpec sweep;
  int trials = 100;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const TaskConfig&) const = default;
};

// The three built-in desk-scale tasks: clutter, soft, soft-rigid.
std::vector<TaskConfig> builtin_tasks();
TaskConfig builtin_task(std::string_view name);

// JSON; a "base" key names a built-in task whose fields the rest of the
// document overrides.
TaskConfig parse_task_config(std::string_view text);
TaskConfig load_task_config(const std::filesystem::path& path);
std::string serialize_task_config(const TaskConfig& config);
void save_task_config(const TaskConfig& config, const std::filesystem::path& path);

// Thrown on malformed configuration text.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Instantiates the model (layout seeded by `seed` where the kind is seeded),
// the cost and the success predicate.
MpcTask build_task(const TaskConfig& config, std::uint64_t seed);
MpcConfig build_mpc_config(const TaskConfig& config, const MethodSpec& method, std::uint64_t seed);

}  // namespace svr

#endif  // SVR_TASK_HPP_
