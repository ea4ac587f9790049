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

#ifndef SVR_OPTIMIZER_HPP_
#define SVR_OPTIMIZER_HPP_

#include <cstddef>
#include <optional>
#include <vector>

#include "svr/cost.hpp"
#include "svr/dynamics.hpp"

namespace svr {

struct Trajectory {
  std::vector<Vector> states;    // T + 1 full states
  std::vector<Vector> controls;  // T
  double cost = 0.0;
  bool finite = true;
};

// Open-loop terms k_t and reduced feedback gains K_t (m x 2|C|) for the set
// they were computed on.
struct GainSchedule {
  std::vector<Vector> k;
  std::vector<Matrix> big_k;
  DofSet dofset;
  // Predicted cost change of a full step is sum_t (k'Q_u) + 1/2 sum_t (k'Q_uu k);
  // for step size alpha it is alpha * linear + alpha^2 * quadratic.
  double expected_linear = 0.0;
  double expected_quadratic = 0.0;

  std::size_t horizon() const { return k.size(); }
  double expected_change(double alpha) const {
    return alpha * expected_linear + alpha * alpha * expected_quadratic;
  }
};

struct OptimiserOptions {
  FiniteDifferenceOptions finite_difference;
  double initial_regularization = 1e-6;
  int max_regularization_doublings = 5;
  std::vector<double> line_search{1.0, 0.5, 0.25, 0.125, 0.0625};
};

struct OptimiserStats {
  long dynamics_evals = 0;     // derivative + rollout evaluations
  long derivative_evals = 0;   // T (2|C| + m) under forward differences
  long rollout_evals = 0;
  double wallclock = 0.0;      // seconds
  double regularization = 0.0;
  std::optional<double> accepted_alpha;
  double cost_before = 0.0;
  double cost_after = 0.0;
  bool backward_pass_failed = false;
  int reduced_dofs = 0;
};

// Simulates U from x0 on the full model; stops at the first non-finite state
// and reports cost = +inf.
Trajectory rollout(const DynamicsModel& model, const CostSpec& spec, const Vector& x0,
                   const std::vector<Vector>& controls, std::size_t t0 = 0);

// Reduced Riccati-style recursion. Returns nullopt when Q_uu + reg I is not
// positive definite at some step.
std::optional<GainSchedule> backward_pass(const std::vector<LinearizedDynamics>& lin,
                                          const std::vector<CostExpansion>& running,
                                          const CostExpansion& terminal, double reg,
                                          const DofSet& set);

// u^_t = u_t + alpha k_t + K_t (gather(x^_t) - gather(x_t)), stepping the full model.
Trajectory forward_rollout(const DynamicsModel& model, const CostSpec& spec, const Trajectory& nominal,
                           const GainSchedule& gains, double alpha, const DofSet& set,
                           std::size_t t0 = 0);

struct OptimiseResult {
  std::vector<Vector> controls;
  GainSchedule gains;
  OptimiserStats stats;
};

// One iLQR iteration on the reduced set: nominal rollout, reduced linearisation
// and cost expansion, backward pass with regularisation retries, then a
// first-improvement line search. Never returns a higher-cost control sequence.
OptimiseResult optimise_iteration(const DynamicsModel& model, const CostSpec& spec, const Vector& x0,
                                  const std::vector<Vector>& controls, const DofSet& set,
                                  const OptimiserOptions& options = {}, std::size_t t0 = 0);

}  // namespace svr

#endif  // SVR_OPTIMIZER_HPP_
