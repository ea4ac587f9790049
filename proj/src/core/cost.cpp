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

#include "svr/cost.hpp"

#include <string>

namespace svr {

const Vector& CostSpec::desired_at(std::size_t t) const {
  if (desired.empty()) throw InvalidArgument("cost spec has no desired state");
  return t < desired.size() ? desired[t] : desired.back();
}

void CostSpec::validate(int n, int m) const {
  if (state_weights.size() != n || terminal_weights.size() != n) {
    throw InvalidArgument("state weights must have length " + std::to_string(n));
  }
  if (control_weights.size() != m) {
    throw InvalidArgument("control weights must have length " + std::to_string(m));
  }
  if ((state_weights.array() < 0.0).any() || (terminal_weights.array() < 0.0).any() ||
      (control_weights.array() < 0.0).any()) {
    throw InvalidArgument("cost weights must be non-negative");
  }
  if (!state_weights.allFinite() || !terminal_weights.allFinite() || !control_weights.allFinite()) {
    throw InvalidArgument("cost weights must be finite");
  }
  if (desired.empty()) throw InvalidArgument("cost spec needs a desired state");
  for (const Vector& d : desired) {
    if (d.size() != n) throw InvalidArgument("desired state has wrong length");
  }
}

std::vector<bool> cost_mask(const CostSpec& spec, const DofLayout& layout) {
  const int total = layout.total();
  std::vector<bool> mask(static_cast<std::size_t>(total), false);
  for (int dof = 0; dof < total; ++dof) {
    mask[static_cast<std::size_t>(dof)] =
        spec.state_weights[dof] != 0.0 || spec.state_weights[total + dof] != 0.0 ||
        spec.terminal_weights[dof] != 0.0 || spec.terminal_weights[total + dof] != 0.0;
  }
  return mask;
}

double running_cost(const CostSpec& spec, const Vector& x, const Vector& u, std::size_t t) {
  const Vector& target = spec.desired_at(t);
  if (x.size() != target.size() || u.size() != spec.control_weights.size()) {
    throw InvalidArgument("running_cost: dimension mismatch");
  }
  const double state_term = ((x - target).array().square() * spec.state_weights.array()).sum();
  const double control_term = (u.array().square() * spec.control_weights.array()).sum();
  return state_term + control_term;
}

double terminal_cost(const CostSpec& spec, const Vector& x, std::size_t t) {
  const Vector& target = spec.desired_at(t);
  if (x.size() != target.size()) throw InvalidArgument("terminal_cost: dimension mismatch");
  return ((x - target).array().square() * spec.terminal_weights.array()).sum();
}

double trajectory_cost(const CostSpec& spec, const std::vector<Vector>& states,
                       const std::vector<Vector>& controls, std::size_t t0) {
  if (states.size() != controls.size() + 1) {
    throw InvalidArgument("trajectory_cost: need |X| = |U| + 1 (got " + std::to_string(states.size()) +
                          " states, " + std::to_string(controls.size()) + " controls)");
  }
  double total = 0.0;
  for (std::size_t t = 0; t < controls.size(); ++t) {
    total += running_cost(spec, states[t], controls[t], t0 + t);
  }
  return total + terminal_cost(spec, states.back(), t0 + controls.size());
}

CostExpansion expansion_reduced(const CostSpec& spec, const Vector& x, const Vector& u,
                                std::size_t t, const DofSet& set) {
  CostExpansion e;
  const Vector dx = gather(x - spec.desired_at(t), set);
  const Vector w = gather(spec.state_weights, set);
  e.l_x = 2.0 * w.cwiseProduct(dx);
  e.l_xx = (2.0 * w).asDiagonal();
  e.l_u = 2.0 * spec.control_weights.cwiseProduct(u);
  e.l_uu = (2.0 * spec.control_weights).asDiagonal();
  return e;
}

CostExpansion terminal_expansion_reduced(const CostSpec& spec, const Vector& x, std::size_t t,
                                         const DofSet& set) {
  CostExpansion e;
  const Vector dx = gather(x - spec.desired_at(t), set);
  const Vector w = gather(spec.terminal_weights, set);
  e.l_x = 2.0 * w.cwiseProduct(dx);
  e.l_xx = (2.0 * w).asDiagonal();
  return e;
}

double mpc_cost(const CostSpec& spec, const std::vector<Vector>& executed_states,
                const std::vector<Vector>& executed_controls) {
  if (executed_states.size() != executed_controls.size() + 1) {
    throw InvalidArgument("mpc_cost: need Y + 1 states for Y controls");
  }
  return trajectory_cost(spec, executed_states, executed_controls, 0);
}

}  // namespace svr
