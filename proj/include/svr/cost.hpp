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

#ifndef SVR_COST_HPP_
#define SVR_COST_HPP_

#include <cstddef>
#include <vector>

#include "svr/statespace.hpp"

namespace svr {

// Quadratic cost with diagonal weights, always evaluated over the full state:
//   l(x, u)  = (x - x~_t)' W (x - x~_t) + u' R u
//   l_f(x)   = (x - x~_T)' W_f (x - x~_T)
struct CostSpec {
  Vector state_weights;     // diag(W), length 2|F|
  Vector control_weights;   // diag(R), length m
  Vector terminal_weights;  // diag(W_f), length 2|F|
  // One entry means a constant target; otherwise entry t is x~_t and the last
  // entry is held beyond the end.
  std::vector<Vector> desired;

  const Vector& desired_at(std::size_t t) const;
  int state_size() const { return static_cast<int>(state_weights.size()); }
  int control_dim() const { return static_cast<int>(control_weights.size()); }

  // Throws InvalidArgument on dimension mismatch or negative weights.
  void validate(int state_size, int control_dim) const;
};

// Per-DoF flag: any nonzero position/velocity weight in W or W_f.
std::vector<bool> cost_mask(const CostSpec& spec, const DofLayout& layout);

struct CostExpansion {
  Vector l_x;   // 2|C|
  Matrix l_xx;  // 2|C| x 2|C|
  Vector l_u;   // m (empty for terminal expansions)
  Matrix l_uu;  // m x m
};

double running_cost(const CostSpec& spec, const Vector& x, const Vector& u, std::size_t t);
double terminal_cost(const CostSpec& spec, const Vector& x, std::size_t t);

// J = l_f(x_T) + sum_{t<T} l(x_t, u_t), with X indexed from time `t0`.
double trajectory_cost(const CostSpec& spec, const std::vector<Vector>& states,
                       const std::vector<Vector>& controls, std::size_t t0 = 0);

CostExpansion expansion_reduced(const CostSpec& spec, const Vector& x, const Vector& u,
                                std::size_t t, const DofSet& set);
CostExpansion terminal_expansion_reduced(const CostSpec& spec, const Vector& x, std::size_t t,
                                         const DofSet& set);

// Cost of an executed episode: same functional form as trajectory_cost, over
// the real states x_0..x_Y and controls u_0..u_{Y-1}.
double mpc_cost(const CostSpec& spec, const std::vector<Vector>& executed_states,
                const std::vector<Vector>& executed_controls);

}  // namespace svr

#endif  // SVR_COST_HPP_
