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

#include "svr/optimizer.hpp"

#include <chrono>
#include <limits>
#include <string>
#include <utility>

#include <Eigen/Cholesky>

namespace svr {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

Trajectory rollout(const DynamicsModel& model, const CostSpec& spec, const Vector& x0,
                   const std::vector<Vector>& controls, std::size_t t0) {
  Trajectory traj;
  traj.controls = controls;
  traj.states.reserve(controls.size() + 1);
  traj.states.push_back(x0);
  for (const Vector& u : controls) {
    Vector next = model.step(traj.states.back(), u);
    if (!next.allFinite()) {
      traj.finite = false;
      traj.cost = kInf;
      return traj;
    }
    traj.states.push_back(std::move(next));
  }
  traj.cost = trajectory_cost(spec, traj.states, traj.controls, t0);
  return traj;
}

std::optional<GainSchedule> backward_pass(const std::vector<LinearizedDynamics>& lin,
                                          const std::vector<CostExpansion>& running,
                                          const CostExpansion& terminal, double reg,
                                          const DofSet& set) {
  const std::size_t horizon = lin.size();
  if (running.size() != horizon) throw InvalidArgument("backward_pass: schedule lengths differ");
  if (reg < 0.0) throw InvalidArgument("backward_pass: regularization must be >= 0");
  const int n = 2 * set.size();

  GainSchedule gains{{}, {}, set, 0.0, 0.0};
  gains.k.resize(horizon);
  gains.big_k.resize(horizon);

  Vector v_x = terminal.l_x;
  Matrix v_xx = terminal.l_xx;
  Matrix at_vxx(n, n);
  Matrix bt_vxx;
  if (v_x.size() != n) throw InvalidArgument("backward_pass: terminal expansion size mismatch");

  for (std::size_t s = horizon; s-- > 0;) {
    const Matrix& a = lin[s].a;
    const Matrix& b = lin[s].b;
    const CostExpansion& l = running[s];
    const int m = static_cast<int>(b.cols());
    if (a.rows() != n || b.rows() != n) throw InvalidArgument("backward_pass: Jacobian size mismatch");

    const Vector q_x = l.l_x + a.transpose() * v_x;
    const Vector q_u = l.l_u + b.transpose() * v_x;
    at_vxx.noalias() = a.transpose() * v_xx;
    bt_vxx.noalias() = b.transpose() * v_xx;
    Matrix q_xx = l.l_xx;
    q_xx.noalias() += at_vxx * a;
    Matrix q_uu = l.l_uu;
    q_uu.noalias() += bt_vxx * b;
    // The quadratic running cost has no state-control cross term (l_ux = 0).
    Matrix q_ux = Matrix::Zero(m, n);
    q_ux.noalias() += bt_vxx * a;

    Matrix q_uu_reg = q_uu;
    q_uu_reg.diagonal().array() += reg;
    Eigen::LLT<Matrix> llt(q_uu_reg);
    if (llt.info() != Eigen::Success) return std::nullopt;

    Vector k = -llt.solve(q_u);
    Matrix big_k = -llt.solve(q_ux);
    if (!k.allFinite() || !big_k.allFinite()) return std::nullopt;

    gains.expected_linear += k.dot(q_u);
    gains.expected_quadratic += 0.5 * k.dot(q_uu * k);

    // V_x = Q_x - Q_ux' Q_uu^-1 Q_u, V_xx = Q_xx - Q_ux' Q_uu^-1 Q_ux.
    v_x = q_x + q_ux.transpose() * k;
    v_xx = q_xx;
    v_xx.noalias() += q_ux.transpose() * big_k;
    v_xx = 0.5 * (v_xx + v_xx.transpose()).eval();

    gains.k[s] = std::move(k);
    gains.big_k[s] = std::move(big_k);
  }
  return gains;
}

Trajectory forward_rollout(const DynamicsModel& model, const CostSpec& spec, const Trajectory& nominal,
                           const GainSchedule& gains, double alpha, const DofSet& set,
                           std::size_t t0) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("forward_rollout: alpha must be in [0, 1]");
  if (!(gains.dofset == set)) throw InvalidArgument("forward_rollout: gains computed for another DoF set");
  const std::size_t horizon = nominal.controls.size();
  if (gains.horizon() != horizon) throw InvalidArgument("forward_rollout: horizon mismatch");

  Trajectory cand;
  cand.states.reserve(horizon + 1);
  cand.controls.reserve(horizon);
  cand.states.push_back(nominal.states.front());
  for (std::size_t t = 0; t < horizon; ++t) {
    const Vector& x_hat = cand.states.back();
    Vector u_hat = nominal.controls[t] + alpha * gains.k[t];
    u_hat.noalias() += gains.big_k[t] * (gather(x_hat, set) - gather(nominal.states[t], set));
    if (!u_hat.allFinite()) {
      cand.finite = false;
      cand.cost = kInf;
      return cand;
    }
    Vector next = model.step(x_hat, u_hat);
    cand.controls.push_back(std::move(u_hat));
    if (!next.allFinite()) {
      cand.finite = false;
      cand.cost = kInf;
      return cand;
    }
    cand.states.push_back(std::move(next));
  }
  cand.cost = trajectory_cost(spec, cand.states, cand.controls, t0);
  return cand;
}

OptimiseResult optimise_iteration(const DynamicsModel& model, const CostSpec& spec, const Vector& x0,
                                  const std::vector<Vector>& controls, const DofSet& set,
                                  const OptimiserOptions& options, std::size_t t0) {
  const auto started = std::chrono::steady_clock::now();
  const std::size_t horizon = controls.size();
  if (horizon == 0) throw InvalidArgument("optimise_iteration: empty control sequence");

  OptimiserStats stats;
  stats.reduced_dofs = set.size();
  const Trajectory nominal = rollout(model, spec, x0, controls, t0);
  stats.rollout_evals += static_cast<long>(horizon);
  stats.cost_before = nominal.cost;
  stats.cost_after = nominal.cost;

  auto finish = [&](OptimiseResult result) {
    result.stats.dynamics_evals = result.stats.derivative_evals + result.stats.rollout_evals;
    result.stats.wallclock =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
  };
  auto zero_gains = [&] {
    const int m = model.control_dim();
    GainSchedule g{std::vector<Vector>(horizon, Vector::Zero(m)),
                   std::vector<Matrix>(horizon, Matrix::Zero(m, 2 * set.size())), set, 0.0, 0.0};
    return g;
  };

  if (!nominal.finite) {
    stats.backward_pass_failed = true;
    return finish({controls, zero_gains(), stats});
  }

  std::vector<LinearizedDynamics> lin(horizon);
  std::vector<CostExpansion> running(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    lin[t] = linearize_reduced(model, nominal.states[t], nominal.controls[t], set,
                               options.finite_difference, &nominal.states[t + 1]);
    stats.derivative_evals += lin[t].eval_count;
    running[t] = expansion_reduced(spec, nominal.states[t], nominal.controls[t], t0 + t, set);
  }
  const CostExpansion terminal =
      terminal_expansion_reduced(spec, nominal.states.back(), t0 + horizon, set);

  std::optional<GainSchedule> gains;
  double reg = options.initial_regularization;
  for (int attempt = 0; attempt <= options.max_regularization_doublings; ++attempt) {
    if (attempt > 0) reg = reg > 0.0 ? 2.0 * reg : 1e-6;
    gains = backward_pass(lin, running, terminal, reg, set);
    if (gains) break;
  }
  stats.regularization = reg;
  if (!gains) {
    stats.backward_pass_failed = true;
    return finish({controls, zero_gains(), stats});
  }

  std::vector<Vector> best = controls;
  for (double alpha : options.line_search) {
    Trajectory cand = forward_rollout(model, spec, nominal, *gains, alpha, set, t0);
    stats.rollout_evals += static_cast<long>(cand.controls.size());
    if (cand.finite && cand.cost < nominal.cost) {
      stats.accepted_alpha = alpha;
      stats.cost_after = cand.cost;
      best = std::move(cand.controls);
      break;
    }
  }
  return finish({std::move(best), std::move(*gains), stats});
}

}  // namespace svr
