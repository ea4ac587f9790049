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

#include "svr/dynamics.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace svr {

bool all_finite(const Vector& v) { return v.allFinite(); }

Vector DynamicsModel::step(const Vector& x, const Vector& u) const {
  if (x.size() != state_size()) {
    throw InvalidArgument("state length " + std::to_string(x.size()) + " != " +
                          std::to_string(state_size()));
  }
  if (u.size() != control_dim()) {
    throw InvalidArgument("control length " + std::to_string(u.size()) + " != " +
                          std::to_string(control_dim()));
  }
  if (!x.allFinite() || !u.allFinite()) {
    throw NumericalError("non-finite input to " + name() + " step");
  }
  Vector next(x.size());
  step_unchecked(x, u, next);
  return next;
}

ModelBase::ModelBase(std::string name, DofLayout layout, int control_dim, double timestep)
    : name_(std::move(name)),
      layout_(std::make_shared<const DofLayout>(std::move(layout))),
      control_dim_(control_dim),
      timestep_(timestep),
      initial_state_(Vector::Zero(layout_->state_size())) {
  if (control_dim_ < 1) throw InvalidArgument("control dimension must be >= 1");
  if (!(timestep_ > 0.0)) throw InvalidArgument("timestep must be > 0");
}

void ModelBase::set_initial_state(Vector x0) {
  if (x0.size() != layout_->state_size()) throw InvalidArgument("initial state has wrong length");
  initial_state_ = std::move(x0);
}

LinearModel::LinearModel(Matrix a, Matrix b, int robot_dofs, double timestep)
    : ModelBase("lti",
                DofLayout(robot_dofs, a.rows() / 2 > robot_dofs
                                          ? std::vector<Body>{{"plant", static_cast<int>(a.rows() / 2) - robot_dofs}}
                                          : std::vector<Body>{}),
                static_cast<int>(b.cols()), timestep),
      a_(std::move(a)),
      b_(std::move(b)) {
  if (a_.rows() != a_.cols() || a_.rows() % 2 != 0) {
    throw InvalidArgument("LTI A must be square with even dimension");
  }
  if (b_.rows() != a_.rows()) throw InvalidArgument("LTI B rows must match A");
}

void LinearModel::step_unchecked(const Vector& x, const Vector& u, Vector& next) const {
  next.noalias() = a_ * x;
  next.noalias() += b_ * u;
}

CountingModel::CountingModel(std::shared_ptr<const DynamicsModel> inner) : inner_(std::move(inner)) {
  if (!inner_) throw InvalidArgument("CountingModel requires a model");
}

void CountingModel::step_unchecked(const Vector& x, const Vector& u, Vector& next) const {
  count_.fetch_add(1, std::memory_order_relaxed);
  next = inner_->step(x, u);
}

LinearizedDynamics linearize_reduced(const DynamicsModel& model, const Vector& x,
                                     const Vector& u, const DofSet& set,
                                     const FiniteDifferenceOptions& options,
                                     const Vector* nominal_next) {
  if (!(options.eps_state > 0.0) || !(options.eps_control > 0.0)) {
    throw InvalidArgument("finite-difference epsilons must be > 0");
  }
  if (set.layout().total() != model.layout().total()) {
    throw InvalidArgument("DoF set does not belong to the model layout");
  }
  const int n = 2 * set.size();
  const int m = model.control_dim();
  LinearizedDynamics lin;
  lin.a.resize(n, n);
  lin.b.resize(n, m);

  if (options.scheme == DifferenceScheme::kForward) {
    const Vector base = gather(nominal_next ? *nominal_next : model.step(x, u), set);
    Vector xp = x;
    for (int j = 0; j < n; ++j) {
      const int idx = set.full_index(j);
      xp[idx] = x[idx] + options.eps_state;
      lin.a.col(j) = (gather(model.step(xp, u), set) - base) / options.eps_state;
      xp[idx] = x[idx];
    }
    Vector up = u;
    for (int i = 0; i < m; ++i) {
      up[i] = u[i] + options.eps_control;
      lin.b.col(i) = (gather(model.step(x, up), set) - base) / options.eps_control;
      up[i] = u[i];
    }
    lin.eval_count = n + m;
  } else {
    Vector xp = x;
    for (int j = 0; j < n; ++j) {
      const int idx = set.full_index(j);
      xp[idx] = x[idx] + options.eps_state;
      const Vector hi = gather(model.step(xp, u), set);
      xp[idx] = x[idx] - options.eps_state;
      const Vector lo = gather(model.step(xp, u), set);
      xp[idx] = x[idx];
      lin.a.col(j) = (hi - lo) / (2.0 * options.eps_state);
    }
    Vector up = u;
    for (int i = 0; i < m; ++i) {
      up[i] = u[i] + options.eps_control;
      const Vector hi = gather(model.step(x, up), set);
      up[i] = u[i] - options.eps_control;
      const Vector lo = gather(model.step(x, up), set);
      up[i] = u[i];
      lin.b.col(i) = (hi - lo) / (2.0 * options.eps_control);
    }
    lin.eval_count = 2 * (n + m);
  }
  return lin;
}

}  // namespace svr
