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

#ifndef SVR_DYNAMICS_HPP_
#define SVR_DYNAMICS_HPP_

#include <atomic>
#include <memory>
#include <string>
#include <vector>

#include "svr/statespace.hpp"

namespace svr {

// Discrete-time dynamics x_{t+1} = f(x_t, u_t) over a full state laid out as
// [positions(F); velocities(F)]. Implementations must be deterministic and
// free of shared mutable state so that step() may be called concurrently.
class DynamicsModel {
 public:
  virtual ~DynamicsModel() = default;

  virtual const std::shared_ptr<const DofLayout>& layout_ptr() const = 0;
  virtual int control_dim() const = 0;
  virtual double timestep() const = 0;
  virtual std::string name() const = 0;
  virtual Vector initial_state() const = 0;

  const DofLayout& layout() const { return *layout_ptr(); }
  int state_size() const { return layout().state_size(); }

  // Checks dimensions and finiteness of the inputs, then advances one step.
  Vector step(const Vector& x, const Vector& u) const;

 protected:
  virtual void step_unchecked(const Vector& x, const Vector& u, Vector& next) const = 0;
};

// Shared bookkeeping for concrete models.
class ModelBase : public DynamicsModel {
 public:
  ModelBase(std::string name, DofLayout layout, int control_dim, double timestep);

  const std::shared_ptr<const DofLayout>& layout_ptr() const override { return layout_; }
  int control_dim() const override { return control_dim_; }
  double timestep() const override { return timestep_; }
  std::string name() const override { return name_; }
  Vector initial_state() const override { return initial_state_; }
  void set_initial_state(Vector x0);

 private:
  std::string name_;
  std::shared_ptr<const DofLayout> layout_;
  int control_dim_;
  double timestep_;
  Vector initial_state_;
};

// x' = A x + B u.
class LinearModel final : public ModelBase {
 public:
  LinearModel(Matrix a, Matrix b, int robot_dofs, double timestep = 0.004);

  const Matrix& a() const { return a_; }
  const Matrix& b() const { return b_; }

 protected:
  void step_unchecked(const Vector& x, const Vector& u, Vector& next) const override;

 private:
  Matrix a_;
  Matrix b_;
};

// Decorator counting every call to step(). Used to audit finite-difference
// evaluation budgets.
class CountingModel final : public DynamicsModel {
 public:
  explicit CountingModel(std::shared_ptr<const DynamicsModel> inner);

  const std::shared_ptr<const DofLayout>& layout_ptr() const override { return inner_->layout_ptr(); }
  int control_dim() const override { return inner_->control_dim(); }
  double timestep() const override { return inner_->timestep(); }
  std::string name() const override { return inner_->name(); }
  Vector initial_state() const override { return inner_->initial_state(); }

  long count() const { return count_.load(); }
  void reset() { count_.store(0); }

 protected:
  void step_unchecked(const Vector& x, const Vector& u, Vector& next) const override;

 private:
  std::shared_ptr<const DynamicsModel> inner_;
  mutable std::atomic<long> count_{0};
};

bool all_finite(const Vector& v);

enum class DifferenceScheme { kForward, kCentral };

struct FiniteDifferenceOptions {
  double eps_state = 1e-6;
  double eps_control = 1e-6;
  DifferenceScheme scheme = DifferenceScheme::kForward;
};

// Reduced Jacobians for one timestep. eval_count counts perturbed dynamics
// evaluations only; the shared nominal step is excluded.
struct LinearizedDynamics {
  Matrix a;  // 2|C| x 2|C|
  Matrix b;  // 2|C| x m
  long eval_count = 0;
};

// Differences the full model around (x, u) along the reduced coordinates of
// `set`. Unperturbed DoFs stay at their nominal values and every evaluation
// steps the full model. `nominal_next` may supply f(x, u) when the caller
// already has it (e.g. from the nominal rollout).
LinearizedDynamics linearize_reduced(const DynamicsModel& model, const Vector& x,
                                     const Vector& u, const DofSet& set,
                                     const FiniteDifferenceOptions& options = {},
                                     const Vector* nominal_next = nullptr);

}  // namespace svr

#endif  // SVR_DYNAMICS_HPP_
