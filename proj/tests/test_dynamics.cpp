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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "svr/dynamics.hpp"
#include "svr/models.hpp"

namespace svr {
namespace {

Matrix restrict(const Matrix& dense, const DofSet& set, bool cols_too) {
  const int n = 2 * set.size();
  Matrix out(n, cols_too ? n : dense.cols());
  for (int i = 0; i < n; ++i) {
    if (cols_too) {
      for (int j = 0; j < n; ++j) out(i, j) = dense(set.full_index(i), set.full_index(j));
    } else {
      out.row(i) = dense.row(set.full_index(i));
    }
  }
  return out;
}

TEST(Linearize, RecoversLtiJacobians) {
  const auto model = testing::make_lti();
  const Vector x = (Vector(4) << 0.3, -0.2, 0.1, 0.05).finished();
  const Vector u = (Vector(2) << 0.4, -1.0).finished();
  const DofSet full = DofSet::full(model->layout_ptr());
  for (DifferenceScheme scheme : {DifferenceScheme::kForward, DifferenceScheme::kCentral}) {
    FiniteDifferenceOptions opts;
    opts.scheme = scheme;
    const LinearizedDynamics lin = linearize_reduced(*model, x, u, full, opts);
    EXPECT_LT((lin.a - model->a()).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LT((lin.b - model->b()).cwiseAbs().maxCoeff(), 1e-6);
  }
  const DofSet robot = DofSet::robot_only(model->layout_ptr());
  const LinearizedDynamics lin = linearize_reduced(*model, x, u, robot);
  Matrix expect_a(2, 2);
  expect_a << model->a()(0, 0), model->a()(0, 2), model->a()(2, 0), model->a()(2, 2);
  EXPECT_LT((lin.a - expect_a).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT((lin.b.row(1) - model->b().row(2)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Linearize, EvaluationCounts) {
  auto inner = testing::make_lti();
  auto counting = std::make_shared<CountingModel>(inner);
  const Vector x = Vector::Constant(4, 0.1);
  const Vector u = Vector::Constant(2, 0.2);
  const Vector next = counting->step(x, u);
  counting->reset();
  const DofSet robot = DofSet::robot_only(counting->layout_ptr());

  LinearizedDynamics lin = linearize_reduced(*counting, x, u, robot, {}, &next);
  EXPECT_EQ(lin.eval_count, 2 * 1 + 2);
  EXPECT_EQ(counting->count(), lin.eval_count);

  counting->reset();
  FiniteDifferenceOptions central;
  central.scheme = DifferenceScheme::kCentral;
  lin = linearize_reduced(*counting, x, u, DofSet::full(counting->layout_ptr()), central);
  EXPECT_EQ(lin.eval_count, 2 * (4 + 2));
  EXPECT_EQ(counting->count(), lin.eval_count);
}

TEST(Linearize, RejectsForeignSets) {
  const auto model = testing::make_lti();
  auto other = std::make_shared<const DofLayout>(1, std::vector<Body>{{"a", 3}});
  EXPECT_THROW(linearize_reduced(*model, Vector::Zero(4), Vector::Zero(2), DofSet::full(other)),
               InvalidArgument);
  FiniteDifferenceOptions bad;
  bad.eps_state = 0.0;
  EXPECT_THROW(linearize_reduced(*model, Vector::Zero(4), Vector::Zero(2), DofSet::full(model->layout_ptr()), bad),
               InvalidArgument);
}

TEST(Linearize, ClutterReducedColumnsMatchDenseDifferencing) {
  ClutterParams params;
  const auto model = make_clutter_model(params, 3);
  // A state with the pusher pressed into the goal disc so contact terms are live.
  Vector x = model->initial_state();
  const int goal = model->disc_dof(0);
  const Vector toward = (Vector(2) << x[goal] - x[0], x[goal + 1] - x[1]).finished().normalized();
  x[0] += 0.02 * toward[0];
  x[1] += 0.02 * toward[1];
  x[model->layout().total() + 0] = 0.05;
  const Vector u = (Vector(2) << 1.0, -0.5).finished();
  const testing::DenseJacobians dense = testing::dense_jacobians(*model, x, u);

  const std::vector<std::vector<int>> subsets = {
      {0, 1}, {0, 1, goal, goal + 1}, {0, 1, goal, goal + 2, model->disc_dof(3) + 1}};
  for (const auto& members : subsets) {
    const DofSet set(model->layout_ptr(), members);
    const Vector next = model->step(x, u);
    const LinearizedDynamics lin = linearize_reduced(*model, x, u, set, {}, &next);
    EXPECT_LE((lin.a - restrict(dense.a, set, true)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((lin.b - restrict(dense.b, set, false)).cwiseAbs().maxCoeff(), 1e-10);
  }
  // The contact couples pusher and goal, so the cross block is nonzero.
  EXPECT_GT(std::abs(dense.a(model->layout().total() + goal, 0)), 1.0);
}

TEST(Step, ValidatesInput) {
  const auto model = testing::make_lti();
  EXPECT_THROW(model->step(Vector::Zero(3), Vector::Zero(2)), InvalidArgument);
  EXPECT_THROW(model->step(Vector::Zero(4), Vector::Zero(1)), InvalidArgument);
  Vector x = Vector::Zero(4);
  x[1] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(model->step(x, Vector::Zero(2)), NumericalError);
}

}  // namespace
}  // namespace svr
