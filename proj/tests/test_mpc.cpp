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

#include "oracles.hpp"
#include "svr/mpc.hpp"
#include "svr/task.hpp"

namespace svr {
namespace {

Vector v1(double a) { return (Vector(1) << a).finished(); }

MpcTask lti_task(double dt = 0.05) {
  MpcTask task;
  task.model = testing::make_lti(dt);
  task.cost = testing::make_quadratic_cost(4, 2);
  task.x0 = (Vector(4) << 1.0, -0.5, 0.0, 0.0).finished();
  return task;
}

MpcConfig lti_config(double cost_per_eval, double dt = 0.05) {
  MpcConfig c;
  c.horizon = 20;
  c.timestep = dt;
  c.timeout = 120;
  c.virtual_cost_per_eval = cost_per_eval;
  return c;
}

TEST(AgentTick, PadsWithLastControl) {
  auto model = std::make_shared<LinearModel>(Matrix::Identity(2, 2), Matrix::Ones(2, 1), 1);
  std::vector<Vector> plan{v1(1.0), v1(2.0)};
  const AgentTick r = agent_tick(*model, plan, Vector::Zero(2));
  EXPECT_EQ(r.control, v1(1.0));
  EXPECT_EQ(plan, (std::vector<Vector>{v1(2.0), v1(2.0)}));
  EXPECT_EQ(r.state, Vector::Ones(2));

  std::vector<Vector> flat(3, v1(0.5));
  const auto before = flat;
  agent_tick(*model, flat, Vector::Zero(2));
  EXPECT_EQ(flat, before);

  std::vector<Vector> empty;
  EXPECT_THROW(agent_tick(*model, empty, Vector::Zero(2)), InvalidArgument);
}

TEST(AgentTick, OpenLoopExecutionMatchesPaddedPlan) {
  auto model = std::make_shared<LinearModel>(Matrix::Identity(2, 2), Matrix::Ones(2, 1), 1);
  std::vector<Vector> plan{v1(1.0), v1(-1.0), v1(3.0)};
  const auto initial = plan;
  Vector x = Vector::Zero(2);
  double sum = 0.0;
  for (int t = 0; t < 10; ++t) {
    const AgentTick r = agent_tick(*model, plan, x);
    const Vector& expected = initial[static_cast<std::size_t>(std::min(t, 2))];
    EXPECT_EQ(r.control, expected);
    sum += expected[0];
    x = r.state;
  }
  EXPECT_EQ(x[0], sum);
}

TEST(RealignPlan, DropsConsumedControls) {
  const std::vector<Vector> plan{v1(1), v1(2), v1(3), v1(4)};
  EXPECT_EQ(realign_plan(plan, 0, 4), plan);
  EXPECT_EQ(realign_plan(plan, 2, 4), (std::vector<Vector>{v1(3), v1(4), v1(4), v1(4)}));
  EXPECT_EQ(realign_plan(plan, 9, 3), (std::vector<Vector>{v1(4), v1(4), v1(4)}));
}

TEST(VirtualTickCost, RoundsUpAfterSlowdown) {
  MpcConfig c;
  c.virtual_cost_per_eval = 0.01;
  c.slowdown = 1;
  EXPECT_EQ(virtual_tick_cost(c, 250), 3);
  EXPECT_EQ(virtual_tick_cost(c, 300), 3);
  c.slowdown = 3;
  EXPECT_EQ(virtual_tick_cost(c, 300), 1);
  c.virtual_cost_per_eval = 0.0;
  EXPECT_EQ(virtual_tick_cost(c, 100000), 0);
}

TEST(MpcConfig, Validation) {
  MpcConfig c;
  EXPECT_NO_THROW(c.validate());
  c.slowdown = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c.slowdown = 1;
  c.virtual_cost_per_eval = -1.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  EXPECT_THROW(run_mpc(lti_config(0.0, 0.01), lti_task()), InvalidArgument);
}

TEST(RunMpc, VirtualRecordIsConsistent) {
  const MpcTask task = lti_task();
  const MpcConfig config = lti_config(0.02);
  const MpcRecord rec = run_mpc(config, task);
  ASSERT_EQ(rec.steps(), config.timeout);
  ASSERT_EQ(rec.states.size(), rec.controls.size() + 1);

  // Re-simulating the executed controls reproduces the states exactly.
  Vector x = task.x0;
  EXPECT_EQ(rec.states[0], x);
  for (std::size_t t = 0; t < rec.controls.size(); ++t) {
    x = task.model->step(x, rec.controls[t]);
    ASSERT_EQ(rec.states[t + 1], x) << "t=" << t;
  }

  // Independent re-summation of the executed cost.
  double total = 0.0;
  const Vector& w = task.cost.state_weights;
  for (std::size_t t = 0; t < rec.controls.size(); ++t) {
    total += (rec.states[t].array().square() * w.array()).sum() +
             (rec.controls[t].array().square() * task.cost.control_weights.array()).sum();
  }
  total += (rec.states.back().array().square() * task.cost.terminal_weights.array()).sum();
  EXPECT_NEAR(rec.mpc_cost, total, 1e-10 * total);

  // Lag accounting.
  ASSERT_FALSE(rec.iterations.empty());
  for (const IterationLog& it : rec.iterations) {
    EXPECT_EQ(it.tick_cost, virtual_tick_cost(config, it.stats.dynamics_evals));
    if (it.published) {
      EXPECT_EQ(it.publish_step - it.snapshot_step, it.tick_cost);
    }
    EXPECT_GE(it.dofs_after, task.model->layout().robot_dofs());
  }
}

TEST(RunMpc, VirtualModeIsDeterministic) {
  TaskConfig config = builtin_task("clutter");
  config.mpc.timeout = 150;
  config.mpc.horizon = 40;
  for (const MethodSpec& m : {MethodSpec{Method::kSvrSum, 10, 1.0}, MethodSpec{Method::kRandom, 5, 0.0}}) {
    const MpcTask task = build_task(config, 4);
    const MpcConfig mc = build_mpc_config(config, m, 4);
    const MpcRecord a = run_mpc(mc, task);
    const MpcRecord b = run_mpc(mc, task);
    EXPECT_EQ(a.states, b.states);
    EXPECT_EQ(a.controls, b.controls);
    EXPECT_EQ(a.mpc_cost, b.mpc_cost);
    ASSERT_EQ(a.iterations.size(), b.iterations.size());
    for (std::size_t i = 0; i < a.iterations.size(); ++i) {
      EXPECT_EQ(a.iterations[i].added, b.iterations[i].added);
      EXPECT_EQ(a.iterations[i].removed, b.iterations[i].removed);
    }
  }
}

TEST(RunMpc, ZeroLagIsNoWorseOnLti) {
  const MpcTask task = lti_task();
  const double no_lag = run_mpc(lti_config(0.0), task).mpc_cost;
  for (double cpe : {0.005, 0.01, 0.02, 0.05}) {
    EXPECT_LE(no_lag, run_mpc(lti_config(cpe), task).mpc_cost) << "cost per eval " << cpe;
  }
}

TEST(RunMpc, DivergenceIsFlagged) {
  MpcTask task;
  task.model = std::make_shared<LinearModel>(Matrix::Identity(2, 2) * 1e200, Matrix::Zero(2, 1), 1, 0.05);
  task.cost = testing::make_quadratic_cost(2, 1);
  task.x0 = Vector::Ones(2);
  MpcConfig config = lti_config(0.0);
  config.horizon = 3;
  const MpcRecord rec = run_mpc(config, task);
  EXPECT_TRUE(rec.diverged);
  EXPECT_LT(rec.steps(), config.timeout);
}

TEST(RunMpc, SuccessStopsEarly) {
  MpcTask task = lti_task();
  task.success = SuccessPredicate{{0}, 0.0, 0.0, 0.05, 5};
  const MpcRecord rec = run_mpc(lti_config(0.0), task);
  ASSERT_TRUE(rec.success);
  ASSERT_TRUE(rec.success_step);
  EXPECT_EQ(*rec.success_step, rec.steps());
  EXPECT_LT(rec.steps(), 120);
  for (int t = rec.steps() - 4; t <= rec.steps(); ++t) {
    EXPECT_TRUE(task.success->inside(rec.states[static_cast<std::size_t>(t)]));
  }
}

TEST(Planner, BaselineKeepsTheFullSet) {
  const MpcTask task = build_task(builtin_task("clutter"), 0);
  MpcConfig config;
  config.horizon = 30;
  Planner planner(config, task.model, task.cost);
  std::vector<Vector> u(30, Vector::Zero(2));
  for (int i = 0; i < 3; ++i) {
    const auto out = planner.iterate(task.x0, u, 0);
    EXPECT_TRUE(planner.current_set().is_full());
    EXPECT_EQ(out.log.dofs_after, 26);
    u = out.controls;
  }
}

TEST(Planner, HugeThresholdKeepsOnlyTheRobot) {
  const MpcTask task = build_task(builtin_task("clutter"), 0);
  MpcConfig config;
  config.horizon = 30;
  config.policy = {Method::kSvrSum, 0, 1e12};
  Planner planner(config, task.model, task.cost);
  const auto out = planner.iterate(task.x0, std::vector<Vector>(30, Vector::Zero(2)), 0);
  EXPECT_EQ(out.log.dofs_optimised, 26);
  EXPECT_EQ(planner.current_set().members(), (std::vector<int>{0, 1}));
}

TEST(Planner, RemovesTheUnreachableDisc) {
  TaskConfig tc = builtin_task("clutter");
  tc.model.unreachable_disc = true;
  const MpcTask task = build_task(tc, 2);
  const auto& world = dynamic_cast<const PlanarWorld&>(*task.model);
  const int far = world.disc_dof(world.num_discs() - 1);
  for (Method method : {Method::kSvrSum, Method::kSvrSvd}) {
    MpcConfig config;
    config.policy = {method, 10, 1e-6};
    Planner planner(config, task.model, task.cost);
    const auto out = planner.iterate(task.x0, std::vector<Vector>(80, Vector::Zero(2)), 0);
    // Oracle: every gain column of the corner disc is zero.
    const DofSet& used = out.gains.dofset;
    for (int d = far; d < far + 3; ++d) {
      const int j = used.rank(d);
      double score = 0.0;
      for (const Matrix& k : out.gains.big_k) score += k.col(j).cwiseAbs().sum() + k.col(j + used.size()).cwiseAbs().sum();
      EXPECT_EQ(score, 0.0);
      EXPECT_FALSE(planner.current_set().contains(d)) << method_name(method);
    }
  }
}

TEST(RunMpc, ReductionCutsTicksPerPlan) {
  TaskConfig tc = builtin_task("clutter");
  tc.mpc.timeout = 400;
  double base = 0.0;
  double svr = 0.0;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const MpcTask task = build_task(tc, seed);
    base += run_mpc(build_mpc_config(tc, {Method::kBaselineFull}, seed), task).mean_tick_cost();
    svr += run_mpc(build_mpc_config(tc, {Method::kSvrSum, 10, 1.0}, seed), task).mean_tick_cost();
  }
  EXPECT_LT(svr, base);
}

TEST(RunMpc, RealAsyncSmoke) {
  const double dt = 0.005;
  const MpcTask task = lti_task(dt);
  MpcConfig config = lti_config(0.0, dt);
  config.mode = MpcMode::kRealAsync;
  config.timeout = 100;
  const MpcRecord rec = run_mpc(config, task);
  ASSERT_EQ(rec.steps(), 100);
  Vector x = task.x0;
  for (std::size_t t = 0; t < rec.controls.size(); ++t) {
    x = task.model->step(x, rec.controls[t]);
    ASSERT_EQ(rec.states[t + 1], x);
  }
  ASSERT_FALSE(rec.iterations.empty());
  for (const IterationLog& it : rec.iterations) {
    EXPECT_EQ(it.publish_step - it.snapshot_step, it.tick_cost);
    EXPECT_GE(it.tick_cost, 0);
  }
  EXPECT_LT(rec.mpc_cost, run_mpc(lti_config(0.0, dt), lti_task(dt)).mpc_cost * 10.0);
}

}  // namespace
}  // namespace svr
