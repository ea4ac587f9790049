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

#include <random>

#include "oracles.hpp"
#include "svr/cost.hpp"

namespace svr {
namespace {

Vector random_vector(std::mt19937_64& gen, int n, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = d(gen);
  return v;
}

CostSpec random_spec(std::mt19937_64& gen, int n, int m, std::size_t targets = 1) {
  CostSpec c;
  c.state_weights = random_vector(gen, n, 0.0, 2.0);
  c.control_weights = random_vector(gen, m, 0.0, 2.0);
  c.terminal_weights = random_vector(gen, n, 0.0, 2.0);
  for (std::size_t t = 0; t < targets; ++t) c.desired.push_back(random_vector(gen, n));
  return c;
}

// Dense triple loop over an explicit diagonal matrix.
double dense_quadratic(const Vector& d, const Vector& w) {
  double total = 0.0;
  for (int i = 0; i < d.size(); ++i) {
    for (int j = 0; j < d.size(); ++j) total += d[i] * (i == j ? w[i] : 0.0) * d[j];
  }
  return total;
}

TEST(Cost, RunningCostTrivialCases) {
  CostSpec c;
  c.state_weights = Vector::Ones(4);
  c.control_weights = Vector::Zero(1);
  c.terminal_weights = Vector::Ones(4);
  c.desired = {Vector::Zero(4)};
  EXPECT_EQ(running_cost(c, Vector::Zero(4), Vector::Zero(1), 0), 0.0);
  Vector e = Vector::Zero(4);
  e[2] = 1.0;
  EXPECT_EQ(running_cost(c, e, Vector::Ones(1), 0), 1.0);
}

TEST(Cost, RunningCostMatchesDenseOracle) {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 20; ++trial) {
    const CostSpec c = random_spec(gen, 6, 2);
    const Vector x = random_vector(gen, 6);
    const Vector u = random_vector(gen, 2);
    const double expected = dense_quadratic(x - c.desired[0], c.state_weights) +
                            dense_quadratic(u, c.control_weights);
    EXPECT_NEAR(running_cost(c, x, u, 0), expected, 1e-12);
  }
}

TEST(Cost, TrajectoryCostMatchesDirectSummation) {
  std::mt19937_64 gen(5);
  const int n = 6;
  const CostSpec c = random_spec(gen, n, 2, 4);  // shorter than T: last target held
  std::vector<Vector> xs;
  std::vector<Vector> us;
  for (int t = 0; t < 5; ++t) {
    xs.push_back(random_vector(gen, n));
    us.push_back(random_vector(gen, 2));
  }
  xs.push_back(random_vector(gen, n));
  double expected = 0.0;
  for (int t = 0; t < 5; ++t) {
    const Vector& target = c.desired[static_cast<std::size_t>(std::min(t, 3))];
    expected += dense_quadratic(xs[static_cast<std::size_t>(t)] - target, c.state_weights) +
                dense_quadratic(us[static_cast<std::size_t>(t)], c.control_weights);
  }
  expected += dense_quadratic(xs.back() - c.desired[3], c.terminal_weights);
  EXPECT_NEAR(trajectory_cost(c, xs, us), expected, 1e-12);
  EXPECT_NEAR(mpc_cost(c, xs, us), expected, 1e-12);

  us.pop_back();
  EXPECT_THROW(trajectory_cost(c, xs, us), InvalidArgument);
  EXPECT_THROW(mpc_cost(c, xs, us), InvalidArgument);
}

TEST(Cost, TerminalOnlyDeviation) {
  CostSpec c;
  c.state_weights = Vector::Zero(4);
  c.control_weights = Vector::Zero(1);
  c.terminal_weights = Vector::Ones(4);
  c.desired = {Vector::Zero(4)};
  const Vector d = (Vector(4) << 0.5, -1.0, 2.0, 0.0).finished();
  EXPECT_DOUBLE_EQ(trajectory_cost(c, {Vector::Zero(4), d}, {Vector::Zero(1)}), d.dot(d));
  EXPECT_DOUBLE_EQ(mpc_cost(c, {Vector::Zero(4), d}, {Vector::Zero(1)}), d.dot(d));
}

TEST(Cost, ExpansionMatchesNumericalDerivatives) {
  auto layout = std::make_shared<const DofLayout>(1, std::vector<Body>{{"a", 2}, {"b", 1}});
  std::mt19937_64 gen(9);
  const CostSpec c = random_spec(gen, 8, 2);
  const Vector x = random_vector(gen, 8);
  const Vector u = random_vector(gen, 2);
  const DofSet set(layout, {0, 2});
  const CostExpansion e = expansion_reduced(c, x, u, 0, set);
  ASSERT_EQ(e.l_x.size(), 4);
  const double h = 1e-5;
  for (int j = 0; j < 4; ++j) {
    const int i = set.full_index(j);
    Vector xp = x;
    Vector xm = x;
    xp[i] += h;
    xm[i] -= h;
    const double g = (running_cost(c, xp, u, 0) - running_cost(c, xm, u, 0)) / (2 * h);
    EXPECT_NEAR(e.l_x[j], g, 1e-6);
    const double hess = (running_cost(c, xp, u, 0) - 2 * running_cost(c, x, u, 0) +
                         running_cost(c, xm, u, 0)) / (h * h);
    EXPECT_NEAR(e.l_xx(j, j), hess, 1e-3);
    EXPECT_EQ(e.l_xx(j, j), 2.0 * c.state_weights[i]);
  }
  EXPECT_TRUE(e.l_xx.isDiagonal());
  for (int p = 0; p < 2; ++p) {
    Vector up = u;
    Vector um = u;
    up[p] += h;
    um[p] -= h;
    EXPECT_NEAR(e.l_u[p], (running_cost(c, x, up, 0) - running_cost(c, x, um, 0)) / (2 * h), 1e-6);
  }
  EXPECT_TRUE(e.l_uu.isApprox(Matrix((2.0 * c.control_weights).asDiagonal())));

  const CostExpansion at_target = expansion_reduced(c, c.desired[0], u, 0, set);
  EXPECT_EQ(at_target.l_x.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Cost, FullSetExpansionEqualsDenseExpansion) {
  auto layout = std::make_shared<const DofLayout>(1, std::vector<Body>{{"a", 2}});
  std::mt19937_64 gen(2);
  const CostSpec c = random_spec(gen, 6, 1);
  const Vector x = random_vector(gen, 6);
  const CostExpansion e = expansion_reduced(c, x, Vector::Ones(1), 0, DofSet::full(layout));
  for (int i = 0; i < 6; ++i) {
    EXPECT_EQ(e.l_x[i], 2.0 * c.state_weights[i] * (x[i] - c.desired[0][i]));
  }
  const CostExpansion t = terminal_expansion_reduced(c, x, 0, DofSet::full(layout));
  for (int i = 0; i < 6; ++i) EXPECT_EQ(t.l_xx(i, i), 2.0 * c.terminal_weights[i]);
}

// The expansion of a quadratic is exact: l(x + d) - l(x) = l_x'd + d'l_xx d / 2.
TEST(Cost, QuadraticExpansionIsExact) {
  auto layout = std::make_shared<const DofLayout>(1, std::vector<Body>{{"a", 2}});
  std::mt19937_64 gen(4);
  const CostSpec c = random_spec(gen, 6, 1);
  const Vector x = random_vector(gen, 6);
  const Vector u = random_vector(gen, 1);
  const Vector d = random_vector(gen, 6);
  const CostExpansion e = expansion_reduced(c, x, u, 0, DofSet::full(layout));
  const double predicted = e.l_x.dot(d) + 0.5 * d.dot(e.l_xx * d);
  EXPECT_NEAR(running_cost(c, x + d, u, 0) - running_cost(c, x, u, 0), predicted, 1e-13);
}

TEST(Cost, NonNegativeAndValidated) {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 50; ++trial) {
    const CostSpec c = random_spec(gen, 4, 1);
    EXPECT_GE(running_cost(c, random_vector(gen, 4, -5, 5), random_vector(gen, 1), 0), 0.0);
  }
  CostSpec bad = random_spec(gen, 4, 1);
  EXPECT_NO_THROW(bad.validate(4, 1));
  EXPECT_THROW(bad.validate(6, 1), InvalidArgument);
  bad.state_weights[1] = -1.0;
  EXPECT_THROW(bad.validate(4, 1), InvalidArgument);
}

TEST(Cost, MaskFollowsWeights) {
  DofLayout layout(1, {{"a", 2}});
  CostSpec c;
  c.state_weights = Vector::Zero(6);
  c.terminal_weights = Vector::Zero(6);
  c.state_weights[4] = 1.0;  // velocity of DoF 1
  c.terminal_weights[2] = 1.0;
  const std::vector<bool> mask = cost_mask(c, layout);
  EXPECT_EQ(mask, (std::vector<bool>{false, true, true}));
}

}  // namespace
}  // namespace svr
