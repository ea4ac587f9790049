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

#include "svr/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/SVD>

namespace svr {

std::string_view method_name(Method method) {
  switch (method) {
    case Method::kBaselineFull: return "baseline-full";
    case Method::kRandom: return "random";
    case Method::kNaive: return "naive";
    case Method::kSvrSum: return "svr-sum";
    case Method::kSvrSvd: return "svr-svd";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
  for (Method m : {Method::kBaselineFull, Method::kRandom, Method::kNaive, Method::kSvrSum,
                   Method::kSvrSvd}) {
    if (method_name(m) == name) return m;
  }
  return std::nullopt;
}

void SelectionPolicy::validate() const {
  if (theta < 0) throw InvalidArgument("theta must be >= 0");
  if (g < 1) throw InvalidArgument("g must be >= 1");
  if (!(rho >= 0.0)) throw InvalidArgument("rho must be >= 0");
}

ImportanceScores importance_sum(const GainSchedule& gains, bool signed_importance) {
  const int c = gains.dofset.size();
  ImportanceScores scores{gains.dofset.members(), Vector::Zero(c)};
  const std::size_t horizon = gains.horizon();
  if (horizon == 0) return scores;
  for (const Matrix& k : gains.big_k) {
    if (signed_importance) {
      scores.values += (k.leftCols(c) + k.rightCols(c)).colwise().sum().transpose();
    } else {
      scores.values += (k.leftCols(c).cwiseAbs() + k.rightCols(c).cwiseAbs()).colwise().sum().transpose();
    }
  }
  scores.values /= static_cast<double>(horizon);
  return scores;
}

std::optional<ImportanceScores> importance_svd(const GainSchedule& gains, int g, bool signed_importance) {
  const int c = gains.dofset.size();
  ImportanceScores scores{gains.dofset.members(), Vector::Zero(c)};
  const std::size_t horizon = gains.horizon();
  if (horizon == 0) return scores;
  for (const Matrix& k : gains.big_k) {
    const int used = std::min<int>({g, static_cast<int>(k.rows()), 2 * c});
    Eigen::JacobiSVD<Matrix> svd(k, Eigen::ComputeThinV);
    const Vector& sigma = svd.singularValues();
    Matrix v = svd.matrixV();
    if (!sigma.allFinite() || !v.allFinite()) return std::nullopt;
    for (int n = 0; n < used; ++n) {
      // Fix the sign ambiguity: largest-magnitude component positive.
      Eigen::Index arg = 0;
      v.col(n).cwiseAbs().maxCoeff(&arg);
      if (v(arg, n) < 0.0) v.col(n) = -v.col(n);
      const Vector pair = v.col(n).head(c) + v.col(n).tail(c);
      scores.values += (signed_importance ? pair : pair.cwiseAbs()) * sigma[n];
    }
  }
  scores.values /= static_cast<double>(horizon);
  return scores;
}

std::vector<int> identify_dofs_to_remove(const ImportanceScores& scores, const SelectionPolicy& policy,
                                         const DofLayout& layout) {
  std::vector<int> out;
  for (std::size_t j = 0; j < scores.dofs.size(); ++j) {
    const int dof = scores.dofs[j];
    if (layout.is_robot(dof)) continue;
    if (scores.values[static_cast<Eigen::Index>(j)] < policy.rho) out.push_back(dof);
  }
  return out;
}

std::vector<int> identify_dofs_to_add(std::span<const int> unused, int theta, Rng& rng) {
  std::vector<int> pool(unused.begin(), unused.end());
  const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(std::max(theta, 0)), pool.size());
  // partial Fisher-Yates
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(take);
  std::sort(pool.begin(), pool.end());
  return pool;
}

DofSet initial_set(const SelectionPolicy& policy, std::shared_ptr<const DofLayout> layout,
                   const CostSpec& spec, Rng& rng) {
  switch (policy.method) {
    case Method::kBaselineFull:
    case Method::kSvrSum:
    case Method::kSvrSvd:
      return DofSet::full(std::move(layout));
    case Method::kNaive: {
      const std::vector<bool> mask = cost_mask(spec, *layout);
      std::vector<int> members;
      for (int dof = 0; dof < layout->total(); ++dof) {
        if (layout->is_robot(dof) || mask[static_cast<std::size_t>(dof)]) members.push_back(dof);
      }
      return DofSet(std::move(layout), std::move(members));
    }
    case Method::kRandom: {
      DofSet robot = DofSet::robot_only(layout);
      const std::vector<int> unused = robot.complement();
      return robot.with_added(identify_dofs_to_add(unused, policy.theta, rng));
    }
  }
  throw InvalidArgument("unknown selection method");
}

std::vector<double> body_coverage(const DofSet& set) {
  const DofLayout& layout = set.layout();
  std::vector<double> out;
  out.reserve(layout.bodies().size());
  for (std::size_t b = 0; b < layout.bodies().size(); ++b) {
    const int first = layout.body_offset(b);
    const int count = layout.bodies()[b].dof_count;
    int in = 0;
    for (int d = first; d < first + count; ++d) in += set.contains(d) ? 1 : 0;
    out.push_back(static_cast<double>(in) / count);
  }
  return out;
}

}  // namespace svr
