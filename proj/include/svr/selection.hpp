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

#ifndef SVR_SELECTION_HPP_
#define SVR_SELECTION_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "svr/cost.hpp"
#include "svr/optimizer.hpp"
#include "svr/random.hpp"
#include "svr/statespace.hpp"

namespace svr {

enum class Method { kBaselineFull, kRandom, kNaive, kSvrSum, kSvrSvd };

std::string_view method_name(Method method);
// Accepts "baseline-full", "random", "naive", "svr-sum", "svr-svd".
std::optional<Method> parse_method(std::string_view name);

struct SelectionPolicy {
  Method method = Method::kBaselineFull;
  int theta = 10;   // DoFs reintroduced per iteration (random: DoFs sampled)
  double rho = 1.0;  // removal threshold
  int g = 3;        // singular values used by svr-svd
  std::uint64_t seed = 0;
  // Literal signed sums instead of absolute values.
  bool signed_importance = false;

  void validate() const;
  bool reduces_online() const { return method == Method::kSvrSum || method == Method::kSvrSvd; }
};

// One score per member of `dofs` (the set the gains were computed on).
struct ImportanceScores {
  std::vector<int> dofs;
  Vector values;
};

// score[j] = sum_t sum_p (|K_t(p, j)| + |K_t(p, j + |C|)|) / T
ImportanceScores importance_sum(const GainSchedule& gains, bool signed_importance = false);

// score[j] = sum_t sum_{n<g} |V_t(j, n) + V_t(j + |C|, n)| sigma_n / T, with g
// clamped to min(m, 2|C|). Returns nullopt if a decomposition is not finite.
std::optional<ImportanceScores> importance_svd(const GainSchedule& gains, int g,
                                               bool signed_importance = false);

// Non-robot DoFs scoring strictly below rho.
std::vector<int> identify_dofs_to_remove(const ImportanceScores& scores, const SelectionPolicy& policy,
                                         const DofLayout& layout);

// Uniform sample without replacement of min(theta, |unused|) DoFs, ascending.
std::vector<int> identify_dofs_to_add(std::span<const int> unused, int theta, Rng& rng);

// Starting set: F for baseline/svr, robot + costed DoFs for naive, robot +
// theta random DoFs for random.
DofSet initial_set(const SelectionPolicy& policy, std::shared_ptr<const DofLayout> layout,
                   const CostSpec& spec, Rng& rng);

// Fraction of each body's DoFs currently in the reduced set.
std::vector<double> body_coverage(const DofSet& set);

}  // namespace svr

#endif  // SVR_SELECTION_HPP_
