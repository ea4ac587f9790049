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

#ifndef SVR_STATESPACE_HPP_
#define SVR_STATESPACE_HPP_

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace svr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Thrown for dimension mismatches and malformed arguments throughout the
// library. The C API maps it to SVR_ERR_INVALID_ARGUMENT.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Non-finite values or a failed factorisation.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Component { kPosition, kVelocity };

struct Body {
  std::string name;
  int dof_count = 0;
};

// The DoF universe of a system: `robot_dofs` actuated robot coordinates
// followed by the coordinates of each body, in order. Full states are laid
// out as [positions(F); velocities(F)].
class DofLayout {
 public:
  DofLayout(int robot_dofs, std::vector<Body> bodies);

  int robot_dofs() const { return robot_dofs_; }
  int total() const { return total_; }
  int state_size() const { return 2 * total_; }
  const std::vector<Body>& bodies() const { return bodies_; }

  // Index of the first DoF belonging to bodies()[body].
  int body_offset(std::size_t body) const { return offsets_.at(body); }
  // Body owning `dof`, or -1 for robot DoFs.
  int body_of(int dof) const;

  bool is_robot(int dof) const { return dof >= 0 && dof < robot_dofs_; }
  bool contains(int dof) const { return dof >= 0 && dof < total_; }

  // Whether the DoF carries a nonzero running or terminal weight. Empty mask
  // means "unknown"; in_cost() then reports false for every DoF.
  bool in_cost(int dof) const;
  const std::vector<bool>& cost_mask() const { return in_cost_; }
  DofLayout with_cost_mask(std::vector<bool> mask) const;

 private:
  int robot_dofs_ = 0;
  int total_ = 0;
  std::vector<Body> bodies_;
  std::vector<int> offsets_;
  std::vector<bool> in_cost_;
};

int total_dofs(const DofLayout& layout);

// The reduced DoF set C. Members are unique, sorted ascending and always
// include every robot DoF of the layout.
class DofSet {
 public:
  DofSet(std::shared_ptr<const DofLayout> layout, std::vector<int> members);

  static DofSet full(std::shared_ptr<const DofLayout> layout);
  static DofSet robot_only(std::shared_ptr<const DofLayout> layout);

  const DofLayout& layout() const { return *layout_; }
  const std::shared_ptr<const DofLayout>& layout_ptr() const { return layout_; }
  const std::vector<int>& members() const { return members_; }
  int size() const { return static_cast<int>(members_.size()); }
  bool contains(int dof) const;
  bool is_full() const { return size() == layout_->total(); }

  // L = F \ C, ascending.
  std::vector<int> complement() const;

  DofSet with_added(std::span<const int> dofs) const;
  DofSet with_removed(std::span<const int> dofs) const;

  // Rank of `dof` in the member list; throws if absent.
  int rank(int dof) const;

  // Index into the full state vector of reduced coordinate `j` (0..2|C|-1).
  int full_index(int j) const;

  bool operator==(const DofSet& other) const { return members_ == other.members_; }

 private:
  std::shared_ptr<const DofLayout> layout_;
  std::vector<int> members_;
  std::vector<int> rank_of_;  // size |F|, -1 when absent
};

// Positions then velocities of the DoFs in `set`, in member order.
Vector gather(const Vector& state, const DofSet& set);

int reduced_index(const DofSet& set, int dof, Component kind);

}  // namespace svr

#endif  // SVR_STATESPACE_HPP_
