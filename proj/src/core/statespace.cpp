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

#include "svr/statespace.hpp"

#include <algorithm>
#include <string>
#include <utility>

namespace svr {

DofLayout::DofLayout(int robot_dofs, std::vector<Body> bodies)
    : robot_dofs_(robot_dofs), bodies_(std::move(bodies)) {
  if (robot_dofs_ < 0) throw InvalidArgument("robot DoF count must be >= 0");
  total_ = robot_dofs_;
  offsets_.reserve(bodies_.size());
  for (const Body& body : bodies_) {
    if (body.dof_count <= 0) {
      throw InvalidArgument("body '" + body.name + "' must have at least one DoF");
    }
    offsets_.push_back(total_);
    total_ += body.dof_count;
  }
}

int DofLayout::body_of(int dof) const {
  if (!contains(dof)) throw InvalidArgument("DoF " + std::to_string(dof) + " outside layout");
  if (is_robot(dof)) return -1;
  auto it = std::upper_bound(offsets_.begin(), offsets_.end(), dof);
  return static_cast<int>(it - offsets_.begin()) - 1;
}

bool DofLayout::in_cost(int dof) const {
  if (in_cost_.empty()) return false;
  return in_cost_.at(static_cast<std::size_t>(dof));
}

DofLayout DofLayout::with_cost_mask(std::vector<bool> mask) const {
  if (static_cast<int>(mask.size()) != total_) {
    throw InvalidArgument("cost mask length must equal |F|");
  }
  DofLayout copy = *this;
  copy.in_cost_ = std::move(mask);
  return copy;
}

int total_dofs(const DofLayout& layout) { return layout.total(); }

DofSet::DofSet(std::shared_ptr<const DofLayout> layout, std::vector<int> members)
    : layout_(std::move(layout)), members_(std::move(members)) {
  if (!layout_) throw InvalidArgument("DofSet requires a layout");
  std::sort(members_.begin(), members_.end());
  members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
  rank_of_.assign(static_cast<std::size_t>(layout_->total()), -1);
  for (std::size_t r = 0; r < members_.size(); ++r) {
    const int dof = members_[r];
    if (!layout_->contains(dof)) {
      throw InvalidArgument("DoF " + std::to_string(dof) + " outside layout of size " +
                            std::to_string(layout_->total()));
    }
    rank_of_[static_cast<std::size_t>(dof)] = static_cast<int>(r);
  }
  for (int dof = 0; dof < layout_->robot_dofs(); ++dof) {
    if (rank_of_[static_cast<std::size_t>(dof)] < 0) {
      throw InvalidArgument("robot DoF " + std::to_string(dof) + " missing from DoF set");
    }
  }
}

DofSet DofSet::full(std::shared_ptr<const DofLayout> layout) {
  std::vector<int> all(static_cast<std::size_t>(layout->total()));
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  return DofSet(std::move(layout), std::move(all));
}

DofSet DofSet::robot_only(std::shared_ptr<const DofLayout> layout) {
  std::vector<int> robot(static_cast<std::size_t>(layout->robot_dofs()));
  for (std::size_t i = 0; i < robot.size(); ++i) robot[i] = static_cast<int>(i);
  return DofSet(std::move(layout), std::move(robot));
}

bool DofSet::contains(int dof) const {
  return layout_->contains(dof) && rank_of_[static_cast<std::size_t>(dof)] >= 0;
}

std::vector<int> DofSet::complement() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(layout_->total() - size()));
  for (int dof = 0; dof < layout_->total(); ++dof) {
    if (rank_of_[static_cast<std::size_t>(dof)] < 0) out.push_back(dof);
  }
  return out;
}

DofSet DofSet::with_added(std::span<const int> dofs) const {
  std::vector<int> next = members_;
  next.insert(next.end(), dofs.begin(), dofs.end());
  return DofSet(layout_, std::move(next));
}

DofSet DofSet::with_removed(std::span<const int> dofs) const {
  std::vector<int> next;
  next.reserve(members_.size());
  for (int dof : members_) {
    if (std::find(dofs.begin(), dofs.end(), dof) == dofs.end()) next.push_back(dof);
  }
  return DofSet(layout_, std::move(next));
}

int DofSet::rank(int dof) const {
  if (!contains(dof)) {
    throw InvalidArgument("DoF " + std::to_string(dof) + " is not in the reduced set");
  }
  return rank_of_[static_cast<std::size_t>(dof)];
}

int DofSet::full_index(int j) const {
  const int n = size();
  if (j < 0 || j >= 2 * n) throw InvalidArgument("reduced coordinate out of range");
  if (j < n) return members_[static_cast<std::size_t>(j)];
  return layout_->total() + members_[static_cast<std::size_t>(j - n)];
}

Vector gather(const Vector& state, const DofSet& set) {
  const int total = set.layout().total();
  if (state.size() != 2 * total) {
    throw InvalidArgument("state length " + std::to_string(state.size()) +
                          " does not match layout (expected " + std::to_string(2 * total) + ")");
  }
  const int n = set.size();
  Vector out(2 * n);
  for (int j = 0; j < n; ++j) {
    const int dof = set.members()[static_cast<std::size_t>(j)];
    out[j] = state[dof];
    out[j + n] = state[total + dof];
  }
  return out;
}

int reduced_index(const DofSet& set, int dof, Component kind) {
  const int r = set.rank(dof);
  return kind == Component::kPosition ? r : r + set.size();
}

}  // namespace svr
