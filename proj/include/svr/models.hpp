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

#ifndef SVR_MODELS_HPP_
#define SVR_MODELS_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "svr/dynamics.hpp"

namespace svr {

using Point2 = Eigen::Vector2d;

// Linear spring-damper acting on circle overlap, clamped so contacts only push.
struct ContactParams {
  double stiffness = 2000.0;  // N/m
  double damping = 10.0;      // N s/m

  bool operator==(const ContactParams&) const = default;
};

struct PusherParams {
  double radius = 0.04;
  double mass = 1.0;
  double damping = 8.0;  // viscous ground damping, N s/m

  bool operator==(const PusherParams&) const = default;
};

struct DiscParams {
  double radius = 0.05;
  double mass = 0.5;
  double damping = 5.0;
  double angular_damping = 0.002;  // N m s/rad

  bool operator==(const DiscParams&) const = default;
};

struct ArenaParams {
  double half_extent = 0.5;  // square arena [-h, h]^2
  bool walls = true;

  bool operator==(const ArenaParams&) const = default;
};

enum class Topology { kChain, kGrid, kCustom };

struct LatticeParams {
  int particles = 36;
  Topology topology = Topology::kGrid;
  int columns = 6;  // grid only; the last row may be partial
  std::vector<std::pair<int, int>> edges;  // custom only
  double spacing = 0.03;
  double particle_mass = 0.02;
  double particle_radius = 0.015;
  double stiffness = 40.0;  // N/m
  double damping = 0.2;     // N s/m along the spring
  double ground_damping = 0.08;

  bool operator==(const LatticeParams&) const = default;
};

// Planar pusher world: one force-actuated pusher disc (robot DoFs x, y),
// free discs (x, y, yaw) and optional particle lattices (x, y per particle),
// integrated with semi-implicit Euler.
class PlanarWorld final : public ModelBase {
 public:
  enum class CircleKind { kPusher, kDisc, kParticle };

  struct Circle {
    CircleKind kind;
    int dof;  // x DoF; y is dof + 1
    double radius;
  };

  struct Spring {
    int a;  // circle indices
    int b;
    double rest;
    double stiffness;
    double damping;
  };

  struct Definition {
    std::string name;
    double timestep = 0.004;
    ArenaParams arena;
    ContactParams contact;
    PusherParams pusher;
    std::vector<DiscParams> discs;
    std::vector<LatticeParams> lattices;
    Point2 target = Point2::Zero();
  };

  explicit PlanarWorld(Definition def);

  const Definition& definition() const { return def_; }
  const std::vector<Circle>& circles() const { return circles_; }
  const std::vector<Spring>& springs() const { return springs_; }

  // DoF index of disc `i`'s x coordinate (y and yaw follow).
  int disc_dof(int i) const { return disc_dofs_.at(static_cast<std::size_t>(i)); }
  // First DoF of lattice `i`; particle p occupies first + 2p, first + 2p + 1.
  int lattice_dof(int i) const { return lattice_dofs_.at(static_cast<std::size_t>(i)); }
  int num_discs() const { return static_cast<int>(def_.discs.size()); }
  const Point2& target() const { return def_.target; }

  // Net generalized force on every DoF (size |F|) at state x under control u.
  Vector forces(const Vector& x, const Vector& u) const;

  // Largest circle-circle or circle-wall overlap in x (<= 0 when separated).
  double max_penetration(const Vector& x) const;

 protected:
  void step_unchecked(const Vector& x, const Vector& u, Vector& next) const override;

 private:
  static DofLayout build_layout(const Definition& def);

  Definition def_;
  std::vector<Circle> circles_;
  std::vector<std::pair<int, int>> contact_pairs_;
  std::vector<Spring> springs_;
  std::vector<int> disc_dofs_;
  std::vector<int> lattice_dofs_;
  Vector inv_mass_;
  Vector damping_;
};

struct ClutterParams {
  int num_objects = 8;  // object 0 is the goal disc, the rest are distractors
  DiscParams disc;
  PusherParams pusher;
  ContactParams contact;
  ArenaParams arena;
  double timestep = 0.004;
  Point2 target{0.25, 0.0};
  // Puts the last distractor in an arena corner, out of reach of the pusher.
  bool unreachable_disc = false;
  // Explicit layout; when set, overrides seeded placement. Index 0 is the pusher,
  // then one entry per object.
  std::optional<std::vector<Point2>> positions;
};

std::shared_ptr<PlanarWorld> make_clutter_model(const ClutterParams& params, std::uint64_t seed);

struct SoftBodyParams {
  LatticeParams lattice;
  PusherParams pusher;
  ContactParams contact;
  ArenaParams arena;
  double timestep = 0.004;
  Point2 start{-0.15, 0.0};  // lattice centroid at rest
  Point2 target{0.15, 0.0};  // goal centroid
};

std::shared_ptr<PlanarWorld> make_softbody_model(const SoftBodyParams& params);

struct SoftRigidParams {
  LatticeParams lattice;
  DiscParams disc;
  PusherParams pusher;
  ContactParams contact;
  ArenaParams arena;
  double timestep = 0.004;
  Point2 start{-0.2, 0.0};  // lattice centroid
  Point2 target{0.25, 0.0};  // goal disc target
};

std::shared_ptr<PlanarWorld> make_soft_rigid_model(const SoftRigidParams& params);

// Rest positions of a lattice centred at `centre`, in particle order.
std::vector<Point2> lattice_rest_positions(const LatticeParams& lattice, const Point2& centre);

}  // namespace svr

#endif  // SVR_MODELS_HPP_
