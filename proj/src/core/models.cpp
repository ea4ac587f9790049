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

#include "svr/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <numeric>
#include <optional>
#include <string>

#include "svr/random.hpp"

namespace svr {
namespace {

// Local (lattice-relative) spring edges for the requested topology.
std::vector<std::pair<int, int>> lattice_edges(const LatticeParams& lattice) {
  std::vector<std::pair<int, int>> edges;
  const int n = lattice.particles;
  switch (lattice.topology) {
    case Topology::kChain:
      for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
      break;
    case Topology::kGrid: {
      if (lattice.columns < 1) throw InvalidArgument("grid lattice needs columns >= 1");
      const int cols = lattice.columns;
      auto exists = [&](int r, int c) { return c >= 0 && c < cols && r * cols + c < n; };
      for (int p = 0; p < n; ++p) {
        const int r = p / cols;
        const int c = p % cols;
        if (exists(r, c + 1)) edges.emplace_back(p, p + 1);
        if (exists(r + 1, c)) edges.emplace_back(p, p + cols);
        // shear
        if (exists(r + 1, c + 1)) edges.emplace_back(p, p + cols + 1);
        if (exists(r, c + 1) && exists(r + 1, c)) edges.emplace_back(p + 1, p + cols);
      }
      break;
    }
    case Topology::kCustom:
      edges = lattice.edges;
      for (const auto& [a, b] : edges) {
        if (a < 0 || b < 0 || a >= n || b >= n || a == b) {
          throw InvalidArgument("custom lattice edge out of range");
        }
      }
      break;
  }
  return edges;
}

bool connected(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int i) {
    while (parent[static_cast<std::size_t>(i)] != i) {
      parent[static_cast<std::size_t>(i)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
      i = parent[static_cast<std::size_t>(i)];
    }
    return i;
  };
  int components = n;
  for (const auto& [a, b] : edges) {
    const int ra = find(a);
    const int rb = find(b);
    if (ra != rb) {
      parent[static_cast<std::size_t>(ra)] = rb;
      --components;
    }
  }
  return components == 1;
}

double disc_inertia(const DiscParams& d) { return 0.5 * d.mass * d.radius * d.radius; }

}  // namespace

std::vector<Point2> lattice_rest_positions(const LatticeParams& lattice, const Point2& centre) {
  std::vector<Point2> pts;
  pts.reserve(static_cast<std::size_t>(lattice.particles));
  if (lattice.topology == Topology::kGrid) {
    const int cols = std::max(lattice.columns, 1);
    for (int p = 0; p < lattice.particles; ++p) {
      pts.emplace_back((p % cols) * lattice.spacing, (p / cols) * lattice.spacing);
    }
  } else {
    for (int p = 0; p < lattice.particles; ++p) pts.emplace_back(p * lattice.spacing, 0.0);
  }
  Point2 mean = Point2::Zero();
  for (const Point2& p : pts) mean += p;
  mean /= static_cast<double>(std::max<std::size_t>(pts.size(), 1));
  for (Point2& p : pts) p += centre - mean;
  return pts;
}

DofLayout PlanarWorld::build_layout(const Definition& def) {
  std::vector<Body> bodies;
  for (std::size_t i = 0; i < def.discs.size(); ++i) {
    bodies.push_back({"disc" + std::to_string(i), 3});
  }
  for (std::size_t i = 0; i < def.lattices.size(); ++i) {
    bodies.push_back({"lattice" + std::to_string(i), 2 * def.lattices[i].particles});
  }
  return DofLayout(2, std::move(bodies));
}

PlanarWorld::PlanarWorld(Definition def)
    : ModelBase(def.name, build_layout(def), 2, def.timestep), def_(std::move(def)) {
  const int total = layout().total();
  inv_mass_.resize(total);
  damping_.resize(total);

  circles_.push_back({CircleKind::kPusher, 0, def_.pusher.radius});
  inv_mass_.segment(0, 2).setConstant(1.0 / def_.pusher.mass);
  damping_.segment(0, 2).setConstant(def_.pusher.damping);

  for (std::size_t i = 0; i < def_.discs.size(); ++i) {
    const DiscParams& d = def_.discs[i];
    const int dof = layout().body_offset(i);
    disc_dofs_.push_back(dof);
    circles_.push_back({CircleKind::kDisc, dof, d.radius});
    inv_mass_.segment(dof, 2).setConstant(1.0 / d.mass);
    damping_.segment(dof, 2).setConstant(d.damping);
    inv_mass_[dof + 2] = 1.0 / disc_inertia(d);
    damping_[dof + 2] = d.angular_damping;
  }

  for (std::size_t li = 0; li < def_.lattices.size(); ++li) {
    const LatticeParams& lat = def_.lattices[li];
    if (lat.particles < 2) throw InvalidArgument("lattice needs at least 2 particles");
    const int first = layout().body_offset(def_.discs.size() + li);
    lattice_dofs_.push_back(first);
    const int first_circle = static_cast<int>(circles_.size());
    for (int p = 0; p < lat.particles; ++p) {
      circles_.push_back({CircleKind::kParticle, first + 2 * p, lat.particle_radius});
    }
    inv_mass_.segment(first, 2 * lat.particles).setConstant(1.0 / lat.particle_mass);
    damping_.segment(first, 2 * lat.particles).setConstant(lat.ground_damping);

    const auto edges = lattice_edges(lat);
    if (!connected(lat.particles, edges)) throw InvalidArgument("lattice topology is disconnected");
    const auto rest = lattice_rest_positions(lat, Point2::Zero());
    for (const auto& [a, b] : edges) {
      const double len = (rest[static_cast<std::size_t>(b)] - rest[static_cast<std::size_t>(a)]).norm();
      springs_.push_back({first_circle + a, first_circle + b, len, lat.stiffness, lat.damping});
    }
  }

  // Pusher-disc, disc-disc, pusher-particle and particle-disc contacts. The
  // lattice does not collide with itself.
  for (std::size_t i = 0; i < circles_.size(); ++i) {
    for (std::size_t j = i + 1; j < circles_.size(); ++j) {
      const bool both_particles = circles_[i].kind == CircleKind::kParticle &&
                                  circles_[j].kind == CircleKind::kParticle;
      if (!both_particles) contact_pairs_.emplace_back(static_cast<int>(i), static_cast<int>(j));
    }
  }
}

Vector PlanarWorld::forces(const Vector& x, const Vector& u) const {
  const int n = layout().total();
  const auto q = x.head(n);
  const auto v = x.tail(n);
  Vector f = -damping_.cwiseProduct(v);
  f[0] += u[0];
  f[1] += u[1];

  const double kc = def_.contact.stiffness;
  const double cc = def_.contact.damping;
  for (const auto& [i, j] : contact_pairs_) {
    const Circle& a = circles_[static_cast<std::size_t>(i)];
    const Circle& b = circles_[static_cast<std::size_t>(j)];
    const double dx = q[b.dof] - q[a.dof];
    const double dy = q[b.dof + 1] - q[a.dof + 1];
    const double reach = a.radius + b.radius;
    if (std::abs(dx) >= reach || std::abs(dy) >= reach) continue;
    const double dist = std::sqrt(dx * dx + dy * dy);
    const double overlap = reach - dist;
    if (overlap <= 0.0 || dist < 1e-12) continue;
    const double nx = dx / dist;
    const double ny = dy / dist;
    const double overlap_rate = -((v[b.dof] - v[a.dof]) * nx + (v[b.dof + 1] - v[a.dof + 1]) * ny);
    const double push = std::max(0.0, kc * overlap + cc * overlap_rate);
    f[a.dof] -= push * nx;
    f[a.dof + 1] -= push * ny;
    f[b.dof] += push * nx;
    f[b.dof + 1] += push * ny;
  }

  for (const Spring& s : springs_) {
    const Circle& a = circles_[static_cast<std::size_t>(s.a)];
    const Circle& b = circles_[static_cast<std::size_t>(s.b)];
    const double dx = q[b.dof] - q[a.dof];
    const double dy = q[b.dof + 1] - q[a.dof + 1];
    const double len = std::sqrt(dx * dx + dy * dy);
    if (len < 1e-12) continue;
    const double ex = dx / len;
    const double ey = dy / len;
    const double rate = (v[b.dof] - v[a.dof]) * ex + (v[b.dof + 1] - v[a.dof + 1]) * ey;
    const double tension = s.stiffness * (len - s.rest) + s.damping * rate;
    f[a.dof] += tension * ex;
    f[a.dof + 1] += tension * ey;
    f[b.dof] -= tension * ex;
    f[b.dof + 1] -= tension * ey;
  }

  if (def_.arena.walls) {
    const double h = def_.arena.half_extent;
    for (const Circle& c : circles_) {
      for (int axis = 0; axis < 2; ++axis) {
        const double p = q[c.dof + axis];
        const double vel = v[c.dof + axis];
        const double low = -h - (p - c.radius);
        if (low > 0.0) f[c.dof + axis] += std::max(0.0, kc * low - cc * vel);
        const double high = (p + c.radius) - h;
        if (high > 0.0) f[c.dof + axis] -= std::max(0.0, kc * high + cc * vel);
      }
    }
  }
  return f;
}

void PlanarWorld::step_unchecked(const Vector& x, const Vector& u, Vector& next) const {
  const int n = layout().total();
  const double dt = timestep();
  const Vector f = forces(x, u);
  next.tail(n) = x.tail(n) + dt * f.cwiseProduct(inv_mass_);
  next.head(n) = x.head(n) + dt * next.tail(n);
}

double PlanarWorld::max_penetration(const Vector& x) const {
  const int n = layout().total();
  const auto q = x.head(n);
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& [i, j] : contact_pairs_) {
    const Circle& a = circles_[static_cast<std::size_t>(i)];
    const Circle& b = circles_[static_cast<std::size_t>(j)];
    const double d = std::hypot(q[b.dof] - q[a.dof], q[b.dof + 1] - q[a.dof + 1]);
    worst = std::max(worst, a.radius + b.radius - d);
  }
  if (def_.arena.walls) {
    const double h = def_.arena.half_extent;
    for (const Circle& c : circles_) {
      for (int axis = 0; axis < 2; ++axis) {
        worst = std::max(worst, std::abs(q[c.dof + axis]) + c.radius - h);
      }
    }
  }
  return worst;
}

namespace {

void check_no_penetration(const PlanarWorld& world, const Vector& x0) {
  const double pen = world.max_penetration(x0);
  if (pen > 0.0) {
    throw InvalidArgument(world.name() + ": initial layout penetrates by " + std::to_string(pen) + " m");
  }
}

double segment_distance(const Point2& p, const Point2& a, const Point2& b) {
  const Point2 ab = b - a;
  const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

}  // namespace

std::shared_ptr<PlanarWorld> make_clutter_model(const ClutterParams& params, std::uint64_t seed) {
  if (params.num_objects < 1) throw InvalidArgument("clutter model needs num_objects >= 1");
  PlanarWorld::Definition def;
  def.name = "clutter";
  def.timestep = params.timestep;
  def.arena = params.arena;
  def.contact = params.contact;
  def.pusher = params.pusher;
  def.discs.assign(static_cast<std::size_t>(params.num_objects), params.disc);
  def.target = params.target;
  auto world = std::make_shared<PlanarWorld>(def);

  const double r = params.disc.radius;
  const double rp = params.pusher.radius;
  const double h = params.arena.half_extent;
  std::vector<Point2> pos;  // pusher, then objects
  if (params.positions) {
    pos = *params.positions;
    if (static_cast<int>(pos.size()) != params.num_objects + 1) {
      throw InvalidArgument("clutter positions must list the pusher and every object");
    }
  } else {
    Rng rng(seed);
    const Point2 target = params.target;
    const double dist = rng.uniform(0.3, 0.4);
    const double angle = std::numbers::pi + rng.uniform(-0.5, 0.5);
    const Point2 goal = target + dist * Point2(std::cos(angle), std::sin(angle));
    const Point2 dir = (target - goal).normalized();
    const Point2 pusher = goal - dir * (r + rp + 0.015);
    pos = {pusher, goal};
    const double inset = h - r - 0.01;
    std::optional<Point2> corner;
    if (params.unreachable_disc && params.num_objects > 1) {
      double best_d = -1.0;
      for (const Point2& c : {Point2(inset, inset), Point2(inset, -inset), Point2(-inset, inset),
                             Point2(-inset, -inset)}) {
        const double d = segment_distance(c, pusher, target);
        if (d > best_d) {
          best_d = d;
          corner = c;
        }
      }
    }
    auto clear = [&](const Point2& p) {
      if ((p - pos[0]).norm() < r + rp + 0.02) return false;
      for (std::size_t k = 1; k < pos.size(); ++k) {
        if ((p - pos[k]).norm() < 2.0 * r + 0.01) return false;
      }
      // the unreachable disc keeps a wide empty neighbourhood
      if (corner && (p - *corner).norm() < 4.0 * r) return false;
      // keep the target reachable
      return (p - target).norm() > 2.0 * r + 0.03;
    };
    const int placed_objects = corner ? params.num_objects - 1 : params.num_objects;
    for (int k = 1; k < placed_objects; ++k) {
      bool placed = false;
      for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
        Point2 p;
        if (k % 2 == 1) {
          // along the push corridor
          const double s = rng.uniform(0.25, 1.1);
          const double lateral = rng.uniform(-0.14, 0.14);
          p = goal + s * (target - goal) + lateral * Point2(-dir.y(), dir.x());
        } else {
          p = Point2(rng.uniform(-inset, inset), rng.uniform(-inset, inset));
        }
        if (std::abs(p.x()) > inset || std::abs(p.y()) > inset) continue;
        if (clear(p)) {
          pos.push_back(p);
          placed = true;
        }
      }
      if (!placed) throw InvalidArgument("clutter layout: could not place object " + std::to_string(k));
    }
    if (corner) pos.push_back(*corner);
  }

  Vector x0 = Vector::Zero(world->state_size());
  x0[0] = pos[0].x();
  x0[1] = pos[0].y();
  for (int i = 0; i < params.num_objects; ++i) {
    const int dof = world->disc_dof(i);
    x0[dof] = pos[static_cast<std::size_t>(i + 1)].x();
    x0[dof + 1] = pos[static_cast<std::size_t>(i + 1)].y();
  }
  check_no_penetration(*world, x0);
  world->set_initial_state(std::move(x0));
  return world;
}

std::shared_ptr<PlanarWorld> make_softbody_model(const SoftBodyParams& params) {
  if (params.lattice.particles < 2) throw InvalidArgument("soft body needs particles >= 2");
  PlanarWorld::Definition def;
  def.name = "soft";
  def.timestep = params.timestep;
  def.arena = params.arena;
  def.contact = params.contact;
  def.pusher = params.pusher;
  def.lattices = {params.lattice};
  def.target = params.target;
  auto world = std::make_shared<PlanarWorld>(def);

  const auto rest = lattice_rest_positions(params.lattice, params.start);
  Vector x0 = Vector::Zero(world->state_size());
  const int first = world->lattice_dof(0);
  double min_along = std::numeric_limits<double>::infinity();
  const Point2 dir = (params.target - params.start).normalized();
  for (std::size_t p = 0; p < rest.size(); ++p) {
    x0[first + 2 * static_cast<int>(p)] = rest[p].x();
    x0[first + 2 * static_cast<int>(p) + 1] = rest[p].y();
    min_along = std::min(min_along, (rest[p] - params.start).dot(dir));
  }
  const Point2 pusher =
      params.start + dir * (min_along - params.lattice.particle_radius - params.pusher.radius - 0.015);
  x0[0] = pusher.x();
  x0[1] = pusher.y();
  check_no_penetration(*world, x0);
  world->set_initial_state(std::move(x0));
  return world;
}

std::shared_ptr<PlanarWorld> make_soft_rigid_model(const SoftRigidParams& params) {
  if (params.lattice.particles < 2) throw InvalidArgument("soft body needs particles >= 2");
  PlanarWorld::Definition def;
  def.name = "soft-rigid";
  def.timestep = params.timestep;
  def.arena = params.arena;
  def.contact = params.contact;
  def.pusher = params.pusher;
  def.discs = {params.disc};
  def.lattices = {params.lattice};
  def.target = params.target;
  auto world = std::make_shared<PlanarWorld>(def);

  const Point2 dir = (params.target - params.start).normalized();
  const auto rest = lattice_rest_positions(params.lattice, params.start);
  Vector x0 = Vector::Zero(world->state_size());
  const int first = world->lattice_dof(0);
  double min_along = std::numeric_limits<double>::infinity();
  double max_along = -std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < rest.size(); ++p) {
    x0[first + 2 * static_cast<int>(p)] = rest[p].x();
    x0[first + 2 * static_cast<int>(p) + 1] = rest[p].y();
    const double along = (rest[p] - params.start).dot(dir);
    min_along = std::min(min_along, along);
    max_along = std::max(max_along, along);
  }
  const double pr = params.lattice.particle_radius;
  const Point2 pusher = params.start + dir * (min_along - pr - params.pusher.radius - 0.015);
  const Point2 goal = params.start + dir * (max_along + pr + params.disc.radius + 0.01);
  x0[0] = pusher.x();
  x0[1] = pusher.y();
  const int disc = world->disc_dof(0);
  x0[disc] = goal.x();
  x0[disc + 1] = goal.y();
  check_no_penetration(*world, x0);
  world->set_initial_state(std::move(x0));
  return world;
}

}  // namespace svr
