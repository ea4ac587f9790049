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

#include "svr/task.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace svr {
namespace {

using nlohmann::json;

// Reads fields from a JSON object, falling back to defaults, and rejects keys
// nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) throw ConfigError(where_ + ": unknown key '" + key + "'");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

std::string topology_name(Topology t) {
  switch (t) {
    case Topology::kChain: return "chain";
    case Topology::kGrid: return "grid";
    case Topology::kCustom: return "custom";
  }
  return "grid";
}

Topology parse_topology(const std::string& s) {
  if (s == "chain") return Topology::kChain;
  if (s == "grid") return Topology::kGrid;
  if (s == "custom") return Topology::kCustom;
  throw ConfigError("unknown lattice topology '" + s + "'");
}

Method parse_method_or_throw(const std::string& s) {
  const auto m = parse_method(s);
  if (!m) throw ConfigError("unknown method '" + s + "'");
  return *m;
}

json to_json(const ContactParams& p) { return {{"stiffness", p.stiffness}, {"damping", p.damping}}; }
json to_json(const PusherParams& p) {
  return {{"radius", p.radius}, {"mass", p.mass}, {"damping", p.damping}};
}
json to_json(const DiscParams& p) {
  return {{"radius", p.radius}, {"mass", p.mass}, {"damping", p.damping},
          {"angular_damping", p.angular_damping}};
}
json to_json(const ArenaParams& p) { return {{"half_extent", p.half_extent}, {"walls", p.walls}}; }
json to_json(const LatticeParams& p) {
  json edges = json::array();
  for (const auto& [a, b] : p.edges) edges.push_back({a, b});
  return {{"particles", p.particles},      {"topology", topology_name(p.topology)},
          {"columns", p.columns},          {"edges", edges},
          {"spacing", p.spacing},          {"particle_mass", p.particle_mass},
          {"particle_radius", p.particle_radius}, {"stiffness", p.stiffness},
          {"damping", p.damping},          {"ground_damping", p.ground_damping}};
}

void from_json_into(const json& j, ContactParams& p, const std::string& where) {
  ObjectReader r(j, where);
  r.get("stiffness", p.stiffness);
  r.get("damping", p.damping);
  r.finish();
}
void from_json_into(const json& j, PusherParams& p, const std::string& where) {
  ObjectReader r(j, where);
  r.get("radius", p.radius);
  r.get("mass", p.mass);
  r.get("damping", p.damping);
  r.finish();
}
void from_json_into(const json& j, DiscParams& p, const std::string& where) {
  ObjectReader r(j, where);
  r.get("radius", p.radius);
  r.get("mass", p.mass);
  r.get("damping", p.damping);
  r.get("angular_damping", p.angular_damping);
  r.finish();
}
void from_json_into(const json& j, ArenaParams& p, const std::string& where) {
  ObjectReader r(j, where);
  r.get("half_extent", p.half_extent);
  r.get("walls", p.walls);
  r.finish();
}
void from_json_into(const json& j, LatticeParams& p, const std::string& where) {
  ObjectReader r(j, where);
  r.get("particles", p.particles);
  std::string topology = topology_name(p.topology);
  r.get("topology", topology);
  p.topology = parse_topology(topology);
  r.get("columns", p.columns);
  if (const json* edges = r.child("edges")) {
    p.edges.clear();
    if (!edges->is_array()) throw ConfigError(where + ".edges: expected an array");
    for (const json& e : *edges) {
      if (!e.is_array() || e.size() != 2) throw ConfigError(where + ".edges: expected [a, b] pairs");
      p.edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
  }
  r.get("spacing", p.spacing);
  r.get("particle_mass", p.particle_mass);
  r.get("particle_radius", p.particle_radius);
  r.get("stiffness", p.stiffness);
  r.get("damping", p.damping);
  r.get("ground_damping", p.ground_damping);
  r.finish();
}

json to_json(const MethodSpec& m) {
  return {{"method", std::string(method_name(m.method))}, {"theta", m.theta}, {"rho", m.rho},
          {"g", m.g}, {"signed_importance", m.signed_importance}};
}

MethodSpec method_from_json(const json& j, const std::string& where) {
  MethodSpec m;
  ObjectReader r(j, where);
  std::string name(method_name(m.method));
  r.get("method", name);
  m.method = parse_method_or_throw(name);
  r.get("theta", m.theta);
  r.get("rho", m.rho);
  r.get("g", m.g);
  r.get("signed_importance", m.signed_importance);
  r.finish();
  return m;
}

json to_json(const TaskConfig& c) {
  json methods = json::array();
  for (const MethodSpec& m : c.methods) methods.push_back(to_json(m));
  const ModelSpec& ms = c.model;
  return {
      {"name", c.name},
      {"model",
       {{"kind", ms.kind},
        {"num_objects", ms.num_objects},
        {"unreachable_disc", ms.unreachable_disc},
        {"lattice", to_json(ms.lattice)},
        {"disc", to_json(ms.disc)},
        {"pusher", to_json(ms.pusher)},
        {"contact", to_json(ms.contact)},
        {"arena", to_json(ms.arena)},
        {"start", {ms.start_x, ms.start_y}},
        {"target", {ms.target_x, ms.target_y}}}},
      {"cost",
       {{"goal_position", c.cost.goal_position},
        {"goal_velocity", c.cost.goal_velocity},
        {"distractor_position", c.cost.distractor_position},
        {"distractor_velocity", c.cost.distractor_velocity},
        {"lattice_position", c.cost.lattice_position},
        {"pusher_position", c.cost.pusher_position},
        {"pusher_velocity", c.cost.pusher_velocity},
        {"control", c.cost.control},
        {"terminal_scale", c.cost.terminal_scale},
        {"goal_speed", c.cost.goal_speed}}},
      {"success", {{"radius", c.success.radius}, {"hold_steps", c.success.hold_steps}}},
      {"mpc",
       {{"horizon", c.mpc.horizon},
        {"timestep", c.mpc.timestep},
        {"timeout", c.mpc.timeout},
        {"slowdown", c.mpc.slowdown},
        {"mode", c.mpc.mode == MpcMode::kVirtualTime ? "virtual" : "real"},
        {"virtual_cost_per_eval", c.mpc.virtual_cost_per_eval}}},
      {"methods", methods},
      {"sweep",
       {{"method", std::string(method_name(c.sweep.method))},
        {"theta", c.sweep.thetas},
        {"rho", c.sweep.rhos}}},
      {"trials", c.trials},
      {"seed", c.seed}};
}

void read_point(ObjectReader& r, const char* key, double& x, double& y, const std::string& where) {
  if (const json* p = r.child(key)) {
    if (!p->is_array() || p->size() != 2 || !(*p)[0].is_number() || !(*p)[1].is_number()) {
      throw ConfigError(where + "." + key + ": expected [x, y]");
    }
    x = (*p)[0].get<double>();
    y = (*p)[1].get<double>();
  }
}

TaskConfig from_json_full(const json& j, TaskConfig c) {
  ObjectReader r(j, "config");
  r.get("name", c.name);
  if (const json* model = r.child("model")) {
    ObjectReader mr(*model, "model");
    ModelSpec& ms = c.model;
    mr.get("kind", ms.kind);
    mr.get("num_objects", ms.num_objects);
    mr.get("unreachable_disc", ms.unreachable_disc);
    if (const json* x = mr.child("lattice")) from_json_into(*x, ms.lattice, "model.lattice");
    if (const json* x = mr.child("disc")) from_json_into(*x, ms.disc, "model.disc");
    if (const json* x = mr.child("pusher")) from_json_into(*x, ms.pusher, "model.pusher");
    if (const json* x = mr.child("contact")) from_json_into(*x, ms.contact, "model.contact");
    if (const json* x = mr.child("arena")) from_json_into(*x, ms.arena, "model.arena");
    read_point(mr, "start", ms.start_x, ms.start_y, "model");
    read_point(mr, "target", ms.target_x, ms.target_y, "model");
    mr.finish();
  }
  if (const json* cost = r.child("cost")) {
    ObjectReader cr(*cost, "cost");
    cr.get("goal_position", c.cost.goal_position);
    cr.get("goal_velocity", c.cost.goal_velocity);
    cr.get("distractor_position", c.cost.distractor_position);
    cr.get("distractor_velocity", c.cost.distractor_velocity);
    cr.get("lattice_position", c.cost.lattice_position);
    cr.get("pusher_position", c.cost.pusher_position);
    cr.get("pusher_velocity", c.cost.pusher_velocity);
    cr.get("control", c.cost.control);
    cr.get("terminal_scale", c.cost.terminal_scale);
    cr.get("goal_speed", c.cost.goal_speed);
    cr.finish();
  }
  if (const json* success = r.child("success")) {
    ObjectReader sr(*success, "success");
    sr.get("radius", c.success.radius);
    sr.get("hold_steps", c.success.hold_steps);
    sr.finish();
  }
  if (const json* mpc = r.child("mpc")) {
    ObjectReader mr(*mpc, "mpc");
    mr.get("horizon", c.mpc.horizon);
    mr.get("timestep", c.mpc.timestep);
    mr.get("timeout", c.mpc.timeout);
    mr.get("slowdown", c.mpc.slowdown);
    std::string mode = c.mpc.mode == MpcMode::kVirtualTime ? "virtual" : "real";
    mr.get("mode", mode);
    if (mode == "virtual") {
      c.mpc.mode = MpcMode::kVirtualTime;
    } else if (mode == "real") {
      c.mpc.mode = MpcMode::kRealAsync;
    } else {
      throw ConfigError("mpc.mode: expected \"virtual\" or \"real\"");
    }
    mr.get("virtual_cost_per_eval", c.mpc.virtual_cost_per_eval);
    mr.finish();
  }
  if (const json* methods = r.child("methods")) {
    if (!methods->is_array()) throw ConfigError("methods: expected an array");
    c.methods.clear();
    for (std::size_t i = 0; i < methods->size(); ++i) {
      c.methods.push_back(method_from_json((*methods)[i], "methods[" + std::to_string(i) + "]"));
    }
  }
  if (const json* sweep = r.child("sweep")) {
    ObjectReader sr(*sweep, "sweep");
    std::string name(method_name(c.sweep.method));
    sr.get("method", name);
    c.sweep.method = parse_method_or_throw(name);
    sr.get("theta", c.sweep.thetas);
    sr.get("rho", c.sweep.rhos);
    sr.finish();
  }
  r.get("trials", c.trials);
  r.get("seed", c.seed);
  r.finish();
  c.validate();
  return c;
}

std::vector<MethodSpec> table_methods() {
  return {
      {Method::kBaselineFull, 0, 0.0},
      {Method::kRandom, 5, 0.0},
      {Method::kNaive, 0, 0.0},
      {Method::kSvrSvd, 10, 1.0},
      {Method::kSvrSvd, 10, 500.0},
      {Method::kSvrSvd, 5, 1.0},
      {Method::kSvrSum, 10, 1.0},
      {Method::kSvrSum, 10, 500.0},
      {Method::kSvrSum, 5, 1.0},
  };
}

Point2 unit_or_x(const Point2& v) {
  const double n = v.norm();
  return n > 1e-12 ? Point2(v / n) : Point2(1.0, 0.0);
}

}  // namespace

std::string MethodSpec::label() const {
  std::ostringstream out;
  out << method_name(method);
  if (method == Method::kRandom) out << " theta=" << theta;
  if (method == Method::kSvrSum || method == Method::kSvrSvd) {
    out << " theta=" << theta << " rho=" << rho;
    if (method == Method::kSvrSvd && g != 3) out << " g=" << g;
  }
  if (signed_importance) out << " signed";
  return out.str();
}

SelectionPolicy MethodSpec::policy(std::uint64_t seed) const {
  SelectionPolicy p;
  p.method = method;
  p.theta = theta;
  p.rho = rho;
  p.g = g;
  p.seed = seed;
  p.signed_importance = signed_importance;
  return p;
}

void TaskConfig::validate() const {
  if (model.kind != kClutterKind && model.kind != kSoftKind && model.kind != kSoftRigidKind) {
    throw ConfigError("model.kind: unknown kind '" + model.kind + "'");
  }
  if (!(mpc.timestep > 0.0)) throw ConfigError("mpc.timestep must be > 0");
  if (mpc.horizon < 1 || mpc.timeout < 1 || mpc.slowdown < 1) {
    throw ConfigError("mpc: horizon, timeout and slowdown must be >= 1");
  }
  if (!(mpc.virtual_cost_per_eval >= 0.0)) throw ConfigError("mpc.virtual_cost_per_eval must be >= 0");
  if (trials < 1) throw ConfigError("trials must be >= 1");
  for (double w : {cost.goal_position, cost.goal_velocity, cost.distractor_position,
                   cost.distractor_velocity, cost.lattice_position, cost.pusher_position,
                   cost.pusher_velocity, cost.control, cost.terminal_scale, cost.goal_speed}) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("cost weights must be finite and >= 0");
  }
  if (success.hold_steps < 1 || !(success.radius > 0.0)) {
    throw ConfigError("success: radius must be > 0 and hold_steps >= 1");
  }
  for (const MethodSpec& m : methods) {
    if (m.theta < 0 || m.g < 1 || !(m.rho >= 0.0)) throw ConfigError("method " + m.label() + ": bad parameters");
  }
  for (int t : sweep.thetas) {
    if (t < 0) throw ConfigError("sweep.theta entries must be >= 0");
  }
  for (double r : sweep.rhos) {
    if (!(r >= 0.0)) throw ConfigError("sweep.rho entries must be >= 0");
  }
}

std::vector<TaskConfig> builtin_tasks() {
  std::vector<TaskConfig> tasks;

  TaskConfig clutter;
  clutter.name = "clutter";
  clutter.model.kind = kClutterKind;
  clutter.mpc = {80, 0.004, 2000, 1, MpcMode::kVirtualTime, 1.0 / 144.0};
  clutter.methods = table_methods();
  clutter.trials = 100;
  tasks.push_back(clutter);

  TaskConfig soft;
  soft.name = "soft";
  soft.model.kind = kSoftKind;
  soft.model.lattice.particles = 36;
  soft.model.lattice.topology = Topology::kGrid;
  soft.model.lattice.columns = 6;
  soft.model.start_x = -0.15;
  soft.model.target_x = 0.15;
  soft.cost.goal_position = 100.0;
  soft.cost.goal_velocity = 0.1;
  soft.cost.distractor_position = 0.0;
  soft.mpc = {50, 0.004, 1000, 3, MpcMode::kVirtualTime, 1.0 / 144.0};
  soft.success = {0.03, 10};
  soft.methods = table_methods();
  soft.trials = 20;
  tasks.push_back(soft);

  TaskConfig soft_rigid;
  soft_rigid.name = "soft-rigid";
  soft_rigid.model.kind = kSoftRigidKind;
  soft_rigid.model.lattice.particles = 47;
  soft_rigid.model.lattice.topology = Topology::kGrid;
  soft_rigid.model.lattice.columns = 7;
  soft_rigid.model.start_x = -0.2;
  soft_rigid.model.target_x = 0.25;
  soft_rigid.cost.distractor_position = 0.0;
  soft_rigid.mpc = {100, 0.004, 1000, 5, MpcMode::kVirtualTime, 1.0 / 144.0};
  soft_rigid.success = {0.03, 10};
  soft_rigid.methods = table_methods();
  soft_rigid.trials = 20;
  tasks.push_back(soft_rigid);
  return tasks;
}

TaskConfig builtin_task(std::string_view name) {
  for (TaskConfig& t : builtin_tasks()) {
    if (t.name == name) return t;
  }
  throw ConfigError("unknown built-in task '" + std::string(name) + "'");
}

TaskConfig parse_task_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  TaskConfig base;
  if (j.contains("base")) {
    if (!j["base"].is_string()) throw ConfigError("base: expected a task name");
    base = builtin_task(j["base"].get<std::string>());
    j.erase("base");
  }
  return from_json_full(j, std::move(base));
}

TaskConfig load_task_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_task_config(buffer.str());
}

std::string serialize_task_config(const TaskConfig& config) { return to_json(config).dump(2) + "\n"; }

void save_task_config(const TaskConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config '" + path.string() + "'");
  out << serialize_task_config(config);
}

MpcTask build_task(const TaskConfig& config, std::uint64_t seed) {
  config.validate();
  const ModelSpec& ms = config.model;
  const CostParams& cp = config.cost;
  const Point2 target(ms.target_x, ms.target_y);

  std::shared_ptr<PlanarWorld> world;
  if (ms.kind == kClutterKind) {
    ClutterParams p;
    p.num_objects = ms.num_objects;
    p.disc = ms.disc;
    p.pusher = ms.pusher;
    p.contact = ms.contact;
    p.arena = ms.arena;
    p.timestep = config.mpc.timestep;
    p.target = target;
    p.unreachable_disc = ms.unreachable_disc;
    world = make_clutter_model(p, seed);
  } else if (ms.kind == kSoftKind) {
    SoftBodyParams p;
    p.lattice = ms.lattice;
    p.pusher = ms.pusher;
    p.contact = ms.contact;
    p.arena = ms.arena;
    p.timestep = config.mpc.timestep;
    p.start = Point2(ms.start_x, ms.start_y);
    p.target = target;
    world = make_softbody_model(p);
  } else {
    SoftRigidParams p;
    p.lattice = ms.lattice;
    p.disc = ms.disc;
    p.pusher = ms.pusher;
    p.contact = ms.contact;
    p.arena = ms.arena;
    p.timestep = config.mpc.timestep;
    p.start = Point2(ms.start_x, ms.start_y);
    p.target = target;
    world = make_soft_rigid_model(p);
  }

  const int n = world->layout().total();
  const Vector x0 = world->initial_state();
  Vector rest = x0;  // untracked DoFs are held where they start
  rest.tail(n).setZero();
  Vector w = Vector::Zero(2 * n);

  // Points that travel with the reference: (x DoF, start, end).
  struct Track {
    int dof;
    Point2 from;
    Point2 to;
  };
  std::vector<Track> tracks;
  auto weigh = [&](int dof, double wp, double wv) {
    w[dof] = w[dof + 1] = wp;
    w[n + dof] = w[n + dof + 1] = wv;
  };

  SuccessPredicate success;
  success.target_x = target.x();
  success.target_y = target.y();
  success.radius = config.success.radius;
  success.hold_steps = config.success.hold_steps;

  const double rp = ms.pusher.radius;
  Point2 dir;
  Point2 goal_from;
  double standoff = 0.0;
  if (ms.kind == kSoftKind) {
    const int first = world->lattice_dof(0);
    const Point2 start(ms.start_x, ms.start_y);
    dir = unit_or_x(target - start);
    goal_from = start;
    const auto at_target = lattice_rest_positions(ms.lattice, target);
    double min_along = 0.0;
    for (std::size_t p = 0; p < at_target.size(); ++p) {
      const int dof = first + 2 * static_cast<int>(p);
      weigh(dof, cp.goal_position, cp.goal_velocity);
      tracks.push_back({dof, Point2(x0[dof], x0[dof + 1]), at_target[p]});
      success.x_dofs.push_back(dof);
      min_along = std::min(min_along, (at_target[p] - target).dot(dir));
    }
    standoff = -min_along + ms.lattice.particle_radius + rp;
  } else {
    const int goal = world->disc_dof(0);
    goal_from = Point2(x0[goal], x0[goal + 1]);
    dir = unit_or_x(target - goal_from);
    weigh(goal, cp.goal_position, cp.goal_velocity);
    tracks.push_back({goal, goal_from, target});
    success.x_dofs.push_back(goal);
    for (int i = 1; i < world->num_discs(); ++i) {
      weigh(world->disc_dof(i), cp.distractor_position, cp.distractor_velocity);
    }
    standoff = ms.disc.radius + rp;
    if (ms.kind == kSoftRigidKind) {
      const auto shape = lattice_rest_positions(ms.lattice, Point2::Zero());
      double lo = 0.0;
      double hi = 0.0;
      for (const Point2& p : shape) {
        lo = std::min(lo, p.dot(dir));
        hi = std::max(hi, p.dot(dir));
      }
      standoff += (hi - lo) + 2.0 * ms.lattice.particle_radius;
      const int first = world->lattice_dof(0);
      for (int p = 0; p < ms.lattice.particles; ++p) weigh(first + 2 * p, cp.lattice_position, 0.0);
    }
  }
  weigh(0, cp.pusher_position, cp.pusher_velocity);
  tracks.push_back({0, goal_from - dir * standoff, target - dir * standoff});

  // Straight-line reference at goal_speed, then held at the end point.
  const double distance = (target - goal_from).norm();
  const double dt = config.mpc.timestep;
  const double duration = cp.goal_speed > 0.0 ? distance / cp.goal_speed : 0.0;
  const std::size_t moving_steps = static_cast<std::size_t>(std::ceil(duration / dt));
  std::vector<Vector> desired;
  for (std::size_t t = 0; t <= moving_steps; ++t) {
    const double s = moving_steps == 0 ? 1.0 : static_cast<double>(t) / static_cast<double>(moving_steps);
    const bool moving = t < moving_steps;
    Vector d = rest;
    for (const Track& tr : tracks) {
      const Point2 p = tr.from + s * (tr.to - tr.from);
      d[tr.dof] = p.x();
      d[tr.dof + 1] = p.y();
      if (moving && duration > 0.0) {
        const Point2 v = (tr.to - tr.from) / duration;
        d[n + tr.dof] = v.x();
        d[n + tr.dof + 1] = v.y();
      }
    }
    desired.push_back(std::move(d));
  }

  MpcTask task;
  task.model = world;
  task.x0 = x0;
  task.cost.state_weights = w;
  task.cost.terminal_weights = cp.terminal_scale * w;
  task.cost.control_weights = Vector::Constant(world->control_dim(), cp.control);
  task.cost.desired = std::move(desired);
  task.cost.validate(world->state_size(), world->control_dim());
  task.success = success;
  return task;
}

MpcConfig build_mpc_config(const TaskConfig& config, const MethodSpec& method, std::uint64_t seed) {
  MpcConfig mc;
  mc.horizon = config.mpc.horizon;
  mc.timestep = config.mpc.timestep;
  mc.timeout = config.mpc.timeout;
  mc.slowdown = config.mpc.slowdown;
  mc.mode = config.mpc.mode;
  mc.virtual_cost_per_eval = config.mpc.virtual_cost_per_eval;
  mc.policy = method.policy(seed);
  mc.validate();
  return mc;
}

}  // namespace svr
