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

#include "svr/svr.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "svr/experiment.hpp"
#include "svr/task.hpp"

struct svr_task {
  svr::TaskConfig config;
};

struct svr_record {
  svr::MpcRecord record;
};

struct svr_report {
  std::vector<svr::AggregateRow> rows;
};

namespace {

thread_local std::string g_last_error;

svr_status fail(svr_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

// Maps exceptions escaping the core onto status codes.
template <typename F>
svr_status guarded(F&& body) {
  try {
    return body();
  } catch (const svr::ConfigError& e) {
    return fail(SVR_ERR_CONFIG, e.what());
  } catch (const svr::NumericalError& e) {
    return fail(SVR_ERR_NUMERICAL, e.what());
  } catch (const svr::InvalidArgument& e) {
    return fail(SVR_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(SVR_ERR_IO, e.what());
  } catch (const std::out_of_range& e) {
    return fail(SVR_ERR_OUT_OF_RANGE, e.what());
  } catch (const std::bad_alloc&) {
    return fail(SVR_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SVR_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(SVR_ERR_INTERNAL, "unknown error");
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

svr::Method to_method(svr_method m) {
  switch (m) {
    case SVR_METHOD_BASELINE_FULL: return svr::Method::kBaselineFull;
    case SVR_METHOD_RANDOM: return svr::Method::kRandom;
    case SVR_METHOD_NAIVE: return svr::Method::kNaive;
    case SVR_METHOD_SVR_SUM: return svr::Method::kSvrSum;
    case SVR_METHOD_SVR_SVD: return svr::Method::kSvrSvd;
  }
  throw svr::InvalidArgument("unknown method code");
}

svr_method from_method(svr::Method m) {
  switch (m) {
    case svr::Method::kBaselineFull: return SVR_METHOD_BASELINE_FULL;
    case svr::Method::kRandom: return SVR_METHOD_RANDOM;
    case svr::Method::kNaive: return SVR_METHOD_NAIVE;
    case svr::Method::kSvrSum: return SVR_METHOD_SVR_SUM;
    case svr::Method::kSvrSvd: return SVR_METHOD_SVR_SVD;
  }
  return SVR_METHOD_BASELINE_FULL;
}

svr::ExperimentOptions to_options(const svr_experiment_options* o, std::optional<std::filesystem::path>& dir) {
  svr::ExperimentOptions out;
  if (o == nullptr) return out;
  if (o->trials < 0) throw svr::InvalidArgument("trials must be >= 0");
  out.trials = o->trials;
  if (o->has_seed) out.seed = o->seed;
  out.jobs = o->jobs;
  out.keep_records = o->keep_records != 0;
  if (o->out_dir != nullptr) dir = std::filesystem::path(o->out_dir);
  return out;
}

#define SVR_REQUIRE(cond, what) \
  if (!(cond)) return fail(SVR_ERR_INVALID_ARGUMENT, what)

}  // namespace

extern "C" {

const char* svr_last_error(void) { return g_last_error.c_str(); }

const char* svr_version(void) { return "0.1.0"; }

const char* svr_status_name(svr_status status) {
  switch (status) {
    case SVR_OK: return "ok";
    case SVR_ERR_INVALID_ARGUMENT: return "invalid argument";
    case SVR_ERR_CONFIG: return "configuration error";
    case SVR_ERR_IO: return "i/o error";
    case SVR_ERR_NUMERICAL: return "numerical error";
    case SVR_ERR_OUT_OF_RANGE: return "out of range";
    case SVR_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void svr_string_free(char* s) { std::free(s); }

svr_status svr_method_parse(const char* name, svr_method* out) {
  SVR_REQUIRE(name != nullptr && out != nullptr, "svr_method_parse: null argument");
  const auto m = svr::parse_method(name);
  if (!m) return fail(SVR_ERR_CONFIG, std::string("unknown method '") + name + "'");
  *out = from_method(*m);
  return SVR_OK;
}

const char* svr_method_name(svr_method method) {
  switch (method) {
    case SVR_METHOD_BASELINE_FULL:
    case SVR_METHOD_RANDOM:
    case SVR_METHOD_NAIVE:
    case SVR_METHOD_SVR_SUM:
    case SVR_METHOD_SVR_SVD:
      return svr::method_name(to_method(method)).data();
  }
  return "unknown";
}

size_t svr_builtin_task_count(void) { return svr::builtin_tasks().size(); }

svr_status svr_builtin_task_name(size_t index, const char** name) {
  SVR_REQUIRE(name != nullptr, "svr_builtin_task_name: null argument");
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& t : svr::builtin_tasks()) out.push_back(t.name);
    return out;
  }();
  if (index >= names.size()) return fail(SVR_ERR_OUT_OF_RANGE, "built-in task index out of range");
  *name = names[index].c_str();
  return SVR_OK;
}

svr_status svr_task_builtin(const char* name, svr_task** out) {
  SVR_REQUIRE(name != nullptr && out != nullptr, "svr_task_builtin: null argument");
  return guarded([&] {
    *out = new svr_task{svr::builtin_task(name)};
    return SVR_OK;
  });
}

svr_status svr_task_parse(const char* json_text, svr_task** out) {
  SVR_REQUIRE(json_text != nullptr && out != nullptr, "svr_task_parse: null argument");
  return guarded([&] {
    *out = new svr_task{svr::parse_task_config(json_text)};
    return SVR_OK;
  });
}

svr_status svr_task_load(const char* path, svr_task** out) {
  SVR_REQUIRE(path != nullptr && out != nullptr, "svr_task_load: null argument");
  return guarded([&] {
    if (!std::filesystem::exists(path)) return fail(SVR_ERR_IO, std::string("no such file '") + path + "'");
    *out = new svr_task{svr::load_task_config(path)};
    return SVR_OK;
  });
}

svr_status svr_task_save(const svr_task* task, const char* path) {
  SVR_REQUIRE(task != nullptr && path != nullptr, "svr_task_save: null argument");
  return guarded([&] {
    std::ofstream f(path, std::ios::binary);
    if (!f) return fail(SVR_ERR_IO, std::string("cannot write '") + path + "'");
    f << svr::serialize_task_config(task->config);
    return SVR_OK;
  });
}

svr_status svr_task_to_json(const svr_task* task, char** out) {
  SVR_REQUIRE(task != nullptr && out != nullptr, "svr_task_to_json: null argument");
  return guarded([&] {
    *out = copy_string(svr::serialize_task_config(task->config));
    return SVR_OK;
  });
}

void svr_task_free(svr_task* task) { delete task; }

svr_status svr_task_describe(const svr_task* task, svr_task_info* out) {
  SVR_REQUIRE(task != nullptr && out != nullptr, "svr_task_describe: null argument");
  return guarded([&] {
    const svr::TaskConfig& c = task->config;
    const svr::MpcTask built = svr::build_task(c, 0);
    *out = svr_task_info{};
    out->name = c.name.c_str();
    out->kind = c.model.kind.c_str();
    out->dofs = built.model->layout().total();
    out->robot_dofs = built.model->layout().robot_dofs();
    out->control_dim = built.model->control_dim();
    out->horizon = c.mpc.horizon;
    out->timestep = c.mpc.timestep;
    out->timeout = c.mpc.timeout;
    out->slowdown = c.mpc.slowdown;
    out->virtual_cost_per_eval = c.mpc.virtual_cost_per_eval;
    out->trials = c.trials;
    out->seed = c.seed;
    out->method_count = c.methods.size();
    return SVR_OK;
  });
}

svr_status svr_task_set_cost_per_eval(svr_task* task, double ticks_per_eval) {
  SVR_REQUIRE(task != nullptr, "svr_task_set_cost_per_eval: null task");
  SVR_REQUIRE(ticks_per_eval >= 0.0, "virtual cost per evaluation must be >= 0");
  task->config.mpc.virtual_cost_per_eval = ticks_per_eval;
  return SVR_OK;
}

svr_policy svr_policy_default(void) {
  svr_policy p{};
  p.method = SVR_METHOD_BASELINE_FULL;
  p.theta = 10;
  p.rho = 1.0;
  p.g = 3;
  p.signed_importance = 0;
  return p;
}

svr_status svr_task_run(const svr_task* task, const svr_policy* policy, uint64_t seed, svr_record** out) {
  SVR_REQUIRE(task != nullptr && policy != nullptr && out != nullptr, "svr_task_run: null argument");
  return guarded([&] {
    svr::MethodSpec m;
    m.method = to_method(policy->method);
    m.theta = policy->theta;
    m.rho = policy->rho;
    m.g = policy->g;
    m.signed_importance = policy->signed_importance != 0;
    const svr::MpcTask built = svr::build_task(task->config, seed);
    const svr::MpcConfig mc = svr::build_mpc_config(task->config, m, seed);
    auto rec = std::make_unique<svr_record>();
    rec->record = svr::run_mpc(mc, built);
    *out = rec.release();
    return SVR_OK;
  });
}

svr_status svr_record_summary_get(const svr_record* record, svr_record_summary* out) {
  SVR_REQUIRE(record != nullptr && out != nullptr, "svr_record_summary_get: null argument");
  const svr::MpcRecord& r = record->record;
  *out = svr_record_summary{};
  out->steps = r.steps();
  out->iterations = static_cast<int>(r.iterations.size());
  out->mpc_cost = r.mpc_cost;
  out->success = r.success ? 1 : 0;
  out->success_step = r.success_step.value_or(-1);
  out->diverged = r.diverged ? 1 : 0;
  out->mean_dofs = r.mean_dofs();
  out->mean_tick_cost = r.mean_tick_cost();
  out->state_size = r.states.empty() ? 0 : static_cast<int>(r.states.front().size());
  out->control_dim = r.controls.empty() ? 0 : static_cast<int>(r.controls.front().size());
  return SVR_OK;
}

svr_status svr_record_state(const svr_record* record, int step, double* buf, size_t len) {
  SVR_REQUIRE(record != nullptr && buf != nullptr, "svr_record_state: null argument");
  const auto& states = record->record.states;
  if (step < 0 || static_cast<size_t>(step) >= states.size()) return fail(SVR_ERR_OUT_OF_RANGE, "step out of range");
  const svr::Vector& x = states[static_cast<size_t>(step)];
  if (len < static_cast<size_t>(x.size())) return fail(SVR_ERR_INVALID_ARGUMENT, "state buffer too small");
  std::memcpy(buf, x.data(), sizeof(double) * static_cast<size_t>(x.size()));
  return SVR_OK;
}

svr_status svr_record_control(const svr_record* record, int step, double* buf, size_t len) {
  SVR_REQUIRE(record != nullptr && buf != nullptr, "svr_record_control: null argument");
  const auto& controls = record->record.controls;
  if (step < 0 || static_cast<size_t>(step) >= controls.size()) {
    return fail(SVR_ERR_OUT_OF_RANGE, "step out of range");
  }
  const svr::Vector& u = controls[static_cast<size_t>(step)];
  if (len < static_cast<size_t>(u.size())) return fail(SVR_ERR_INVALID_ARGUMENT, "control buffer too small");
  std::memcpy(buf, u.data(), sizeof(double) * static_cast<size_t>(u.size()));
  return SVR_OK;
}

svr_status svr_record_iteration_dofs(const svr_record* record, int index, int* out) {
  SVR_REQUIRE(record != nullptr && out != nullptr, "svr_record_iteration_dofs: null argument");
  const auto& its = record->record.iterations;
  if (index < 0 || static_cast<size_t>(index) >= its.size()) {
    return fail(SVR_ERR_OUT_OF_RANGE, "iteration out of range");
  }
  *out = its[static_cast<size_t>(index)].dofs_optimised;
  return SVR_OK;
}

svr_status svr_record_save_json(const svr_record* record, const char* path) {
  SVR_REQUIRE(record != nullptr && path != nullptr, "svr_record_save_json: null argument");
  return guarded([&] {
    std::ofstream f(path, std::ios::binary);
    if (!f) return fail(SVR_ERR_IO, std::string("cannot write '") + path + "'");
    f << svr::record_to_json(record->record);
    return SVR_OK;
  });
}

void svr_record_free(svr_record* record) { delete record; }

svr_experiment_options svr_experiment_options_default(void) {
  svr_experiment_options o{};
  o.trials = 0;
  o.has_seed = 0;
  o.seed = 0;
  o.jobs = 1;
  o.keep_records = 0;
  o.out_dir = nullptr;
  return o;
}

svr_status svr_experiment_run(const svr_task* task, const svr_experiment_options* options, svr_report** out) {
  SVR_REQUIRE(task != nullptr && out != nullptr, "svr_experiment_run: null argument");
  return guarded([&] {
    std::optional<std::filesystem::path> dir;
    const svr::ExperimentOptions opts = to_options(options, dir);
    svr::ExperimentReport report = svr::run_experiment(task->config, opts, dir);
    *out = new svr_report{std::move(report.aggregate)};
    return SVR_OK;
  });
}

svr_status svr_experiment_sweep(const svr_task* task, const int* thetas, size_t theta_count, const double* rhos,
                                size_t rho_count, const svr_experiment_options* options, svr_report** out) {
  SVR_REQUIRE(task != nullptr && out != nullptr, "svr_experiment_sweep: null argument");
  SVR_REQUIRE(theta_count == 0 || thetas != nullptr, "svr_experiment_sweep: null theta list");
  SVR_REQUIRE(rho_count == 0 || rhos != nullptr, "svr_experiment_sweep: null rho list");
  return guarded([&] {
    svr::TaskConfig config = task->config;
    if (theta_count > 0) config.sweep.thetas.assign(thetas, thetas + theta_count);
    if (rho_count > 0) config.sweep.rhos.assign(rhos, rhos + rho_count);
    config.validate();
    std::optional<std::filesystem::path> dir;
    const svr::ExperimentOptions opts = to_options(options, dir);
    svr::ExperimentReport report = svr::run_sweep(config, opts, dir);
    *out = new svr_report{std::move(report.aggregate)};
    return SVR_OK;
  });
}

svr_status svr_report_load(const char* path, svr_report** out) {
  SVR_REQUIRE(path != nullptr && out != nullptr, "svr_report_load: null argument");
  return guarded([&] {
    const std::filesystem::path p(path);
    if (!std::filesystem::exists(p)) return fail(SVR_ERR_IO, std::string("no such report '") + path + "'");
    auto rows = svr::read_aggregate_csv(p);
    *out = new svr_report{std::move(rows)};
    return SVR_OK;
  });
}

size_t svr_report_row_count(const svr_report* report) { return report == nullptr ? 0 : report->rows.size(); }

svr_status svr_report_row(const svr_report* report, size_t index, svr_aggregate_row* out) {
  SVR_REQUIRE(report != nullptr && out != nullptr, "svr_report_row: null argument");
  if (index >= report->rows.size()) return fail(SVR_ERR_OUT_OF_RANGE, "report row out of range");
  const svr::AggregateRow& a = report->rows[index];
  *out = svr_aggregate_row{};
  out->label = a.label.c_str();
  out->method = from_method(a.method.method);
  out->theta = a.method.theta;
  out->rho = a.method.rho;
  out->trials = a.trials;
  out->failures = a.failures;
  out->mean_cost = a.mean_cost;
  out->cost_ci = a.cost_ci;
  out->mean_normalized = a.mean_normalized;
  out->normalized_ci = a.normalized_ci;
  out->mean_tick_cost = a.mean_tick_cost;
  out->tick_cost_ci = a.tick_cost_ci;
  out->mean_wallclock_ms = a.mean_wallclock_ms;
  out->mean_dofs = a.mean_dofs;
  out->dofs_ci = a.dofs_ci;
  out->success_rate = a.success_rate;
  return SVR_OK;
}

svr_status svr_report_table(const svr_report* report, char** out) {
  SVR_REQUIRE(report != nullptr && out != nullptr, "svr_report_table: null argument");
  return guarded([&] {
    *out = copy_string(svr::format_table(report->rows));
    return SVR_OK;
  });
}

svr_status svr_report_emit_plot(const svr_report* report, const char* dir) {
  SVR_REQUIRE(report != nullptr && dir != nullptr, "svr_report_emit_plot: null argument");
  return guarded([&] {
    svr::emit_plot_data(report->rows, dir);
    return SVR_OK;
  });
}

void svr_report_free(svr_report* report) { delete report; }

char* svr_default_output_dir(void) {
  try {
    return copy_string(svr::default_output_dir().string());
  } catch (...) {
    return nullptr;
  }
}

}  // extern "C"
