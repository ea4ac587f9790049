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

#include "svr/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

namespace svr {
namespace {

std::string num(double v) { return fmt::format("{:.10g}", v); }

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double finite_or_zero(double v) { return std::isfinite(v) ? v : 0.0; }

std::string file_label(const std::string& label) {
  std::string out;
  for (char c : label) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.') {
      out += c;
    } else if (c == '=' ) {
      continue;
    } else {
      out += '_';
    }
  }
  return out;
}

void method_columns(std::ostream& out, const std::string& label, const MethodSpec& m) {
  out << label << ',' << method_name(m.method) << ',' << m.theta << ',' << num(m.rho) << ',' << m.g << ','
      << (m.signed_importance ? 1 : 0);
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

double ci90(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  const double mean = mean_of(values);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  return 1.645 * sd / std::sqrt(static_cast<double>(n));
}

std::vector<MethodSpec> sweep_methods(const SweepSpec& sweep) {
  std::vector<MethodSpec> out;
  for (int theta : sweep.thetas) {
    for (double rho : sweep.rhos) {
      MethodSpec m;
      m.method = sweep.method;
      m.theta = theta;
      m.rho = rho;
      out.push_back(m);
    }
  }
  return out;
}

TrialOutcome run_trial(const TaskConfig& config, const MethodSpec& method, int trial, std::uint64_t seed) {
  TrialOutcome out;
  TrialRow& row = out.row;
  row.label = method.label();
  row.method = method;
  row.trial = trial;
  row.seed = seed;
  try {
    const MpcTask task = build_task(config, seed);
    const MpcConfig mc = build_mpc_config(config, method, seed);
    out.record = run_mpc(mc, task);
    const MpcRecord& r = out.record;
    row.mpc_cost = finite_or_zero(r.mpc_cost);
    row.mean_tick_cost = r.mean_tick_cost();
    row.mean_wallclock_ms = r.mean_wallclock_ms();
    row.mean_dofs = r.mean_dofs();
    row.iterations = static_cast<int>(r.iterations.size());
    row.steps = r.steps();
    row.success = r.success;
    row.failed = r.diverged || !std::isfinite(r.mpc_cost);
  } catch (const NumericalError&) {
    row.failed = true;
  }
  return out;
}

void normalize(std::vector<TrialRow>& rows) {
  std::vector<double> base;
  for (const TrialRow& r : rows) {
    if (r.method.method == Method::kBaselineFull && !r.failed) base.push_back(r.mpc_cost);
  }
  if (base.empty()) throw std::runtime_error("normalize: no successful baseline-full trial");
  const double mean = mean_of(base);
  for (TrialRow& r : rows) {
    r.normalized_cost = (r.failed || mean == 0.0) ? 0.0 : r.mpc_cost / mean;
  }
}

std::vector<AggregateRow> aggregate(const std::vector<TrialRow>& rows) {
  std::vector<std::string> order;
  for (const TrialRow& r : rows) {
    if (std::find(order.begin(), order.end(), r.label) == order.end()) order.push_back(r.label);
  }
  std::vector<AggregateRow> out;
  for (const std::string& label : order) {
    AggregateRow a;
    a.label = label;
    std::vector<double> cost, norm, ticks, wall, dofs;
    int successes = 0;
    for (const TrialRow& r : rows) {
      if (r.label != label) continue;
      a.method = r.method;
      ++a.trials;
      if (r.failed) {
        ++a.failures;
        continue;
      }
      cost.push_back(r.mpc_cost);
      norm.push_back(r.normalized_cost);
      ticks.push_back(r.mean_tick_cost);
      wall.push_back(r.mean_wallclock_ms);
      dofs.push_back(r.mean_dofs);
      successes += r.success ? 1 : 0;
    }
    a.mean_cost = mean_of(cost);
    a.cost_ci = ci90(cost);
    a.mean_normalized = mean_of(norm);
    a.normalized_ci = ci90(norm);
    a.mean_tick_cost = mean_of(ticks);
    a.tick_cost_ci = ci90(ticks);
    a.mean_wallclock_ms = mean_of(wall);
    a.mean_dofs = mean_of(dofs);
    a.dofs_ci = ci90(dofs);
    a.success_rate = a.trials > 0 ? static_cast<double>(successes) / a.trials : 0.0;
    out.push_back(a);
  }
  return out;
}

ExperimentReport run_experiment(const TaskConfig& config, const ExperimentOptions& options,
                                const std::optional<std::filesystem::path>& out_dir) {
  config.validate();
  const int trials = options.trials > 0 ? options.trials : config.trials;
  const std::uint64_t seed_base = options.seed.value_or(config.seed);

  std::vector<MethodSpec> methods = config.methods;
  const bool has_baseline = std::any_of(methods.begin(), methods.end(),
                                        [](const MethodSpec& m) { return m.method == Method::kBaselineFull; });
  if (!has_baseline) methods.insert(methods.begin(), MethodSpec{});
  // Fail fast on configuration errors before any trial runs.
  for (const MethodSpec& m : methods) build_mpc_config(config, m, seed_base);
  build_task(config, seed_base);

  const std::size_t cells = methods.size() * static_cast<std::size_t>(trials);
  std::vector<TrialRow> rows(cells);
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (std::size_t i = next++; i < cells; i = next++) {
      const std::size_t mi = i / static_cast<std::size_t>(trials);
      const int trial = static_cast<int>(i % static_cast<std::size_t>(trials));
      try {
        TrialOutcome outcome = run_trial(config, methods[mi], trial, seed_base + static_cast<std::uint64_t>(trial));
        if (out_dir && options.keep_records) {
          std::ofstream rec = open_out(*out_dir / fmt::format("record_{}_{}.json", file_label(outcome.row.label), trial));
          rec << record_to_json(outcome.record);
        }
        rows[i] = std::move(outcome.row);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = cells;
      }
    }
  };
  if (out_dir) ensure_dir(*out_dir);
  const int jobs = std::max(1, options.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  ExperimentReport report;
  report.task = config.name;
  report.trials = std::move(rows);
  normalize(report.trials);
  std::vector<double> base;
  for (const TrialRow& r : report.trials) {
    if (r.method.method == Method::kBaselineFull && !r.failed) base.push_back(r.mpc_cost);
  }
  report.baseline_mean = mean_of(base);
  report.aggregate = aggregate(report.trials);
  if (out_dir) write_report(report, *out_dir);
  return report;
}

ExperimentReport run_sweep(TaskConfig config, const ExperimentOptions& options,
                           const std::optional<std::filesystem::path>& out_dir) {
  config.methods = sweep_methods(config.sweep);
  ExperimentReport report = run_experiment(config, options, out_dir);
  if (out_dir) emit_plot_data(report.aggregate, *out_dir);
  return report;
}

void write_trials_csv(const ExperimentReport& report, std::ostream& out) {
  out << "label,method,theta,rho,g,signed,trial,seed,mpc_cost,normalized_cost,mean_tick_cost,mean_dofs,"
         "iterations,steps,success,failed\n";
  for (const TrialRow& r : report.trials) {
    method_columns(out, r.label, r.method);
    out << ',' << r.trial << ',' << r.seed << ',' << num(r.mpc_cost) << ',' << num(r.normalized_cost) << ','
        << num(r.mean_tick_cost) << ',' << num(r.mean_dofs) << ',' << r.iterations << ',' << r.steps << ','
        << (r.success ? 1 : 0) << ',' << (r.failed ? 1 : 0) << '\n';
  }
}

void write_aggregate_csv(const ExperimentReport& report, std::ostream& out) {
  out << "label,method,theta,rho,g,signed,trials,failures,mean_cost,cost_ci,mean_normalized,normalized_ci,"
         "mean_tick_cost,tick_cost_ci,mean_dofs,dofs_ci,success_rate\n";
  for (const AggregateRow& a : report.aggregate) {
    method_columns(out, a.label, a.method);
    out << ',' << a.trials << ',' << a.failures << ',' << num(a.mean_cost) << ',' << num(a.cost_ci) << ','
        << num(a.mean_normalized) << ',' << num(a.normalized_ci) << ',' << num(a.mean_tick_cost) << ','
        << num(a.tick_cost_ci) << ',' << num(a.mean_dofs) << ',' << num(a.dofs_ci) << ','
        << num(a.success_rate) << '\n';
  }
}

void write_timing_csv(const ExperimentReport& report, std::ostream& out) {
  out << "label,trial,mean_wallclock_ms\n";
  for (const TrialRow& r : report.trials) {
    out << r.label << ',' << r.trial << ',' << num(r.mean_wallclock_ms) << '\n';
  }
}

void write_report(const ExperimentReport& report, const std::filesystem::path& dir) {
  ensure_dir(dir);
  {
    std::ofstream out = open_out(dir / "trials.csv");
    write_trials_csv(report, out);
  }
  {
    std::ofstream out = open_out(dir / "aggregate.csv");
    write_aggregate_csv(report, out);
  }
  std::ofstream out = open_out(dir / "timing.csv");
  write_timing_csv(report, out);
}

std::string record_to_json(const MpcRecord& record) {
  using nlohmann::json;
  auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  json states = json::array();
  for (const Vector& x : record.states) states.push_back(vec(x));
  json controls = json::array();
  for (const Vector& u : record.controls) controls.push_back(vec(u));
  json iterations = json::array();
  for (const IterationLog& it : record.iterations) {
    iterations.push_back({{"index", it.index},
                          {"dofs_before", it.dofs_before},
                          {"dofs_optimised", it.dofs_optimised},
                          {"dofs_after", it.dofs_after},
                          {"added", it.added},
                          {"removed", it.removed},
                          {"snapshot_step", it.snapshot_step},
                          {"publish_step", it.publish_step},
                          {"tick_cost", it.tick_cost},
                          {"published", it.published},
                          {"dynamics_evals", it.stats.dynamics_evals},
                          {"derivative_evals", it.stats.derivative_evals},
                          {"cost_before", finite_or_zero(it.stats.cost_before)},
                          {"cost_after", finite_or_zero(it.stats.cost_after)},
                          {"accepted_alpha", it.stats.accepted_alpha ? json(*it.stats.accepted_alpha) : json()},
                          {"backward_pass_failed", it.stats.backward_pass_failed},
                          {"wallclock_ms", 1e3 * it.stats.wallclock}});
  }
  json j = {{"steps", record.steps()},
            {"mpc_cost", finite_or_zero(record.mpc_cost)},
            {"success", record.success},
            {"success_step", record.success_step ? json(*record.success_step) : json()},
            {"diverged", record.diverged},
            {"states", states},
            {"controls", controls},
            {"iterations", iterations}};
  return j.dump() + "\n";
}

std::filesystem::path default_output_dir() {
  const char* env = std::getenv("SVR_OUT_DIR");
  return (env != nullptr && *env != '\0') ? std::filesystem::path(env) : std::filesystem::path("svr_out");
}

}  // namespace svr
