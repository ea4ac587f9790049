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

#ifndef SVR_EXPERIMENT_HPP_
#define SVR_EXPERIMENT_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "svr/mpc.hpp"
#include "svr/task.hpp"

namespace svr {

// One (method, trial) outcome. A failed trial (divergence or a numerical
// error) keeps its row and flag but is excluded from means.
struct TrialRow {
  std::string label;
  MethodSpec method;
  int trial = 0;
  std::uint64_t seed = 0;
  double mpc_cost = 0.0;
  double normalized_cost = 0.0;
  double mean_tick_cost = 0.0;  // virtual ticks (or measured ticks in real mode)
  double mean_wallclock_ms = 0.0;
  double mean_dofs = 0.0;
  int iterations = 0;
  int steps = 0;
  bool success = false;
  bool failed = false;
};

struct AggregateRow {
  std::string label;
  MethodSpec method;
  int trials = 0;
  int failures = 0;
  double mean_cost = 0.0;
  double cost_ci = 0.0;
  double mean_normalized = 0.0;
  double normalized_ci = 0.0;
  double mean_tick_cost = 0.0;
  double tick_cost_ci = 0.0;
  double mean_wallclock_ms = 0.0;
  double mean_dofs = 0.0;
  double dofs_ci = 0.0;
  double success_rate = 0.0;
};

struct ExperimentReport {
  std::string task;
  double baseline_mean = 0.0;
  std::vector<TrialRow> trials;
  std::vector<AggregateRow> aggregate;
};

struct ExperimentOptions {
  int trials = 0;  // 0: use the config's count
  std::optional<std::uint64_t> seed;  // default: the config's seed base
  int jobs = 1;
  bool keep_records = false;  // write record_<label>_<trial>.json
};

// 1.645 * sample standard deviation / sqrt(n); zero for n < 2.
double ci90(const std::vector<double>& values);

// The methods run by a sweep, in (theta, rho) order.
std::vector<MethodSpec> sweep_methods(const SweepSpec& sweep);

// Runs one trial of one method.
struct TrialOutcome {
  TrialRow row;
  MpcRecord record;
};
TrialOutcome run_trial(const TaskConfig& config, const MethodSpec& method, int trial, std::uint64_t seed);

// Normalizes every row by the baseline-full mean of non-failed trials; rows
// must contain at least one successful baseline-full trial.
void normalize(std::vector<TrialRow>& rows);

// Per-method means and 90% confidence intervals; a pure function of the rows,
// in first-appearance order.
std::vector<AggregateRow> aggregate(const std::vector<TrialRow>& rows);

// Runs every method of `config` (baseline-full is added when missing) over
// seeds base + i. Writes CSVs to `out_dir` when given.
ExperimentReport run_experiment(const TaskConfig& config, const ExperimentOptions& options,
                                const std::optional<std::filesystem::path>& out_dir = std::nullopt);

// Replaces the method list with the sweep grid and runs it.
ExperimentReport run_sweep(TaskConfig config, const ExperimentOptions& options,
                           const std::optional<std::filesystem::path>& out_dir = std::nullopt);

// CSV writers. Trial and aggregate files hold no wall-clock values so they are
// reproducible byte for byte; timing lives in its own file.
void write_trials_csv(const ExperimentReport& report, std::ostream& out);
void write_aggregate_csv(const ExperimentReport& report, std::ostream& out);
void write_timing_csv(const ExperimentReport& report, std::ostream& out);
void write_report(const ExperimentReport& report, const std::filesystem::path& dir);

std::vector<AggregateRow> read_aggregate_csv(const std::filesystem::path& path);

// Plot-ready series: sweep_<theta>.csv per theta and plot.svg.
void emit_plot_data(const std::vector<AggregateRow>& rows, const std::filesystem::path& dir);

// Table 1 style summary.
std::string format_table(const std::vector<AggregateRow>& rows);

std::string record_to_json(const MpcRecord& record);

// $SVR_OUT_DIR, else ./svr_out.
std::filesystem::path default_output_dir();

}  // namespace svr

#endif  // SVR_EXPERIMENT_HPP_
