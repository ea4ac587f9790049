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

// svr_bench: experiment runner over the libsvr C API.

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "svr/svr.h"

namespace {

struct Failure {
  int code;
};

void check(svr_status status, const char* what) {
  if (status != SVR_OK) {
    std::fprintf(stderr, "svr_bench: %s: %s (%s)\n", what, svr_last_error(), svr_status_name(status));
    throw Failure{static_cast<int>(status) + 1};
  }
}

// A config argument is a file path or the name of a built-in task.
svr_task* open_task(const std::string& ref) {
  svr_task* task = nullptr;
  if (std::filesystem::exists(ref)) {
    check(svr_task_load(ref.c_str(), &task), "loading config");
    return task;
  }
  for (size_t i = 0; i < svr_builtin_task_count(); ++i) {
    const char* name = nullptr;
    check(svr_builtin_task_name(i, &name), "listing tasks");
    if (ref == name) {
      check(svr_task_builtin(name, &task), "loading built-in task");
      return task;
    }
  }
  std::fprintf(stderr, "svr_bench: '%s' is neither a config file nor a built-in task\n", ref.c_str());
  throw Failure{2};
}

struct TaskGuard {
  svr_task* task;
  ~TaskGuard() { svr_task_free(task); }
};

struct ReportGuard {
  svr_report* report = nullptr;
  ~ReportGuard() { svr_report_free(report); }
};

void print_table(const svr_report* report) {
  char* text = nullptr;
  check(svr_report_table(report, &text), "formatting report");
  std::fputs(text, stdout);
  svr_string_free(text);
}

std::string output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  char* dir = svr_default_output_dir();
  std::string out = dir != nullptr ? dir : "svr_out";
  svr_string_free(dir);
  return out;
}

struct RunArgs {
  std::string config;
  int trials = 0;
  std::optional<std::uint64_t> seed;
  std::string out;
  int jobs = 1;
  bool records = false;
  std::optional<double> cost_per_eval;
};

void add_run_flags(CLI::App* cmd, RunArgs& a) {
  cmd->add_option("config", a.config, "config file or built-in task name")->required();
  cmd->add_option("--trials", a.trials, "trials per method (default: from config)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--seed", a.seed, "seed base; trial i uses seed + i");
  cmd->add_option("--out", a.out, "output directory (default: $SVR_OUT_DIR or ./svr_out)");
  cmd->add_option("--jobs", a.jobs, "parallel trials")->check(CLI::PositiveNumber);
  cmd->add_flag("--records", a.records, "write one record_<label>_<trial>.json per trial");
  cmd->add_option("--cost-per-eval", a.cost_per_eval, "virtual agent ticks per dynamics evaluation")
      ->check(CLI::NonNegativeNumber);
}

svr_experiment_options make_options(const RunArgs& a, const std::string& dir) {
  svr_experiment_options o = svr_experiment_options_default();
  o.trials = a.trials;
  o.has_seed = a.seed.has_value() ? 1 : 0;
  o.seed = a.seed.value_or(0);
  o.jobs = a.jobs;
  o.keep_records = a.records ? 1 : 0;
  o.out_dir = dir.c_str();
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"iLQR with online state vector reduction: MPC experiment runner"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(svr_version()));

  RunArgs run_args;
  CLI::App* run = app.add_subcommand("run", "run every method of a config over seeded trials");
  add_run_flags(run, run_args);

  RunArgs sweep_args;
  std::vector<int> thetas;
  std::vector<double> rhos;
  CLI::App* sweep = app.add_subcommand("sweep", "run a theta x rho grid of the config's sweep method");
  add_run_flags(sweep, sweep_args);
  sweep->add_option("--theta", thetas, "reintroduction counts (default: from config)");
  sweep->add_option("--rho", rhos, "removal thresholds (default: from config)");

  std::string plot_report;
  std::string plot_out;
  CLI::App* plot = app.add_subcommand("plot", "turn an aggregate.csv into sweep series and plot.svg");
  plot->add_option("report", plot_report, "aggregate.csv or the directory holding it")->required();
  plot->add_option("--out", plot_out, "output directory (default: the report's directory)");

  CLI::App* tasks = app.add_subcommand("tasks", "built-in tasks");
  tasks->require_subcommand(1);
  CLI::App* tasks_list = tasks->add_subcommand("list", "list built-in tasks");
  std::string show_name;
  CLI::App* tasks_show = tasks->add_subcommand("show", "print a task config as JSON");
  tasks_show->add_option("task", show_name, "config file or built-in task name")->required();

  std::string ep_config;
  std::string ep_method = "baseline-full";
  int ep_theta = 10;
  double ep_rho = 1.0;
  int ep_g = 3;
  std::uint64_t ep_seed = 0;
  std::string ep_record;
  CLI::App* episode = app.add_subcommand("episode", "run one MPC episode and print its summary");
  episode->add_option("config", ep_config, "config file or built-in task name")->required();
  episode->add_option("--method", ep_method, "baseline-full | random | naive | svr-sum | svr-svd");
  episode->add_option("--theta", ep_theta, "DoFs reintroduced per iteration")->check(CLI::NonNegativeNumber);
  episode->add_option("--rho", ep_rho, "removal threshold")->check(CLI::NonNegativeNumber);
  episode->add_option("--g", ep_g, "singular values used by svr-svd")->check(CLI::PositiveNumber);
  episode->add_option("--seed", ep_seed, "model and planner seed");
  episode->add_option("--record", ep_record, "write the MpcRecord as JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run || *sweep) {
      RunArgs& a = *run ? run_args : sweep_args;
      TaskGuard task{open_task(a.config)};
      if (a.cost_per_eval) check(svr_task_set_cost_per_eval(task.task, *a.cost_per_eval), "setting cost per eval");
      const std::string dir = output_dir(a.out);
      const svr_experiment_options o = make_options(a, dir);
      ReportGuard report;
      if (*run) {
        check(svr_experiment_run(task.task, &o, &report.report), "running experiment");
      } else {
        check(svr_experiment_sweep(task.task, thetas.data(), thetas.size(), rhos.data(), rhos.size(), &o,
                                   &report.report),
              "running sweep");
      }
      print_table(report.report);
      std::printf("wrote %s\n", dir.c_str());
    } else if (*plot) {
      ReportGuard report;
      check(svr_report_load(plot_report.c_str(), &report.report), "reading report");
      std::filesystem::path dir = plot_out;
      if (dir.empty()) {
        const std::filesystem::path p(plot_report);
        dir = std::filesystem::is_directory(p) ? p : p.parent_path();
        if (dir.empty()) dir = ".";
      }
      check(svr_report_emit_plot(report.report, dir.string().c_str()), "writing plot data");
      print_table(report.report);
      std::printf("wrote %s\n", dir.string().c_str());
    } else if (*tasks_list) {
      for (size_t i = 0; i < svr_builtin_task_count(); ++i) {
        const char* name = nullptr;
        check(svr_builtin_task_name(i, &name), "listing tasks");
        svr_task* t = nullptr;
        check(svr_task_builtin(name, &t), "loading built-in task");
        TaskGuard guard{t};
        svr_task_info info;
        check(svr_task_describe(t, &info), "describing task");
        std::printf("%-12s |F|=%-4d T=%-4d dt=%g Y=%-5d slowdown=%d trials=%d\n", info.name, info.dofs,
                    info.horizon, info.timestep, info.timeout, info.slowdown, info.trials);
      }
    } else if (*tasks_show) {
      TaskGuard task{open_task(show_name)};
      char* text = nullptr;
      check(svr_task_to_json(task.task, &text), "serializing task");
      std::fputs(text, stdout);
      svr_string_free(text);
    } else if (*episode) {
      TaskGuard task{open_task(ep_config)};
      svr_policy policy = svr_policy_default();
      check(svr_method_parse(ep_method.c_str(), &policy.method), "parsing method");
      policy.theta = ep_theta;
      policy.rho = ep_rho;
      policy.g = ep_g;
      svr_record* record = nullptr;
      check(svr_task_run(task.task, &policy, ep_seed, &record), "running episode");
      svr_record_summary s;
      svr_record_summary_get(record, &s);
      std::printf("steps=%d iterations=%d mpc_cost=%.6g success=%d success_step=%d diverged=%d mean_dofs=%.3f "
                  "mean_tick_cost=%.3f\n",
                  s.steps, s.iterations, s.mpc_cost, s.success, s.success_step, s.diverged, s.mean_dofs,
                  s.mean_tick_cost);
      svr_status st = SVR_OK;
      if (!ep_record.empty()) st = svr_record_save_json(record, ep_record.c_str());
      svr_record_free(record);
      check(st, "writing record");
    }
  } catch (const Failure& f) {
    return f.code;
  }
  return 0;
}
