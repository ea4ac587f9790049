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

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "svr/experiment.hpp"

namespace svr {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool is_sweep_row(const AggregateRow& a) {
  return a.method.method == Method::kSvrSum || a.method.method == Method::kSvrSvd;
}

const char* kPalette[] = {"#1b6ca8", "#d1495b", "#00798c", "#edae49", "#66a182", "#8d6a9f"};

// One panel of the sweep figure: categorical rho axis, one polyline per series.
void svg_panel(std::ostream& out, double top, const std::string& title,
               const std::vector<double>& rhos,
               const std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>>& series) {
  const double left = 60.0, width = 520.0, height = 200.0;
  double lo = 1e300, hi = -1e300;
  for (const auto& [name, pts] : series) {
    for (const auto& [rho, y] : pts) {
      lo = std::min(lo, y);
      hi = std::max(hi, y);
    }
  }
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  auto xpos = [&](double rho) {
    const auto it = std::find(rhos.begin(), rhos.end(), rho);
    const double i = static_cast<double>(it - rhos.begin());
    return rhos.size() > 1 ? left + width * i / static_cast<double>(rhos.size() - 1) : left + width / 2;
  };
  auto ypos = [&](double y) { return top + height * (1.0 - (y - lo) / (hi - lo)); };

  out << fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444\"/>\n", left,
                     top, width, height);
  out << fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"13\">{}</text>\n", left, top - 8, title);
  out << fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"end\">{:.3g}</text>\n", left - 4,
                     top + 10, hi);
  out << fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"end\">{:.3g}</text>\n", left - 4,
                     top + height, lo);
  for (double rho : rhos) {
    out << fmt::format("<text x=\"{:.1f}\" y=\"{}\" font-size=\"10\" text-anchor=\"middle\">{:g}</text>\n",
                       xpos(rho), top + height + 14, rho);
  }
  std::size_t colour = 0;
  for (const auto& [name, pts] : series) {
    const char* c = kPalette[colour++ % std::size(kPalette)];
    std::string points;
    for (const auto& [rho, y] : pts) points += fmt::format("{:.1f},{:.1f} ", xpos(rho), ypos(y));
    out << fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\" points=\"{}\"/>\n", c, points);
    for (const auto& [rho, y] : pts) {
      out << fmt::format("<circle cx=\"{:.1f}\" cy=\"{:.1f}\" r=\"3\" fill=\"{}\"/>\n", xpos(rho), ypos(y), c);
    }
    out << fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"{}\">{}</text>\n", left + width + 10,
                       top + 14.0 * static_cast<double>(colour), c, name);
  }
}

}  // namespace

std::vector<AggregateRow> read_aggregate_csv(const std::filesystem::path& path) {
  const std::filesystem::path file = std::filesystem::is_directory(path) ? path / "aggregate.csv" : path;
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open report '" + file.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("report '" + file.string() + "' is empty");
  const std::vector<std::string> header = split_csv_line(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* key : {"label", "method", "theta", "rho", "mean_normalized", "mean_dofs"}) {
    if (!col.contains(key)) throw std::runtime_error(std::string("report is missing column '") + key + "'");
  }
  std::vector<AggregateRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw std::runtime_error(fmt::format("report line {}: expected {} cells", lineno, header.size()));
    }
    auto get = [&](const char* key) -> const std::string* {
      const auto it = col.find(key);
      return it == col.end() ? nullptr : &cells[it->second];
    };
    auto d = [&](const char* key, double fallback = 0.0) {
      const std::string* s = get(key);
      return s ? std::stod(*s) : fallback;
    };
    AggregateRow a;
    try {
      a.label = *get("label");
      const auto m = parse_method(*get("method"));
      if (!m) throw std::runtime_error("unknown method '" + *get("method") + "'");
      a.method.method = *m;
      a.method.theta = static_cast<int>(d("theta"));
      a.method.rho = d("rho");
      a.method.g = static_cast<int>(d("g", 3));
      a.method.signed_importance = d("signed") != 0.0;
      a.trials = static_cast<int>(d("trials"));
      a.failures = static_cast<int>(d("failures"));
      a.mean_cost = d("mean_cost");
      a.cost_ci = d("cost_ci");
      a.mean_normalized = d("mean_normalized");
      a.normalized_ci = d("normalized_ci");
      a.mean_tick_cost = d("mean_tick_cost");
      a.tick_cost_ci = d("tick_cost_ci");
      a.mean_dofs = d("mean_dofs");
      a.dofs_ci = d("dofs_ci");
      a.success_rate = d("success_rate");
    } catch (const std::logic_error& e) {
      throw std::runtime_error(fmt::format("report line {}: {}", lineno, e.what()));
    }
    rows.push_back(std::move(a));
  }
  return rows;
}

void emit_plot_data(const std::vector<AggregateRow>& rows, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::map<int, std::vector<AggregateRow>> by_theta;
  std::set<double> rho_set;
  for (const AggregateRow& a : rows) {
    if (!is_sweep_row(a)) continue;
    by_theta[a.method.theta].push_back(a);
    rho_set.insert(a.method.rho);
  }
  for (auto& [theta, series] : by_theta) {
    std::stable_sort(series.begin(), series.end(), [](const AggregateRow& a, const AggregateRow& b) {
      return a.method.rho < b.method.rho;
    });
    std::ofstream out(dir / fmt::format("sweep_{}.csv", theta), std::ios::binary);
    out << "method,theta,rho,mean_normalized,normalized_ci,mean_dofs,dofs_ci\n";
    for (const AggregateRow& a : series) {
      out << fmt::format("{},{},{:.10g},{:.10g},{:.10g},{:.10g},{:.10g}\n", method_name(a.method.method), theta,
                         a.method.rho, a.mean_normalized, a.normalized_ci, a.mean_dofs, a.dofs_ci);
    }
  }

  std::ofstream svg(dir / "plot.svg", std::ios::binary);
  if (by_theta.empty()) return;
  const std::vector<double> rhos(rho_set.begin(), rho_set.end());
  using Series = std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>>;
  Series cost, dofs;
  for (const auto& [theta, series] : by_theta) {
    std::map<std::string, std::vector<const AggregateRow*>> by_method;
    for (const AggregateRow& a : series) by_method[std::string(method_name(a.method.method))].push_back(&a);
    for (const auto& [method, points] : by_method) {
      const std::string name = by_method.size() > 1 ? fmt::format("{} theta={}", method, theta)
                                                    : fmt::format("theta={}", theta);
      std::vector<std::pair<double, double>> c, d;
      for (const AggregateRow* a : points) {
        c.emplace_back(a->method.rho, a->mean_normalized);
        d.emplace_back(a->method.rho, a->mean_dofs);
      }
      cost.emplace_back(name, std::move(c));
      dofs.emplace_back(name, std::move(d));
    }
  }
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"560\" font-family=\"sans-serif\">\n";
  svg << "<rect width=\"720\" height=\"560\" fill=\"white\"/>\n";
  svg_panel(svg, 40.0, "normalized MPC cost vs rho", rhos, cost);
  svg_panel(svg, 310.0, "mean |C| vs rho", rhos, dofs);
  svg << "</svg>\n";
}

std::string format_table(const std::vector<AggregateRow>& rows) {
  std::string out = fmt::format("{:<34} {:>8} {:>20} {:>18} {:>10} {:>8} {:>6}\n", "method", "trials",
                                "norm. cost (90% CI)", "opt ticks (CI)", "wall ms", "mean |C|", "succ");
  for (const AggregateRow& a : rows) {
    out += fmt::format("{:<34} {:>8} {:>11.4f} ± {:<6.4f} {:>9.2f} ± {:<6.2f} {:>10.3f} {:>8.2f} {:>6.2f}\n",
                       a.label, fmt::format("{}/{}", a.trials - a.failures, a.trials), a.mean_normalized,
                       a.normalized_ci, a.mean_tick_cost, a.tick_cost_ci, a.mean_wallclock_ms, a.mean_dofs,
                       a.success_rate);
  }
  return out;
}

}  // namespace svr
