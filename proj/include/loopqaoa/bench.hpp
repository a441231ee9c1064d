#pragma once

// Experiment harness: conventional depth sweeps and loop sweeps over a batch
// of instances, per-instance CSV rows with an aggregate section, and plot
// data emission.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <thread>
#include <vector>

#include "loopqaoa/biasloop.hpp"
#include "loopqaoa/graph.hpp"
#include "loopqaoa/hamiltonian.hpp"
#include "loopqaoa/optimizer.hpp"
#include "loopqaoa/simulator.hpp"

namespace loopqaoa {

enum class ExperimentMode { qaoa_sweep, loop_qaoa };

inline std::string mode_tag(ExperimentMode m) { return m == ExperimentMode::qaoa_sweep ? "qaoa" : "loop"; }

struct ExperimentSpec {
  ExperimentMode mode = ExperimentMode::qaoa_sweep;
  std::vector<WeightedGraph> graphs;
  /// Depths 1..p_max for the sweep.
  int p_max = 1;
  /// Loop settings; its optimizer, noise and seed fields are overwritten
  /// from the fields below.
  LoopConfig loop;
  OptimizeConfig optimizer;
  NoiseModel noise;
  std::uint64_t seed = 0;
  /// Worker threads; 0 picks hardware concurrency.
  int workers = 0;
  /// Write measured wall time instead of 0 (output is then not reproducible).
  bool record_timing = false;
  /// Abort when more than this fraction of instances fail.
  double max_failure_fraction = 0.1;
};

struct InstanceRow {
  int instance_id = 0;
  std::string mode;
  int x = 0;
  double tau = 0.0;
  double expectation = 0.0;
  double success_prob = 0.0;
  double approx_ratio = 0.0;
  bool clamped = false;
  double wall_ms = 0.0;

  friend bool operator==(const InstanceRow&, const InstanceRow&) = default;
};

struct AggregateRow {
  std::string mode;
  int x = 0;
  double mean_success_prob = 0.0;
  double std_success_prob = 0.0;
  double mean_approx_ratio = 0.0;
  double std_approx_ratio = 0.0;
  int count = 0;

  double stderr_success_prob() const { return count > 0 ? std_success_prob / std::sqrt(count) : 0.0; }
};

struct ExperimentResult {
  std::vector<InstanceRow> rows;
  std::vector<AggregateRow> aggregates;
  std::vector<std::string> warnings;
  int failed_instances = 0;
};

inline std::uint64_t instance_seed(std::uint64_t master, int instance_id) {
  return derive_seed(master, static_cast<std::uint64_t>(instance_id) + 0x10000);
}

/// Batch of generated instances; instance k uses derive_seed(seed, k).
inline std::vector<WeightedGraph> generate_instances(std::string_view family, int n, int count,
                                                     std::uint64_t seed) {
  std::vector<WeightedGraph> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(k));
    if (family == "w3r") out.push_back(generate_w3r(n, s));
    else if (family == "complete") out.push_back(generate_complete(n, s));
    else throw std::invalid_argument("unknown graph family: " + std::string(family));
  }
  return out;
}

/// Sample mean and standard deviation (n - 1 denominator; 0 for one value).
inline std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

/// Groups rows by (mode, x) in first-seen mode order and ascending x.
inline std::vector<AggregateRow> aggregate(const std::vector<InstanceRow>& rows) {
  std::vector<std::string> modes;
  std::map<std::pair<std::string, int>, std::pair<std::vector<double>, std::vector<double>>> groups;
  for (const auto& r : rows) {
    if (std::find(modes.begin(), modes.end(), r.mode) == modes.end()) modes.push_back(r.mode);
    auto& [ps, ar] = groups[{r.mode, r.x}];
    ps.push_back(r.success_prob);
    ar.push_back(r.approx_ratio);
  }
  std::vector<AggregateRow> out;
  for (const auto& m : modes) {
    for (const auto& [key, vals] : groups) {
      if (key.first != m) continue;
      const auto [mps, sps] = mean_std(vals.first);
      const auto [mar, sar] = mean_std(vals.second);
      out.push_back({m, key.second, mps, sps, mar, sar, static_cast<int>(vals.first.size())});
    }
  }
  return out;
}

namespace detail {

/// Runs `job(k)` for k in [0, count) on a bounded pool. Results land in
/// caller-owned slots, so completion order never shows in the output.
inline void parallel_for(int count, int workers, const std::function<void(int)>& job) {
  if (workers <= 0) workers = static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
  workers = std::min(workers, std::max(count, 1));
  if (workers == 1) {
    for (int k = 0; k < count; ++k) job(k);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::jthread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int k = next++; k < count; k = next++) job(k);
    });
}

inline double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

inline std::vector<InstanceRow> qaoa_instance(const ExperimentSpec& spec, int id) {
  const WeightedGraph& g = spec.graphs[static_cast<std::size_t>(id)];
  const ExactSolution exact = brute_force_solve(g);
  const DiagonalHamiltonian h = build_hamiltonian(g);
  const std::uint64_t seed = instance_seed(spec.seed, id);
  std::vector<InstanceRow> rows;
  for (int p = 1; p <= spec.p_max; ++p) {
    const auto t0 = std::chrono::steady_clock::now();
    OptimizeConfig ocfg = spec.optimizer;
    ocfg.seed = stage_seed(seed, p);
    const OptimizeResult res = minimize(h, p, ocfg, spec.noise);
    const OutputDistribution dist = circuit_distribution(h, res.params, spec.noise);
    rows.push_back({id, "qaoa", p, 0.0, res.value, success_probability(dist, exact),
                    approximation_ratio(dist, g, exact), false,
                    spec.record_timing ? elapsed_ms(t0) : 0.0});
  }
  return rows;
}

inline std::vector<InstanceRow> loop_instance(const ExperimentSpec& spec, int id) {
  const WeightedGraph& g = spec.graphs[static_cast<std::size_t>(id)];
  LoopConfig cfg = spec.loop;
  cfg.optimizer = spec.optimizer;
  cfg.noise = spec.noise;
  cfg.seed = instance_seed(spec.seed, id);
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<LoopRecord> records = run_loop_qaoa(g, cfg);
  const double ms = spec.record_timing ? elapsed_ms(t0) / static_cast<double>(records.size()) : 0.0;
  std::vector<InstanceRow> rows;
  for (const auto& r : records)
    rows.push_back({id, "loop", r.loop_index, r.tau, r.expectation, r.success_prob, r.approx_ratio, r.clamped, ms});
  return rows;
}

inline ExperimentResult run_experiment(const ExperimentSpec& spec,
                                       std::vector<InstanceRow> (*per_instance)(const ExperimentSpec&, int)) {
  if (spec.graphs.empty()) throw std::invalid_argument("experiment: no instances");
  const int count = static_cast<int>(spec.graphs.size());
  std::vector<std::optional<std::vector<InstanceRow>>> slots(spec.graphs.size());
  std::vector<std::string> errors(spec.graphs.size());
  parallel_for(count, spec.workers, [&](int k) {
    try {
      slots[k] = per_instance(spec, k);
    } catch (const std::exception& ex) {
      errors[k] = ex.what();
    }
  });
  ExperimentResult out;
  for (int k = 0; k < count; ++k) {
    if (slots[k]) {
      out.rows.insert(out.rows.end(), slots[k]->begin(), slots[k]->end());
    } else {
      ++out.failed_instances;
      out.warnings.push_back("instance " + std::to_string(k) + " excluded: " + errors[k]);
    }
  }
  if (out.failed_instances > spec.max_failure_fraction * count)
    throw std::runtime_error("experiment aborted: " + std::to_string(out.failed_instances) + " of " +
                             std::to_string(count) + " instances failed (first: " +
                             out.warnings.front() + ")");
  out.aggregates = aggregate(out.rows);
  return out;
}

}  // namespace detail

inline ExperimentResult run_qaoa_sweep(const ExperimentSpec& spec) {
  if (spec.p_max < 1) throw std::invalid_argument("qaoa sweep: p_max must be at least 1");
  spec.optimizer.check();
  spec.noise.check();
  return detail::run_experiment(spec, &detail::qaoa_instance);
}

inline ExperimentResult run_loop_sweep(const ExperimentSpec& spec) {
  spec.optimizer.check();
  spec.noise.check();
  return detail::run_experiment(spec, &detail::loop_instance);
}

inline ExperimentResult run(const ExperimentSpec& spec) {
  return spec.mode == ExperimentMode::qaoa_sweep ? run_qaoa_sweep(spec) : run_loop_sweep(spec);
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr std::string_view kCsvHeader =
    "instance_id,mode,x,tau,expectation,success_prob,approx_ratio,clamped,wall_ms";
inline constexpr std::string_view kAggHeader =
    "#agg,mode,x,mean_success_prob,std_success_prob,mean_approx_ratio,std_approx_ratio,count";

/// Shortest round-trip decimal form.
inline std::string format_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
    throw std::invalid_argument("bad number in CSV: '" + std::string(s) + "'");
  return v;
}

inline void write_results_csv(std::ostream& os, const ExperimentResult& res) {
  os << kCsvHeader << '\n';
  for (const auto& r : res.rows)
    os << r.instance_id << ',' << r.mode << ',' << r.x << ',' << format_double(r.tau) << ','
       << format_double(r.expectation) << ',' << format_double(r.success_prob) << ','
       << format_double(r.approx_ratio) << ',' << (r.clamped ? 1 : 0) << ',' << format_double(r.wall_ms) << '\n';
  os << kAggHeader << '\n';
  for (const auto& a : res.aggregates)
    os << "#agg," << a.mode << ',' << a.x << ',' << format_double(a.mean_success_prob) << ','
       << format_double(a.std_success_prob) << ',' << format_double(a.mean_approx_ratio) << ','
       << format_double(a.std_approx_ratio) << ',' << a.count << '\n';
}

inline void write_results_csv(const std::string& path, const ExperimentResult& res) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write results file: " + path);
  write_results_csv(out, res);
  if (!out) throw std::runtime_error("error writing results file: " + path);
}

namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline int parse_int(std::string_view s) {
  int v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
    throw std::invalid_argument("bad integer in CSV: '" + std::string(s) + "'");
  return v;
}

}  // namespace detail

inline ExperimentResult read_results_csv(std::istream& is) {
  ExperimentResult res;
  std::string line;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line == kCsvHeader) {
      header_seen = true;
      continue;
    }
    if (line == kAggHeader) continue;
    const auto f = detail::split_commas(line);
    if (f[0] == "#agg") {
      if (f.size() != 8) throw std::invalid_argument("malformed aggregate line: " + line);
      res.aggregates.push_back({std::string(f[1]), detail::parse_int(f[2]), parse_double(f[3]), parse_double(f[4]),
                                parse_double(f[5]), parse_double(f[6]), detail::parse_int(f[7])});
      continue;
    }
    if (!header_seen) throw std::invalid_argument("results CSV is missing its header");
    if (f.size() != 9) throw std::invalid_argument("malformed result line: " + line);
    res.rows.push_back({detail::parse_int(f[0]), std::string(f[1]), detail::parse_int(f[2]), parse_double(f[3]),
                        parse_double(f[4]), parse_double(f[5]), parse_double(f[6]), f[7] == "1",
                        parse_double(f[8])});
  }
  return res;
}

inline ExperimentResult read_results_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open results file: " + path);
  return read_results_csv(in);
}

// ---------------------------------------------------------------------------
// Plot data

struct PlotSeries {
  std::string label;
  std::vector<AggregateRow> points;
};

/// Splits aggregate rows into one series per mode.
inline std::vector<PlotSeries> series_by_mode(const std::vector<AggregateRow>& rows, const std::string& prefix = "") {
  std::vector<PlotSeries> out;
  for (const auto& r : rows) {
    const std::string label = prefix.empty() ? r.mode : prefix + ":" + r.mode;
    auto it = std::find_if(out.begin(), out.end(), [&](const PlotSeries& s) { return s.label == label; });
    if (it == out.end()) {
      out.push_back({label, {}});
      it = out.end() - 1;
    }
    it->points.push_back(r);
  }
  return out;
}

namespace detail {

inline std::string svg_chart(const std::vector<PlotSeries>& series) {
  constexpr double width = 640, height = 400, left = 60, right = 150, top = 20, bottom = 50;
  int xmin = series.front().points.front().x, xmax = xmin;
  for (const auto& s : series)
    for (const auto& p : s.points) {
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
    }
  const double span = std::max(1, xmax - xmin);
  auto px = [&](double x) { return left + (x - xmin) / span * (width - left - right); };
  auto py = [&](double y) { return top + (1.0 - std::clamp(y, 0.0, 1.0)) * (height - top - bottom); };
  static constexpr const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << py(0) << "\" x2=\"" << width - right << "\" y2=\"" << py(0)
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << py(0) << "\" x2=\"" << left << "\" y2=\"" << py(1)
     << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double y = 0.25 * k;
    os << "<text x=\"" << left - 8 << "\" y=\"" << py(y) + 4 << "\" font-size=\"11\" text-anchor=\"end\">"
       << format_double(y) << "</text>\n";
  }
  for (int x = xmin; x <= xmax; ++x)
    os << "<text x=\"" << px(x) << "\" y=\"" << py(0) + 16 << "\" font-size=\"11\" text-anchor=\"middle\">" << x
       << "</text>\n";
  os << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 10
     << "\" font-size=\"12\" text-anchor=\"middle\">p / loop</text>\n";
  os << "<text x=\"14\" y=\"" << (top + height - bottom) / 2 << "\" font-size=\"12\" transform=\"rotate(-90 14 "
     << (top + height - bottom) / 2 << ")\" text-anchor=\"middle\">success probability</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = colors[k % std::size(colors)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const auto& p : series[k].points) os << px(p.x) << ',' << py(p.mean_success_prob) << ' ';
    os << "\"/>\n";
    for (const auto& p : series[k].points) {
      os << "<line x1=\"" << px(p.x) << "\" y1=\"" << py(p.mean_success_prob - p.std_success_prob) << "\" x2=\""
         << px(p.x) << "\" y2=\"" << py(p.mean_success_prob + p.std_success_prob) << "\" stroke=\"" << color
         << "\" stroke-opacity=\"0.5\"/>\n";
    }
    os << "<text x=\"" << width - right + 10 << "\" y=\"" << top + 16 * (k + 1) << "\" font-size=\"12\" fill=\""
       << color << "\">" << series[k].label << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace detail

/// Writes a wide plot table at `path` (one column group per series:
/// mean, mean-std, mean+std of success probability and approximation
/// ratio) and, when `svg` is set, a line chart at `path + ".svg"`.
inline void emit_plotdata(const std::vector<PlotSeries>& series, const std::string& path, bool svg = true) {
  const bool any = std::any_of(series.begin(), series.end(), [](const PlotSeries& s) { return !s.points.empty(); });
  if (!any) throw std::invalid_argument("emit_plotdata: no rows to plot");
  std::vector<int> xs;
  for (const auto& s : series)
    for (const auto& p : s.points) xs.push_back(p.x);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write plot file: " + path);
  out << "x";
  for (const auto& s : series)
    for (const char* col : {"ps_mean", "ps_lo", "ps_hi", "ratio_mean", "ratio_lo", "ratio_hi"})
      out << ',' << s.label << '_' << col;
  out << '\n';
  for (int x : xs) {
    out << x;
    for (const auto& s : series) {
      auto it = std::find_if(s.points.begin(), s.points.end(), [&](const AggregateRow& a) { return a.x == x; });
      if (it == s.points.end()) {
        out << ",,,,,,";
        continue;
      }
      out << ',' << format_double(it->mean_success_prob) << ','
          << format_double(it->mean_success_prob - it->std_success_prob) << ','
          << format_double(it->mean_success_prob + it->std_success_prob) << ','
          << format_double(it->mean_approx_ratio) << ','
          << format_double(it->mean_approx_ratio - it->std_approx_ratio) << ','
          << format_double(it->mean_approx_ratio + it->std_approx_ratio);
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("error writing plot file: " + path);
  if (svg) {
    std::vector<PlotSeries> nonempty;
    for (const auto& s : series)
      if (!s.points.empty()) nonempty.push_back(s);
    std::ofstream os(path + ".svg", std::ios::binary);
    if (!os) throw std::runtime_error("cannot write chart: " + path + ".svg");
    os << detail::svg_chart(nonempty);
  }
}

inline void emit_plotdata(const std::vector<AggregateRow>& rows, const std::string& path, bool svg = true) {
  if (rows.empty()) throw std::invalid_argument("emit_plotdata: no rows to plot");
  emit_plotdata(series_by_mode(rows), path, svg);
}

}  // namespace loopqaoa
