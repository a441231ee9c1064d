// Command-line front end: instance generation, depth and loop sweeps, and
// plot-data emission.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "loopqaoa/loopqaoa.hpp"

namespace {

using namespace loopqaoa;

struct NoiseOptions {
  std::string kind = "none";
  std::optional<double> q;
  std::string placement = "final";

  void add_to(CLI::App* app) {
    app->add_option("--noise", kind, "Noise channel")
        ->check(CLI::IsMember({"none", "bitflip", "phaseflip", "depolarizing"}));
    app->add_option("--q", q, "Channel probability (default 0.1 for flips, 0.05 for depolarizing)")
        ->check(CLI::Range(0.0, 1.0));
    app->add_option("--noise-placement", placement, "Apply the channel once at the end or after every layer")
        ->check(CLI::IsMember({"final", "per_layer"}));
  }

  NoiseModel model() const {
    NoiseModel m;
    m.kind = parse_noise_kind(kind);
    m.placement = parse_noise_placement(placement);
    m.q = q.value_or(m.kind == NoiseKind::depolarizing ? 0.05 : m.kind == NoiseKind::none ? 0.0 : 0.1);
    return m;
  }
};

struct OptimizerOptions {
  OptimizeConfig cfg;
  std::string gradient = "fd";

  void add_to(CLI::App* app) {
    app->add_option("--restarts", cfg.restarts, "Random BFGS starts per optimization")->check(CLI::PositiveNumber);
    app->add_option("--max-iters", cfg.max_iters, "BFGS iteration cap per start")->check(CLI::PositiveNumber);
    app->add_option("--fd-step", cfg.fd_step, "Central-difference step");
    app->add_option("--grad-tol", cfg.grad_tol, "Gradient convergence tolerance");
    app->add_option("--gradient", gradient, "Gradient method (adjoint only affects noiseless runs)")
        ->check(CLI::IsMember({"fd", "adjoint"}));
  }

  OptimizeConfig config() const {
    OptimizeConfig c = cfg;
    c.gradient = parse_gradient_method(gradient);
    return c;
  }
};

struct RunOptions {
  std::string graphs;
  std::string out;
  std::uint64_t seed = 0;
  int workers = 0;
  bool timing = false;

  void add_to(CLI::App* app) {
    app->add_option("--graphs", graphs, "Graph file (JSON lines)")->required()->check(CLI::ExistingFile);
    app->add_option("--out", out, "Results CSV")->required();
    app->add_option("--seed", seed, "Master seed");
    app->add_option("--workers", workers, "Worker threads (0 = hardware concurrency)");
    app->add_flag("--timing", timing, "Record wall time per row (output no longer reproducible)");
  }
};

void report(const ExperimentResult& res, const std::string& out) {
  for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';
  write_results_csv(out, res);
  for (const auto& a : res.aggregates)
    std::cout << a.mode << " x=" << a.x << " success_prob=" << a.mean_success_prob << " (sd "
              << a.std_success_prob << ") approx_ratio=" << a.mean_approx_ratio << " (sd " << a.std_approx_ratio
              << ") n=" << a.count << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Loop-QAOA simulator and benchmark harness"};
  app.require_subcommand(1);
  // Keys live in a section named after the subcommand, e.g. [loop] tau=0.1.
  app.set_config("--config", "", "INI/TOML file with the same keys as the flags");

  // gen
  auto* gen = app.add_subcommand("gen", "Generate weighted graph instances");
  gen->fallthrough();
  int gen_n = 12, gen_count = 100;
  std::uint64_t gen_seed = 0;
  std::string gen_out, gen_family = "w3r";
  gen->add_option("--n", gen_n, "Vertex count")->required();
  gen->add_option("--count", gen_count, "Number of instances")->required()->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "Master seed")->required();
  gen->add_option("--out", gen_out, "Output file (JSON lines)")->required();
  gen->add_option("--family", gen_family, "Graph family")->check(CLI::IsMember({"w3r", "complete"}));

  // qaoa
  auto* qaoa = app.add_subcommand("qaoa", "Conventional QAOA depth sweep");
  qaoa->fallthrough();
  RunOptions qrun;
  NoiseOptions qnoise;
  OptimizerOptions qopt;
  int pmax = 1;
  qrun.add_to(qaoa);
  qnoise.add_to(qaoa);
  qopt.add_to(qaoa);
  qaoa->add_option("--pmax", pmax, "Largest depth")->required()->check(CLI::PositiveNumber);

  // loop
  auto* loop = app.add_subcommand("loop", "Loop-QAOA sweep");
  loop->fallthrough();
  RunOptions lrun;
  NoiseOptions lnoise;
  OptimizerOptions lopt;
  LoopConfig lcfg;
  std::string strategy = "interpolation";
  std::optional<double> threshold;
  lrun.add_to(loop);
  lnoise.add_to(loop);
  lopt.add_to(loop);
  loop->add_option("--loops", lcfg.loops, "Number of loops")->required()->check(CLI::PositiveNumber);
  loop->add_option("--strategy", strategy, "Bias strength strategy")
      ->check(CLI::IsMember({"interpolation", "fixed", "random"}));
  loop->add_option("--tau", lcfg.strategy.tau_fixed, "Bias strength for the fixed strategy");
  loop->add_option("--tau-lo", lcfg.strategy.tau_lo, "Lower bound for the random strategy");
  loop->add_option("--tau-hi", lcfg.strategy.tau_hi, "Upper bound for the random strategy");
  loop->add_option("--g", lcfg.strategy.g, "Accuracy factor of the interpolation formula");
  loop->add_option("--fn", lcfg.strategy.f_n, "Constant f(n) of the interpolation formula");
  loop->add_option("--coef-max", lcfg.strategy.coef.on_max, "Interpolation coefficient on the max-difference term");
  loop->add_option("--coef-min", lcfg.strategy.coef.on_min, "Interpolation coefficient on the min-difference term");
  loop->add_option("--threshold", threshold, "Selection cutoff p* (default 2^-n)");
  loop->add_option("--p", lcfg.p, "Circuit depth inside the loop")->check(CLI::PositiveNumber);
  loop->add_flag("--warm-start", lcfg.warm_start, "Seed each loop's optimizer with the previous angles");
  loop->add_option("--shots", lcfg.shots, "Sample this many shots for the weight update (0 = exact)");

  // plot
  auto* plot = app.add_subcommand("plot", "Emit plot data and an SVG chart from results CSVs");
  plot->fallthrough();
  std::vector<std::string> plot_in;
  std::string plot_out;
  bool no_svg = false;
  plot->add_option("--in", plot_in, "Results CSV (repeatable)")->required()->check(CLI::ExistingFile);
  plot->add_option("--out", plot_out, "Plot data file")->required();
  plot->add_flag("--no-svg", no_svg, "Skip the SVG chart");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const auto graphs = generate_instances(gen_family, gen_n, gen_count, gen_seed);
      write_graphs(gen_out, graphs);
      std::cout << "wrote " << graphs.size() << " graphs to " << gen_out << '\n';
    } else if (*qaoa) {
      ExperimentSpec spec;
      spec.mode = ExperimentMode::qaoa_sweep;
      spec.graphs = read_graphs(qrun.graphs);
      spec.p_max = pmax;
      spec.optimizer = qopt.config();
      spec.noise = qnoise.model();
      spec.seed = qrun.seed;
      spec.workers = qrun.workers;
      spec.record_timing = qrun.timing;
      report(run_qaoa_sweep(spec), qrun.out);
    } else if (*loop) {
      ExperimentSpec spec;
      spec.mode = ExperimentMode::loop_qaoa;
      spec.graphs = read_graphs(lrun.graphs);
      lcfg.strategy.kind = parse_bias_kind(strategy);
      lcfg.threshold = threshold;
      spec.loop = lcfg;
      spec.optimizer = lopt.config();
      spec.noise = lnoise.model();
      spec.seed = lrun.seed;
      spec.workers = lrun.workers;
      spec.record_timing = lrun.timing;
      report(run_loop_sweep(spec), lrun.out);
    } else if (*plot) {
      std::vector<PlotSeries> series;
      for (const auto& path : plot_in) {
        const ExperimentResult res = read_results_csv(path);
        std::string prefix;
        if (plot_in.size() > 1) prefix = std::filesystem::path(path).stem().string();
        for (auto& s : series_by_mode(res.aggregates, prefix)) series.push_back(std::move(s));
      }
      emit_plotdata(series, plot_out, !no_svg);
      std::cout << "wrote " << plot_out << (no_svg ? "" : " and " + plot_out + ".svg") << '\n';
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
  return 0;
}
