#pragma once

// Classical outer loop: multi-start BFGS over the 2p circuit angles.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "loopqaoa/bfgs.hpp"
#include "loopqaoa/random.hpp"
#include "loopqaoa/simulator.hpp"

namespace loopqaoa {

enum class GradientMethod {
  finite_difference,
  /// Exact reverse-mode gradient of the pure-state objective. Noisy
  /// objectives fall back to finite differences.
  adjoint,
};

inline GradientMethod parse_gradient_method(std::string_view s) {
  if (s == "fd" || s == "finite_difference") return GradientMethod::finite_difference;
  if (s == "adjoint") return GradientMethod::adjoint;
  throw std::invalid_argument("unknown gradient method: " + std::string(s));
}

struct OptimizeConfig {
  int restarts = 20;
  int max_iters = 200;
  double fd_step = 1e-5;
  double grad_tol = 1e-8;
  double gamma_lo = 0.0;
  double gamma_hi = std::numbers::pi;
  double beta_lo = 0.0;
  double beta_hi = std::numbers::pi / 2;
  std::uint64_t seed = 0;
  GradientMethod gradient = GradientMethod::finite_difference;
  /// Optional extra start evaluated before the random ones (warm start).
  std::optional<QaoaParams> initial;

  void check() const {
    if (restarts < 1) throw std::invalid_argument("OptimizeConfig: restarts must be positive");
    if (max_iters < 1) throw std::invalid_argument("OptimizeConfig: max_iters must be positive");
    if (!(fd_step > 0.0 && fd_step <= 1e-2))
      throw std::invalid_argument("OptimizeConfig: fd_step must lie in (0, 1e-2]");
    if (!(grad_tol > 0.0)) throw std::invalid_argument("OptimizeConfig: grad_tol must be positive");
    if (!(gamma_lo <= gamma_hi && beta_lo <= beta_hi))
      throw std::invalid_argument("OptimizeConfig: empty initialization box");
  }
};

struct OptimizeResult {
  QaoaParams params;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Index of the winning start (0-based; the warm start, if any, is 0).
  int best_start = 0;
  int failed_starts = 0;
};

/// F_p = <psi|H_P|psi>, or tr(rho H_P) when a noise model is active.
inline double objective(const DiagonalHamiltonian& h, const QaoaParams& params,
                        const NoiseModel& m = {}) {
  if (m.is_noiseless()) return expectation(run_qaoa(h, params), h);
  return expectation(run_qaoa_noisy(h, params, m), h);
}

/// Central differences, ordered (gamma_1..gamma_p, beta_1..beta_p).
inline std::vector<double> gradient(const DiagonalHamiltonian& h, const QaoaParams& params,
                                    const NoiseModel& m = {}, double fd_step = 1e-5) {
  std::vector<double> x = params.flat();
  std::vector<double> out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double x0 = x[k];
    x[k] = x0 + fd_step;
    const double fp = objective(h, QaoaParams::from_flat(x), m);
    x[k] = x0 - fd_step;
    const double fm = objective(h, QaoaParams::from_flat(x), m);
    x[k] = x0;
    out[k] = (fp - fm) / (2 * fd_step);
  }
  return out;
}

/// Exact gradient of the pure-state objective by reverse propagation: one
/// forward pass, then the state and the costate H|psi> are unwound layer by
/// layer while the derivative of each angle is read off.
inline std::vector<double> adjoint_gradient(const DiagonalHamiltonian& h, const QaoaParams& params) {
  const StateVector fwd = run_qaoa(h, params);
  const int p = params.depth();
  const std::size_t dim = fwd.dim();
  StateVector psi = fwd;
  StateVector lam = fwd;
  for (std::size_t z = 0; z < dim; ++z) lam.amps[z] *= h.energies[z];

  std::vector<double> out(2 * static_cast<std::size_t>(p));
  for (int j = p - 1; j >= 0; --j) {
    // d/d beta_j = 2 Im <lam| H_M |psi>, with H_M = sum_q X_q.
    const double* ps = reinterpret_cast<const double*>(psi.amps.data());
    const double* lm = reinterpret_cast<const double*>(lam.amps.data());
    double gb = 0.0;
    for (int q = 0; q < h.n; ++q) {
      const std::size_t bit = std::size_t{1} << q;
      for (std::size_t z = 0; z < dim; ++z) {
        const std::size_t w = z ^ bit;
        // Im(conj(l) x) = lr xi - li xr
        gb += lm[2 * z] * ps[2 * w + 1] - lm[2 * z + 1] * ps[2 * w];
      }
    }
    out[p + j] = 2 * gb;
    apply_mixer_layer(psi, -params.betas[j]);
    apply_mixer_layer(lam, -params.betas[j]);

    // d/d gamma_j = 2 Im <lam| H_P |psi>
    double gg = 0.0;
    for (std::size_t z = 0; z < dim; ++z)
      gg += h.energies[z] * (lm[2 * z] * ps[2 * z + 1] - lm[2 * z + 1] * ps[2 * z]);
    out[j] = 2 * gg;
    apply_phase_layer(psi, h, -params.gammas[j]);
    apply_phase_layer(lam, h, -params.gammas[j]);
  }
  return out;
}

/// Multi-start BFGS. Starts are drawn uniformly from the configured box with
/// an engine seeded from cfg.seed; the best terminal value wins, ties going
/// to the lowest start index.
inline OptimizeResult minimize(const DiagonalHamiltonian& h, int p, const OptimizeConfig& cfg,
                               const NoiseModel& m = {}) {
  if (p < 1) throw std::invalid_argument("minimize: depth must be at least 1");
  cfg.check();
  m.check();

  std::vector<std::vector<double>> starts;
  if (cfg.initial) {
    if (cfg.initial->depth() != p) throw std::invalid_argument("minimize: warm start has wrong depth");
    starts.push_back(cfg.initial->flat());
  }
  std::mt19937_64 eng(mix_seed(cfg.seed));
  for (int r = 0; r < cfg.restarts; ++r) {
    std::vector<double> x(2 * static_cast<std::size_t>(p));
    for (int j = 0; j < p; ++j) x[j] = uniform_real(eng, cfg.gamma_lo, cfg.gamma_hi);
    for (int j = 0; j < p; ++j) x[p + j] = uniform_real(eng, cfg.beta_lo, cfg.beta_hi);
    starts.push_back(std::move(x));
  }

  auto f = [&](const std::vector<double>& x) { return objective(h, QaoaParams::from_flat(x), m); };
  auto g = [&](const std::vector<double>& x) {
    const QaoaParams params = QaoaParams::from_flat(x);
    if (cfg.gradient == GradientMethod::adjoint && m.is_noiseless()) return adjoint_gradient(h, params);
    return gradient(h, params, m, cfg.fd_step);
  };
  const BfgsOptions opt{.max_iters = cfg.max_iters, .grad_tol = cfg.grad_tol};

  std::optional<OptimizeResult> best;
  int failed = 0;
  std::string last_error;
  for (std::size_t r = 0; r < starts.size(); ++r) {
    BfgsResult run;
    try {
      run = bfgs_minimize(f, g, starts[r], opt);
    } catch (const std::exception& ex) {
      ++failed;
      last_error = ex.what();
      continue;
    }
    if (!run.finite || !std::isfinite(run.value)) {
      ++failed;
      last_error = "non-finite objective from start " + std::to_string(r);
      continue;
    }
    if (!best || run.value < best->value) {
      best = OptimizeResult{QaoaParams::from_flat(run.x), run.value, run.iterations, run.converged,
                            static_cast<int>(r), 0};
    }
  }
  if (!best) throw std::runtime_error("minimize: all restarts failed (" + last_error + ")");
  best->failed_starts = failed;
  // Report the value as a fresh evaluation at the returned angles.
  best->value = objective(h, best->params, m);
  return *best;
}

}  // namespace loopqaoa
