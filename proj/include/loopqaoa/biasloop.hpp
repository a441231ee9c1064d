#pragma once

// The loop driver: a shallow QAOA run is optimized, its output distribution
// is read back, and edges whose endpoints agree in the likely bitstrings are
// shrunk before the next round.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "loopqaoa/graph.hpp"
#include "loopqaoa/hamiltonian.hpp"
#include "loopqaoa/optimizer.hpp"
#include "loopqaoa/random.hpp"
#include "loopqaoa/simulator.hpp"

namespace loopqaoa {

// ---------------------------------------------------------------------------
// Scoring against the original instance

/// Probability mass on the exact optima.
inline double success_probability(const OutputDistribution& dist, const ExactSolution& exact) {
  double ps = 0.0;
  for (auto z : exact.optima) {
    if (z >= dist.dim()) throw std::invalid_argument("success_probability: dimension mismatch");
    ps += dist.probs[z];
  }
  return ps;
}

/// E_{z ~ dist}[C(z)] / c_max.
inline double approximation_ratio(const OutputDistribution& dist, const WeightedGraph& g0,
                                  const ExactSolution& exact) {
  if (!(exact.c_max > 0.0)) throw std::domain_error("approximation_ratio: c_max is zero");
  if (dist.dim() != (std::size_t{1} << g0.n))
    throw std::invalid_argument("approximation_ratio: dimension mismatch");
  double mean = 0.0;
  for (std::size_t z = 0; z < dist.dim(); ++z)
    if (dist.probs[z] != 0.0) mean += dist.probs[z] * cut_value(g0, z);
  return mean / exact.c_max;
}

// ---------------------------------------------------------------------------
// Hamiltonian updating

struct SupportEntry {
  std::uint64_t index = 0;
  double prob = 0.0;
};

/// Bitstrings with probability strictly above `threshold`, probabilities kept
/// as measured (not renormalized).
inline std::vector<SupportEntry> select_support(const OutputDistribution& dist, double threshold) {
  if (!(threshold >= 0.0 && threshold < 1.0))
    throw std::invalid_argument("select_support: threshold must lie in [0, 1)");
  std::vector<SupportEntry> sel;
  double pmax = 0.0;
  for (std::size_t z = 0; z < dist.dim(); ++z) {
    pmax = std::max(pmax, dist.probs[z]);
    if (dist.probs[z] > threshold) sel.push_back({z, dist.probs[z]});
  }
  if (sel.empty())
    throw std::domain_error("select_support: no bitstring above threshold " + std::to_string(threshold) +
                            " (max observed probability " + std::to_string(pmax) + ")");
  return sel;
}

inline bool is_aligned(std::uint64_t z, const Edge& e) { return (((z >> e.i) ^ (z >> e.j)) & 1U) == 0; }

/// Per-edge selected probability mass on strings whose endpoints agree.
inline std::vector<double> aligned_mass(const WeightedGraph& g, const std::vector<SupportEntry>& sel) {
  std::vector<double> out(g.edges.size(), 0.0);
  for (std::size_t k = 0; k < g.edges.size(); ++k)
    for (const auto& s : sel)
      if (is_aligned(s.index, g.edges[k])) out[k] += s.prob;
  return out;
}

/// Per-edge selected probability mass on strings that cut the edge.
inline std::vector<double> anti_aligned_mass(const WeightedGraph& g, const std::vector<SupportEntry>& sel) {
  std::vector<double> out(g.edges.size(), 0.0);
  for (std::size_t k = 0; k < g.edges.size(); ++k)
    for (const auto& s : sel)
      if (!is_aligned(s.index, g.edges[k])) out[k] += s.prob;
  return out;
}

/// C_ij: expected contribution of each edge to the cut over the selection.
inline std::vector<double> edge_contributions(const WeightedGraph& g, const std::vector<SupportEntry>& sel) {
  std::vector<double> out = anti_aligned_mass(g, sel);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] *= g.edges[k].w;
  return out;
}

struct WeightUpdate {
  WeightedGraph graph;
  /// Some factor (1 - tau * aligned) went negative and was clamped to zero.
  bool clamped = false;
};

/// w'_ij = (1 - tau * sum_{aligned on ij} p_z) w_ij, clamped at zero.
inline WeightUpdate update_weights(const WeightedGraph& g, const std::vector<SupportEntry>& sel, double tau) {
  if (!(tau >= 0.0)) throw std::invalid_argument("update_weights: tau must be non-negative");
  WeightUpdate out{g, false};
  const std::vector<double> aligned = aligned_mass(g, sel);
  for (std::size_t k = 0; k < g.edges.size(); ++k) {
    double factor = 1.0 - tau * aligned[k];
    if (factor < 0.0) {
      factor = 0.0;
      out.clamped = true;
    }
    out.graph.edges[k].w = factor * g.edges[k].w;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bias strength

struct InterpolationCoefficients {
  double on_max = 1.0 / 3.0;
  double on_min = 2.0 / 3.0;
};

/// tau = 2^-(n-2) [1 - a (1/(g dmax))^(1/(l+f)) - b (1/(g dmin))^(1/(l+f))],
/// clamped below at zero.
inline double bias_strength_interpolation(int n, int loop, double delta_max, double delta_min, double g,
                                          double f_n, InterpolationCoefficients coef = {}) {
  if (!(delta_min > 0.0)) throw std::invalid_argument("bias_strength_interpolation: delta_min must be positive");
  if (!(delta_max > 0.0)) throw std::invalid_argument("bias_strength_interpolation: delta_max must be positive");
  if (!(g > 0.0)) throw std::invalid_argument("bias_strength_interpolation: g must be positive");
  if (loop < 1) throw std::invalid_argument("bias_strength_interpolation: loop index starts at 1");
  if (!(loop + f_n > 0.0)) throw std::invalid_argument("bias_strength_interpolation: l + f(n) must be positive");
  const double e = 1.0 / (loop + f_n);
  // Grouped so that g*dmax = g*dmin = 1 gives exactly zero.
  const double bracket = coef.on_max * (1.0 - std::pow(1.0 / (g * delta_max), e)) +
                         coef.on_min * (1.0 - std::pow(1.0 / (g * delta_min), e)) +
                         (1.0 - (coef.on_max + coef.on_min));
  return std::ldexp(std::max(bracket, 0.0), -(n - 2));
}

inline constexpr double kWeightDifferenceFloor = 1e-9;

struct WeightDifferences {
  double max = kWeightDifferenceFloor;
  double min = kWeightDifferenceFloor;
};

/// Largest and smallest gaps between distinct edge weights, floored.
inline WeightDifferences weight_differences(std::vector<double> w) {
  std::sort(w.begin(), w.end());
  w.erase(std::unique(w.begin(), w.end()), w.end());
  WeightDifferences d;
  if (w.size() < 2) return d;
  d.max = std::max(w.back() - w.front(), kWeightDifferenceFloor);
  double gap = w[1] - w[0];
  for (std::size_t k = 2; k < w.size(); ++k) gap = std::min(gap, w[k] - w[k - 1]);
  d.min = std::max(gap, kWeightDifferenceFloor);
  return d;
}

enum class BiasKind { interpolation, fixed, random_interval };

inline BiasKind parse_bias_kind(std::string_view s) {
  if (s == "interpolation") return BiasKind::interpolation;
  if (s == "fixed") return BiasKind::fixed;
  if (s == "random" || s == "random_interval") return BiasKind::random_interval;
  throw std::invalid_argument("unknown bias strategy: " + std::string(s));
}

inline std::string_view to_string(BiasKind k) {
  switch (k) {
    case BiasKind::interpolation: return "interpolation";
    case BiasKind::fixed: return "fixed";
    case BiasKind::random_interval: return "random";
  }
  return "?";
}

struct BiasStrategy {
  BiasKind kind = BiasKind::interpolation;
  double tau_fixed = 0.0;
  double tau_lo = 2.0e-4;
  double tau_hi = 2.8e-4;
  double g = 1e3;
  double f_n = 1.0;
  InterpolationCoefficients coef;

  void check() const {
    if (!(tau_fixed >= 0.0)) throw std::invalid_argument("BiasStrategy: tau must be non-negative");
    if (!(tau_lo >= 0.0 && tau_lo <= tau_hi)) throw std::invalid_argument("BiasStrategy: need 0 <= tau_lo <= tau_hi");
    if (!(g > 0.0)) throw std::invalid_argument("BiasStrategy: g must be positive");
    if (!(f_n >= 0.0)) throw std::invalid_argument("BiasStrategy: f(n) must be non-negative");
  }
};

template <class Engine>
double choose_tau(const BiasStrategy& s, int n, int loop, const std::vector<double>& weights, Engine& rng) {
  switch (s.kind) {
    case BiasKind::fixed: return s.tau_fixed;
    case BiasKind::random_interval: return uniform_real(rng, s.tau_lo, s.tau_hi);
    case BiasKind::interpolation: {
      const WeightDifferences d = weight_differences(weights);
      return bias_strength_interpolation(n, loop, d.max, d.min, s.g, s.f_n, s.coef);
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Driver

struct LoopConfig {
  int loops = 10;
  /// Selection cutoff p*; defaults to 2^-n (strictly above uniform).
  std::optional<double> threshold;
  BiasStrategy strategy;
  /// `optimizer.seed` is ignored; per-loop seeds derive from `seed`.
  OptimizeConfig optimizer;
  NoiseModel noise;
  std::uint64_t seed = 0;
  int p = 1;
  bool warm_start = false;
  /// When positive, the weight update reads a sampled histogram of this many
  /// shots instead of the exact distribution. Scoring stays exact.
  std::uint64_t shots = 0;

  void check() const {
    if (loops < 1) throw std::invalid_argument("LoopConfig: loops must be at least 1");
    if (p < 1) throw std::invalid_argument("LoopConfig: p must be at least 1");
    if (threshold && !(*threshold >= 0.0 && *threshold < 1.0))
      throw std::invalid_argument("LoopConfig: threshold must lie in [0, 1)");
    strategy.check();
    optimizer.check();
    noise.check();
  }
};

/// Seed of optimization stage `index` (depth for sweeps, loop for the
/// driver) of an instance. Loop 1 and depth 1 share a seed.
inline std::uint64_t stage_seed(std::uint64_t instance_seed, int index) {
  return derive_seed(instance_seed, static_cast<std::uint64_t>(index));
}

struct LoopRecord {
  int loop_index = 0;
  double tau = 0.0;
  QaoaParams params;
  /// Optimized objective on the loop's (updated) Hamiltonian.
  double expectation = 0.0;
  double success_prob = 0.0;
  double approx_ratio = 0.0;
  std::vector<double> weights_after;
  bool clamped = false;
  /// Nothing cleared the threshold; the whole distribution was used.
  bool threshold_fallback = false;
};

/// Output distribution of an optimized circuit (density diagonal when noisy).
inline OutputDistribution circuit_distribution(const DiagonalHamiltonian& h, const QaoaParams& params,
                                               const NoiseModel& m) {
  if (m.is_noiseless()) return distribution(run_qaoa(h, params));
  return distribution(run_qaoa_noisy(h, params, m));
}

inline std::vector<LoopRecord> run_loop_qaoa(const WeightedGraph& g0, const LoopConfig& cfg,
                                             const ExactSolution* exact_hint = nullptr) {
  cfg.check();
  const ExactSolution exact = exact_hint ? *exact_hint : brute_force_solve(g0);
  const double threshold = cfg.threshold.value_or(std::ldexp(1.0, -g0.n));
  std::mt19937_64 tau_rng(derive_seed(cfg.seed, 0x7a75));

  std::vector<LoopRecord> records;
  records.reserve(static_cast<std::size_t>(cfg.loops));
  WeightedGraph g = g0;
  std::optional<QaoaParams> previous;
  for (int l = 1; l <= cfg.loops; ++l) {
    const DiagonalHamiltonian h = build_hamiltonian(g);
    OptimizeConfig ocfg = cfg.optimizer;
    ocfg.seed = stage_seed(cfg.seed, l);
    if (cfg.warm_start && previous) ocfg.initial = previous;
    const OptimizeResult res = minimize(h, cfg.p, ocfg, cfg.noise);
    previous = res.params;

    const OutputDistribution dist = circuit_distribution(h, res.params, cfg.noise);
    LoopRecord rec;
    rec.loop_index = l;
    rec.params = res.params;
    rec.expectation = res.value;
    rec.success_prob = success_probability(dist, exact);
    rec.approx_ratio = approximation_ratio(dist, g0, exact);

    const OutputDistribution feedback =
        cfg.shots > 0 ? sample_shots(dist, cfg.shots, derive_seed(ocfg.seed, 0x5407)) : dist;
    std::vector<SupportEntry> sel;
    try {
      sel = select_support(feedback, threshold);
    } catch (const std::domain_error&) {
      sel = select_support(feedback, 0.0);
      rec.threshold_fallback = true;
    }
    rec.tau = choose_tau(cfg.strategy, g.n, l, g.weights(), tau_rng);
    WeightUpdate upd = update_weights(g, sel, rec.tau);
    rec.clamped = upd.clamped;
    g = std::move(upd.graph);
    rec.weights_after = g.weights();
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace loopqaoa
