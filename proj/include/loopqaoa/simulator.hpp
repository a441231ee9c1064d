#pragma once

// Exact QAOA simulation. Pure states evolve as 2^n amplitude vectors; noisy
// runs evolve a dense 2^n x 2^n density matrix through Kraus channels.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "loopqaoa/hamiltonian.hpp"
#include "loopqaoa/random.hpp"

namespace loopqaoa {

using cplx = std::complex<double>;

inline constexpr int kMaxDensityQubits = 10;

/// Complex product without the NaN-recovery path of operator*.
inline cplx cmul(cplx a, cplx b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

/// Angles of a p-layer circuit. Layer j applies exp(-i gammas[j] H_P) and
/// then exp(-i betas[j] H_M).
struct QaoaParams {
  std::vector<double> gammas;
  std::vector<double> betas;

  int depth() const { return static_cast<int>(gammas.size()); }

  void check() const {
    if (gammas.size() != betas.size())
      throw std::invalid_argument("QaoaParams: gammas and betas differ in length");
    if (gammas.empty()) throw std::invalid_argument("QaoaParams: depth must be at least 1");
    for (std::size_t k = 0; k < gammas.size(); ++k)
      if (!std::isfinite(gammas[k]) || !std::isfinite(betas[k]))
        throw std::invalid_argument("QaoaParams: non-finite angle");
  }

  /// Flattened as (gamma_1..gamma_p, beta_1..beta_p).
  std::vector<double> flat() const {
    std::vector<double> x(gammas);
    x.insert(x.end(), betas.begin(), betas.end());
    return x;
  }

  static QaoaParams from_flat(std::span<const double> x) {
    if (x.size() % 2 != 0) throw std::invalid_argument("QaoaParams: odd flat length");
    const std::size_t p = x.size() / 2;
    return {{x.begin(), x.begin() + p}, {x.begin() + p, x.end()}};
  }

  friend bool operator==(const QaoaParams&, const QaoaParams&) = default;
};

struct StateVector {
  int n = 0;
  std::vector<cplx> amps;

  std::size_t dim() const { return amps.size(); }

  double norm_squared() const {
    double s = 0.0;
    for (const auto& a : amps) s += std::norm(a);
    return s;
  }
};

/// Row-major dense density matrix.
struct DensityMatrix {
  int n = 0;
  std::vector<cplx> rho;

  std::size_t dim() const { return std::size_t{1} << n; }
  cplx& at(std::size_t r, std::size_t c) { return rho[r * dim() + c]; }
  const cplx& at(std::size_t r, std::size_t c) const { return rho[r * dim() + c]; }

  cplx trace() const {
    cplx t = 0.0;
    for (std::size_t k = 0; k < dim(); ++k) t += at(k, k);
    return t;
  }

  static DensityMatrix from_pure(const StateVector& s) {
    DensityMatrix d{s.n, std::vector<cplx>(s.dim() * s.dim())};
    for (std::size_t r = 0; r < s.dim(); ++r)
      for (std::size_t c = 0; c < s.dim(); ++c) d.at(r, c) = s.amps[r] * std::conj(s.amps[c]);
    return d;
  }
};

enum class NoiseKind { none, bit_flip, phase_flip, depolarizing };

/// Where the channel acts: once after the whole circuit, or after every
/// (phase, mixer) layer.
enum class NoisePlacement { final, per_layer };

struct NoiseModel {
  NoiseKind kind = NoiseKind::none;
  double q = 0.0;
  NoisePlacement placement = NoisePlacement::final;

  void check() const {
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("NoiseModel: q must lie in [0, 1]");
  }
  bool is_noiseless() const { return kind == NoiseKind::none; }
};

inline std::string_view to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::none: return "none";
    case NoiseKind::bit_flip: return "bitflip";
    case NoiseKind::phase_flip: return "phaseflip";
    case NoiseKind::depolarizing: return "depolarizing";
  }
  return "?";
}

inline NoiseKind parse_noise_kind(std::string_view s) {
  if (s == "none") return NoiseKind::none;
  if (s == "bitflip" || s == "bit_flip") return NoiseKind::bit_flip;
  if (s == "phaseflip" || s == "phase_flip") return NoiseKind::phase_flip;
  if (s == "depolarizing") return NoiseKind::depolarizing;
  throw std::invalid_argument("unknown noise model: " + std::string(s));
}

inline std::string_view to_string(NoisePlacement p) {
  return p == NoisePlacement::final ? "final" : "per_layer";
}

inline NoisePlacement parse_noise_placement(std::string_view s) {
  if (s == "final") return NoisePlacement::final;
  if (s == "per_layer") return NoisePlacement::per_layer;
  throw std::invalid_argument("unknown noise placement: " + std::string(s));
}

/// Probabilities over basis states, indexed little-endian.
struct OutputDistribution {
  std::vector<double> probs;

  std::size_t dim() const { return probs.size(); }
};

// ---------------------------------------------------------------------------
// Pure-state path

inline StateVector plus_state(int n) {
  if (n < 1 || n > kMaxStateQubits)
    throw std::invalid_argument("plus_state: n = " + std::to_string(n) + " outside [1, " +
                                std::to_string(kMaxStateQubits) + "]");
  const std::size_t dim = std::size_t{1} << n;
  return {n, std::vector<cplx>(dim, cplx(std::pow(2.0, -0.5 * n), 0.0))};
}

/// exp(-i gamma E_z) for every basis state. With an edge list the factors
/// are assembled vertex by vertex: appending vertex v to the low bits
/// multiplies in exp(i gamma w_uv) for each earlier neighbour u on the other
/// side of the cut, looked up from a table over those neighbours' bits.
inline std::vector<cplx> phase_factors(const DiagonalHamiltonian& h, double gamma) {
  const std::size_t dim = h.dim();
  std::vector<cplx> ph(dim);
  const bool from_edges =
      !h.edges.empty() && std::all_of(h.edges.begin(), h.edges.end(), [&](const Edge& e) {
        return e.i >= 0 && e.j >= 0 && e.i < h.n && e.j < h.n && e.i != e.j;
      });
  if (!from_edges) {
    for (std::size_t z = 0; z < dim; ++z) ph[z] = std::polar(1.0, -gamma * h.energies[z]);
    return ph;
  }
  ph[0] = 1.0;
  std::vector<int> back;
  std::vector<cplx> edge_phase, when_zero, when_one;
  for (int v = 0; v < h.n; ++v) {
    back.clear();
    edge_phase.clear();
    for (const auto& e : h.edges) {
      const int lo = std::min(e.i, e.j), hi = std::max(e.i, e.j);
      if (hi != v) continue;
      back.push_back(lo);
      edge_phase.push_back(std::polar(1.0, gamma * e.w));
    }
    // when_one[m]: product over back neighbours whose bit is 0 in m (cut when
    // v is 1); when_zero[m]: over those whose bit is 1.
    const std::size_t tsize = std::size_t{1} << back.size();
    when_zero.assign(tsize, 1.0);
    when_one.assign(tsize, 1.0);
    for (std::size_t m = 0; m < tsize; ++m)
      for (std::size_t k = 0; k < back.size(); ++k) {
        if ((m >> k) & 1U) when_zero[m] = cmul(when_zero[m], edge_phase[k]);
        else when_one[m] = cmul(when_one[m], edge_phase[k]);
      }
    const std::size_t half = std::size_t{1} << v;
    for (std::size_t z = 0; z < half; ++z) {
      std::size_t m = 0;
      for (std::size_t k = 0; k < back.size(); ++k) m |= ((z >> back[k]) & 1U) << k;
      const cplx base = ph[z];
      ph[z + half] = cmul(base, when_one[m]);
      ph[z] = cmul(base, when_zero[m]);
    }
  }
  return ph;
}

inline void apply_phase_layer(StateVector& s, const DiagonalHamiltonian& h, double gamma) {
  if (s.dim() != h.dim()) throw std::invalid_argument("apply_phase_layer: dimension mismatch");
  const std::vector<cplx> ph = phase_factors(h, gamma);
  // Plain real arithmetic: std::complex products go through the checked
  // library multiply unless built with limited-range semantics.
  double* a = reinterpret_cast<double*>(s.amps.data());
  const double* f = reinterpret_cast<const double*>(ph.data());
  for (std::size_t z = 0; z < s.dim(); ++z) {
    const double c = f[2 * z];
    const double sn = f[2 * z + 1];
    const double re = a[2 * z];
    const double im = a[2 * z + 1];
    a[2 * z] = c * re - sn * im;
    a[2 * z + 1] = sn * re + c * im;
  }
}

/// exp(-i beta X) on every qubit.
inline void apply_mixer_layer(StateVector& s, double beta) {
  const double c = std::cos(beta);
  const double sn = std::sin(beta);
  const std::size_t dim = s.dim();
  double* a = reinterpret_cast<double*>(s.amps.data());
  for (int q = 0; q < s.n; ++q) {
    const std::size_t stride = std::size_t{1} << q;
    for (std::size_t base = 0; base < dim; base += 2 * stride) {
      for (std::size_t k = base; k < base + stride; ++k) {
        double* x = a + 2 * k;
        double* y = a + 2 * (k + stride);
        const double xr = x[0], xi = x[1], yr = y[0], yi = y[1];
        // (x, y) <- (c x - i s y, -i s x + c y)
        x[0] = c * xr + sn * yi;
        x[1] = c * xi - sn * yr;
        y[0] = c * yr + sn * xi;
        y[1] = c * yi - sn * xr;
      }
    }
  }
}

inline StateVector run_qaoa(const DiagonalHamiltonian& h, const QaoaParams& params) {
  params.check();
  StateVector s = plus_state(h.n);
  for (int j = 0; j < params.depth(); ++j) {
    apply_phase_layer(s, h, params.gammas[j]);
    apply_mixer_layer(s, params.betas[j]);
  }
  return s;
}

inline double expectation(const StateVector& s, const DiagonalHamiltonian& h) {
  if (s.dim() != h.dim()) throw std::invalid_argument("expectation: dimension mismatch");
  double f = 0.0;
  for (std::size_t z = 0; z < s.dim(); ++z) f += std::norm(s.amps[z]) * h.energies[z];
  return f;
}

inline OutputDistribution distribution(const StateVector& s) {
  OutputDistribution d;
  d.probs.resize(s.dim());
  for (std::size_t z = 0; z < s.dim(); ++z) d.probs[z] = std::norm(s.amps[z]);
  return d;
}

// ---------------------------------------------------------------------------
// Density-matrix path

inline DensityMatrix plus_density(int n) {
  if (n < 1 || n > kMaxDensityQubits)
    throw std::invalid_argument("density matrix: n = " + std::to_string(n) + " outside [1, " +
                                std::to_string(kMaxDensityQubits) + "]");
  const std::size_t dim = std::size_t{1} << n;
  return {n, std::vector<cplx>(dim * dim, cplx(1.0 / static_cast<double>(dim), 0.0))};
}

inline void apply_phase_layer(DensityMatrix& d, const DiagonalHamiltonian& h, double gamma) {
  if (d.dim() != h.dim()) throw std::invalid_argument("apply_phase_layer: dimension mismatch");
  const std::size_t dim = d.dim();
  const std::vector<cplx> ph = phase_factors(h, gamma);
  for (std::size_t r = 0; r < dim; ++r)
    for (std::size_t c = 0; c < dim; ++c) {
      d.at(r, c) = cmul(cmul(ph[r], std::conj(ph[c])), d.at(r, c));
    }
}

/// rho <- U rho U^dagger with U = (exp(-i beta X))^{tensor n}.
inline void apply_mixer_layer(DensityMatrix& d, double beta) {
  const double c = std::cos(beta);
  const double s = std::sin(beta);
  // U = c I - i s X on row indices; U^dagger = c I + i s X on column indices
  // (U is symmetric).
  auto times_i = [](double f, cplx v) { return cplx(-f * v.imag(), f * v.real()); };
  const std::size_t dim = d.dim();
  cplx* m = d.rho.data();
  for (int q = 0; q < d.n; ++q) {
    const std::size_t stride = std::size_t{1} << q;
    for (std::size_t base = 0; base < dim; base += 2 * stride) {
      for (std::size_t r = base; r < base + stride; ++r) {
        cplx* x = m + r * dim;
        cplx* y = m + (r + stride) * dim;
        for (std::size_t col = 0; col < dim; ++col) {
          const cplx a = x[col];
          const cplx b = y[col];
          x[col] = c * a + times_i(-s, b);
          y[col] = times_i(-s, a) + c * b;
        }
      }
    }
    for (std::size_t r = 0; r < dim; ++r) {
      cplx* row = m + r * dim;
      for (std::size_t base = 0; base < dim; base += 2 * stride) {
        for (std::size_t k = base; k < base + stride; ++k) {
          const cplx a = row[k];
          const cplx b = row[k + stride];
          row[k] = c * a + times_i(s, b);
          row[k + stride] = times_i(s, a) + c * b;
        }
      }
    }
  }
}

/// Dense operator given row-major; used for Kraus sets.
struct DenseOperator {
  std::size_t dim = 0;
  std::vector<cplx> m;

  cplx& at(std::size_t r, std::size_t c) { return m[r * dim + c]; }
  const cplx& at(std::size_t r, std::size_t c) const { return m[r * dim + c]; }
};

namespace detail {

inline DenseOperator pauli(int which) {
  DenseOperator p{2, std::vector<cplx>(4)};
  switch (which) {
    case 0: p.at(0, 0) = 1; p.at(1, 1) = 1; break;
    case 1: p.at(0, 1) = 1; p.at(1, 0) = 1; break;
    case 2: p.at(0, 1) = cplx(0, -1); p.at(1, 0) = cplx(0, 1); break;
    default: p.at(0, 0) = 1; p.at(1, 1) = -1; break;
  }
  return p;
}

inline DenseOperator scaled(DenseOperator op, double factor) {
  for (auto& x : op.m) x *= factor;
  return op;
}

/// Kronecker product; `low` acts on the lower-order qubits.
inline DenseOperator kron(const DenseOperator& high, const DenseOperator& low) {
  DenseOperator out{high.dim * low.dim, std::vector<cplx>(high.dim * low.dim * high.dim * low.dim)};
  for (std::size_t a = 0; a < high.dim; ++a)
    for (std::size_t b = 0; b < high.dim; ++b)
      for (std::size_t c = 0; c < low.dim; ++c)
        for (std::size_t e = 0; e < low.dim; ++e)
          out.at(a * low.dim + c, b * low.dim + e) = high.at(a, b) * low.at(c, e);
  return out;
}

}  // namespace detail

/// Kraus operators of a channel. Bit and phase flip are single-qubit sets
/// (applied to each qubit in turn); depolarizing acts on all `n` qubits.
inline std::vector<DenseOperator> kraus_operators(NoiseKind kind, double q, int n = 1) {
  using detail::pauli;
  using detail::scaled;
  switch (kind) {
    case NoiseKind::none: return {pauli(0)};
    case NoiseKind::bit_flip: return {scaled(pauli(0), std::sqrt(1 - q)), scaled(pauli(1), std::sqrt(q))};
    case NoiseKind::phase_flip: return {scaled(pauli(0), std::sqrt(1 - q)), scaled(pauli(3), std::sqrt(q))};
    case NoiseKind::depolarizing: {
      if (n < 1 || n > 5) throw std::invalid_argument("kraus_operators: depolarizing Kraus set limited to n <= 5");
      const std::size_t count = std::size_t{1} << (2 * n);
      std::vector<DenseOperator> out;
      out.reserve(count);
      for (std::size_t code = 0; code < count; ++code) {
        DenseOperator op = pauli(static_cast<int>((code >> (2 * (n - 1))) & 3U));
        for (int k = n - 2; k >= 0; --k) op = detail::kron(op, pauli(static_cast<int>((code >> (2 * k)) & 3U)));
        const double weight = code == 0 ? 1 - q : q / static_cast<double>(count - 1);
        out.push_back(scaled(std::move(op), std::sqrt(weight)));
      }
      return out;
    }
  }
  return {};
}

/// rho <- sum_k K rho K^dagger with full-dimension Kraus operators.
inline void apply_kraus(DensityMatrix& d, std::span<const DenseOperator> kraus) {
  const std::size_t dim = d.dim();
  std::vector<cplx> out(dim * dim), tmp(dim * dim);
  for (const auto& k : kraus) {
    if (k.dim != dim) throw std::invalid_argument("apply_kraus: operator dimension mismatch");
    // tmp = K rho
    for (std::size_t r = 0; r < dim; ++r)
      for (std::size_t c = 0; c < dim; ++c) {
        cplx s = 0.0;
        for (std::size_t t = 0; t < dim; ++t) s += k.at(r, t) * d.at(t, c);
        tmp[r * dim + c] = s;
      }
    // out += tmp K^dagger
    for (std::size_t r = 0; r < dim; ++r)
      for (std::size_t c = 0; c < dim; ++c) {
        cplx s = 0.0;
        for (std::size_t t = 0; t < dim; ++t) s += tmp[r * dim + t] * std::conj(k.at(c, t));
        out[r * dim + c] += s;
      }
  }
  d.rho = std::move(out);
}

/// Applies the noise channel. Bit and phase flip act independently on each
/// qubit; depolarizing is the global mixture over all 4^n - 1 non-identity
/// Pauli strings, evaluated through the identity
///   sum_{P != I} P rho P = 2^n tr(rho) I - rho.
inline void apply_channel(DensityMatrix& d, const NoiseModel& m) {
  m.check();
  const std::size_t dim = d.dim();
  const double q = m.q;
  switch (m.kind) {
    case NoiseKind::none: return;
    case NoiseKind::bit_flip: {
      for (int b = 0; b < d.n; ++b) {
        const std::size_t mask = std::size_t{1} << b;
        std::vector<cplx> next(d.rho.size());
        for (std::size_t r = 0; r < dim; ++r)
          for (std::size_t c = 0; c < dim; ++c)
            next[r * dim + c] = (1 - q) * d.at(r, c) + q * d.at(r ^ mask, c ^ mask);
        d.rho = std::move(next);
      }
      return;
    }
    case NoiseKind::phase_flip: {
      // Z_b rho Z_b flips the sign of entries whose row and column differ in bit b.
      for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c < dim; ++c) {
          const int differing = std::popcount(r ^ c);
          if (differing) d.at(r, c) *= std::pow(1 - 2 * q, differing);
        }
      return;
    }
    case NoiseKind::depolarizing: {
      const double four_n = std::ldexp(1.0, 2 * d.n);
      const double mix = q * four_n / (four_n - 1);
      const cplx tr = d.trace();
      for (auto& x : d.rho) x *= (1 - mix);
      for (std::size_t k = 0; k < dim; ++k) d.at(k, k) += mix * tr / static_cast<double>(dim);
      return;
    }
  }
}

inline DensityMatrix run_qaoa_noisy(const DiagonalHamiltonian& h, const QaoaParams& params,
                                    const NoiseModel& m) {
  params.check();
  m.check();
  DensityMatrix d = plus_density(h.n);
  for (int j = 0; j < params.depth(); ++j) {
    apply_phase_layer(d, h, params.gammas[j]);
    apply_mixer_layer(d, params.betas[j]);
    if (m.placement == NoisePlacement::per_layer) apply_channel(d, m);
  }
  if (m.placement == NoisePlacement::final) apply_channel(d, m);
  return d;
}

inline double expectation(const DensityMatrix& d, const DiagonalHamiltonian& h) {
  if (d.dim() != h.dim()) throw std::invalid_argument("expectation: dimension mismatch");
  double f = 0.0;
  for (std::size_t z = 0; z < d.dim(); ++z) f += d.at(z, z).real() * h.energies[z];
  return f;
}

inline OutputDistribution distribution(const DensityMatrix& d) {
  OutputDistribution out;
  out.probs.resize(d.dim());
  for (std::size_t z = 0; z < d.dim(); ++z) out.probs[z] = d.at(z, z).real();
  return out;
}

/// Empirical distribution of `shots` samples drawn from `dist`.
inline OutputDistribution sample_shots(const OutputDistribution& dist, std::uint64_t shots,
                                       std::uint64_t seed) {
  if (shots == 0) throw std::invalid_argument("sample_shots: shot count must be positive");
  std::vector<double> cdf(dist.dim());
  double acc = 0.0;
  for (std::size_t z = 0; z < dist.dim(); ++z) cdf[z] = acc += std::max(dist.probs[z], 0.0);
  std::mt19937_64 eng(mix_seed(seed));
  std::vector<std::uint64_t> counts(dist.dim(), 0);
  for (std::uint64_t s = 0; s < shots; ++s) {
    const double u = uniform01(eng) * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    ++counts[static_cast<std::size_t>(it - cdf.begin())];
  }
  OutputDistribution out;
  out.probs.resize(dist.dim());
  for (std::size_t z = 0; z < dist.dim(); ++z)
    out.probs[z] = static_cast<double>(counts[z]) / static_cast<double>(shots);
  return out;
}

}  // namespace loopqaoa
