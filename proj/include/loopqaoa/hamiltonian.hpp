#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "loopqaoa/graph.hpp"

namespace loopqaoa {

inline constexpr int kMaxStateQubits = 20;

/// Max-Cut problem Hamiltonian H_P = -1/2 sum w_ij (1 - Z_i Z_j), stored as
/// its diagonal over the 2^n computational basis states (little-endian).
struct DiagonalHamiltonian {
  int n = 0;
  std::vector<double> energies;
  /// Source edges, when built from a graph; lets the simulator form
  /// exp(-i gamma H_P) from per-edge phases instead of 2^n sin/cos calls.
  std::vector<Edge> edges;

  std::size_t dim() const { return energies.size(); }
  double min_energy() const { return *std::min_element(energies.begin(), energies.end()); }
};

inline DiagonalHamiltonian build_hamiltonian(const WeightedGraph& g, int max_qubits = kMaxStateQubits) {
  if (g.n < 1 || g.n > max_qubits)
    throw std::invalid_argument("build_hamiltonian: n = " + std::to_string(g.n) +
                                " outside supported range [1, " + std::to_string(max_qubits) + "]");
  DiagonalHamiltonian h;
  h.n = g.n;
  h.edges = g.edges;
  const std::size_t dim = std::size_t{1} << g.n;
  h.energies.assign(dim, 0.0);
  // Accumulate edge by edge in edge-list order, so energies[z] is the same
  // floating-point sum as -cut_value(g, z).
  for (const auto& e : g.edges) {
    for (std::size_t z = 0; z < dim; ++z)
      if (((z >> e.i) ^ (z >> e.j)) & 1U) h.energies[z] -= e.w;
  }
  return h;
}

/// All basis indices attaining the minimum energy; exact ties retained.
inline std::vector<std::uint64_t> ground_states(const DiagonalHamiltonian& h) {
  std::vector<std::uint64_t> out;
  if (h.energies.empty()) return out;
  const double e0 = h.min_energy();
  for (std::size_t z = 0; z < h.dim(); ++z)
    if (h.energies[z] == e0) out.push_back(z);
  return out;
}

}  // namespace loopqaoa
