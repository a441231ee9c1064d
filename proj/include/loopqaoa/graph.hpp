#pragma once

// Weighted Max-Cut instances: generation, cut evaluation, exact solving,
// validation and JSON-lines serialization.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iosfwd>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "loopqaoa/random.hpp"

namespace loopqaoa {

struct Edge {
  int i = 0;
  int j = 0;
  double w = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct WeightedGraph {
  int n = 0;
  std::vector<Edge> edges;
  /// Seed the instance was generated from; 0 for hand-built graphs.
  std::uint64_t seed = 0;

  double total_weight() const {
    double s = 0.0;
    for (const auto& e : edges) s += e.w;
    return s;
  }

  std::vector<double> weights() const {
    std::vector<double> out;
    out.reserve(edges.size());
    for (const auto& e : edges) out.push_back(e.w);
    return out;
  }

  friend bool operator==(const WeightedGraph&, const WeightedGraph&) = default;
};

/// Spin assignment z in {+1,-1}^n. Basis index bit b of vertex i maps to
/// spin 1 - 2b (little-endian: bit i of the index belongs to vertex i).
struct CutAssignment {
  std::vector<int> spins;

  static CutAssignment from_index(std::uint64_t index, int n) {
    CutAssignment z;
    z.spins.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) z.spins[i] = ((index >> i) & 1U) ? -1 : 1;
    return z;
  }

  std::uint64_t to_index() const {
    std::uint64_t index = 0;
    for (std::size_t i = 0; i < spins.size(); ++i)
      if (spins[i] < 0) index |= std::uint64_t{1} << i;
    return index;
  }

  CutAssignment flipped() const {
    CutAssignment z = *this;
    for (auto& s : z.spins) s = -s;
    return z;
  }

  friend bool operator==(const CutAssignment&, const CutAssignment&) = default;
};

struct ExactSolution {
  double c_max = 0.0;
  /// Basis indices of every maximizing assignment, ascending. Closed under
  /// complement.
  std::vector<std::uint64_t> optima;

  bool is_optimal(std::uint64_t index) const {
    return std::binary_search(optima.begin(), optima.end(), index);
  }
};

inline constexpr int kBruteForceMaxVertices = 26;

/// 1/2 sum w_ij (1 - z_i z_j): total weight of the edges crossing the cut.
inline double maxcut_value(const WeightedGraph& g, const CutAssignment& z) {
  if (static_cast<int>(z.spins.size()) != g.n)
    throw std::invalid_argument("maxcut_value: assignment length " + std::to_string(z.spins.size()) +
                                " does not match vertex count " + std::to_string(g.n));
  double c = 0.0;
  for (const auto& e : g.edges) c += 0.5 * e.w * (1 - z.spins[e.i] * z.spins[e.j]);
  return c;
}

/// Same as maxcut_value with the assignment given as a basis index.
inline double cut_value(const WeightedGraph& g, std::uint64_t index) {
  double c = 0.0;
  for (const auto& e : g.edges)
    if (((index >> e.i) ^ (index >> e.j)) & 1U) c += e.w;
  return c;
}

inline ExactSolution brute_force_solve(const WeightedGraph& g) {
  if (g.n < 1) throw std::invalid_argument("brute_force_solve: empty graph");
  if (g.n > kBruteForceMaxVertices)
    throw std::invalid_argument("brute_force_solve: n = " + std::to_string(g.n) +
                                " exceeds enumeration bound " +
                                std::to_string(kBruteForceMaxVertices));
  // Vertex 0 pinned to spin +1; the other half is the mirror image.
  const std::uint64_t half = std::uint64_t{1} << (g.n - 1);
  const std::uint64_t mask = (std::uint64_t{1} << g.n) - 1;
  std::vector<double> values(half);
  double best = -1.0;
  for (std::uint64_t k = 0; k < half; ++k) {
    const std::uint64_t z = k << 1;
    values[k] = cut_value(g, z);
    best = std::max(best, values[k]);
  }
  ExactSolution sol;
  sol.c_max = best;
  for (std::uint64_t k = 0; k < half; ++k) {
    if (values[k] == best) {
      sol.optima.push_back(k << 1);
      sol.optima.push_back((k << 1) ^ mask);
    }
  }
  std::sort(sol.optima.begin(), sol.optima.end());
  return sol;
}

struct ValidateOptions {
  /// Required vertex degree; nullopt accepts any degree sequence.
  std::optional<int> degree = 3;
  bool require_connected = true;
};

/// Returns human-readable violations; empty when the graph is valid.
inline std::vector<std::string> validate(const WeightedGraph& g, const ValidateOptions& opt = {}) {
  std::vector<std::string> out;
  if (g.n < 1) {
    out.push_back("vertex count must be positive");
    return out;
  }
  std::set<std::pair<int, int>> seen;
  std::vector<int> degree(static_cast<std::size_t>(g.n), 0);
  std::vector<int> parent(static_cast<std::size_t>(g.n));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  bool indices_ok = true;
  for (const auto& e : g.edges) {
    const std::string tag = "(" + std::to_string(e.i) + "," + std::to_string(e.j) + ")";
    if (e.i < 0 || e.j < 0 || e.i >= g.n || e.j >= g.n) {
      out.push_back("edge " + tag + " index out of range");
      indices_ok = false;
      continue;
    }
    if (e.i == e.j) {
      out.push_back("self-loop at vertex " + std::to_string(e.i));
      continue;
    }
    if (e.i > e.j) out.push_back("edge " + tag + " not ordered i < j");
    if (!seen.insert(std::minmax(e.i, e.j)).second) out.push_back("duplicate edge " + tag);
    if (!std::isfinite(e.w)) out.push_back("edge " + tag + " has non-finite weight");
    else if (e.w < 0.0) out.push_back("edge " + tag + " has negative weight");
    ++degree[e.i];
    ++degree[e.j];
    parent[find(e.i)] = find(e.j);
  }
  if (opt.degree) {
    for (int v = 0; v < g.n; ++v)
      if (degree[v] != *opt.degree)
        out.push_back("vertex " + std::to_string(v) + " has degree " + std::to_string(degree[v]) +
                      ", expected " + std::to_string(*opt.degree));
  }
  if (opt.require_connected && indices_ok) {
    const int root = find(0);
    for (int v = 1; v < g.n; ++v) {
      if (find(v) != root) {
        out.push_back("disconnected");
        break;
      }
    }
  }
  return out;
}

namespace detail {

template <class Engine>
void assign_uniform_weights(WeightedGraph& g, Engine& eng) {
  // (0,1]: 1 - U[0,1).
  for (auto& e : g.edges) e.w = 1.0 - uniform01(eng);
}

}  // namespace detail

/// Random connected 3-regular graph with i.i.d. uniform (0,1] weights,
/// built by the pairing model with rejection. Deterministic in (n, seed).
inline WeightedGraph generate_w3r(int n, std::uint64_t seed) {
  if (n < 4) throw std::invalid_argument("n must be at least 4 for 3-regular");
  if (n % 2 != 0) throw std::invalid_argument("n must be even for 3-regular");
  std::mt19937_64 eng(mix_seed(seed));
  std::vector<int> stubs(static_cast<std::size_t>(3 * n));
  for (;;) {
    for (int v = 0; v < n; ++v)
      for (int k = 0; k < 3; ++k) stubs[3 * v + k] = v;
    for (std::size_t k = stubs.size() - 1; k > 0; --k)
      std::swap(stubs[k], stubs[uniform_index(eng, k + 1)]);

    WeightedGraph g{n, {}, seed};
    std::set<std::pair<int, int>> seen;
    bool simple = true;
    for (std::size_t k = 0; k < stubs.size(); k += 2) {
      auto [a, b] = std::minmax(stubs[k], stubs[k + 1]);
      if (a == b || !seen.emplace(a, b).second) {
        simple = false;
        break;
      }
    }
    if (!simple) continue;
    for (auto [a, b] : seen) g.edges.push_back({a, b, 0.0});
    if (!validate(g).empty()) continue;
    detail::assign_uniform_weights(g, eng);
    return g;
  }
}

/// Complete graph K_n with i.i.d. uniform (0,1] weights.
inline WeightedGraph generate_complete(int n, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("complete graph needs n >= 2");
  std::mt19937_64 eng(mix_seed(seed));
  WeightedGraph g{n, {}, seed};
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) g.edges.push_back({i, j, 0.0});
  detail::assign_uniform_weights(g, eng);
  return g;
}

// JSON lines: {"n": int, "edges": [[i, j, w], ...], "seed": int}

inline nlohmann::json to_json(const WeightedGraph& g) {
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : g.edges) edges.push_back({e.i, e.j, e.w});
  return {{"n", g.n}, {"edges", std::move(edges)}, {"seed", g.seed}};
}

inline WeightedGraph graph_from_json(const nlohmann::json& j) {
  WeightedGraph g;
  g.n = j.at("n").get<int>();
  g.seed = j.value("seed", std::uint64_t{0});
  for (const auto& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 3) throw std::invalid_argument("edge must be [i, j, w]");
    Edge edge{e[0].get<int>(), e[1].get<int>(), e[2].get<double>()};
    if (edge.i > edge.j) std::swap(edge.i, edge.j);
    g.edges.push_back(edge);
  }
  return g;
}

inline void write_graphs(std::ostream& os, std::span<const WeightedGraph> graphs) {
  for (const auto& g : graphs) os << to_json(g).dump() << '\n';
}

inline std::vector<WeightedGraph> read_graphs(std::istream& is) {
  std::vector<WeightedGraph> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(graph_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& ex) {
      throw std::invalid_argument("graph file line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return out;
}

inline std::vector<WeightedGraph> read_graphs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open graph file: " + path);
  return read_graphs(in);
}

inline void write_graphs(const std::string& path, std::span<const WeightedGraph> graphs) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write graph file: " + path);
  write_graphs(out, graphs);
}

}  // namespace loopqaoa
