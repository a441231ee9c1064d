#pragma once

#include <cstdint>

namespace loopqaoa {

/// splitmix64 finalizer; used to derive independent child seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept {
  return mix_seed(mix_seed(parent) ^ (index * 0xd1b54a32d192ed03ULL + 1));
}

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit engine draw.
/// Spelled out so results do not depend on the standard library's
/// distribution implementations.
template <class Engine>
double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

template <class Engine>
double uniform_real(Engine& eng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(eng);
}

template <class Engine>
std::uint64_t uniform_index(Engine& eng, std::uint64_t bound) {
  // Lemire-style rejection to stay unbiased.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t x;
  do {
    x = eng();
  } while (x >= limit);
  return x % bound;
}

}  // namespace loopqaoa
