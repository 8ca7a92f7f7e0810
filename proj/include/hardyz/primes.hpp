#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace hardyz {

/// Primes p with lo < p <= hi by a segmented sieve of Eratosthenes.
inline std::vector<std::uint64_t> primes_in_window(double lo, double hi) {
  std::vector<std::uint64_t> out;
  if (!(hi >= 2.0) || !(hi > lo)) return out;
  const auto top = static_cast<std::uint64_t>(std::floor(hi));
  const std::uint64_t bottom = lo < 1.0 ? 2 : static_cast<std::uint64_t>(std::floor(lo)) + 1;
  if (bottom > top) return out;

  const auto root = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(top))) + 1;
  std::vector<bool> small(root + 1, true);
  std::vector<std::uint64_t> base;
  for (std::uint64_t i = 2; i <= root; ++i) {
    if (!small[i]) continue;
    base.push_back(i);
    for (std::uint64_t j = i * i; j <= root; j += i) small[j] = false;
  }

  constexpr std::uint64_t segment = 1 << 16;
  for (std::uint64_t start = std::max<std::uint64_t>(bottom, 2); start <= top; start += segment) {
    const std::uint64_t stop = std::min(top, start + segment - 1);
    std::vector<bool> is_prime(stop - start + 1, true);
    for (std::uint64_t p : base) {
      if (p * p > stop) break;
      std::uint64_t first = std::max(p * p, (start + p - 1) / p * p);
      for (std::uint64_t j = first; j <= stop; j += p) is_prime[j - start] = false;
    }
    for (std::uint64_t v = start; v <= stop; ++v) {
      if (is_prime[v - start]) out.push_back(v);
    }
  }
  return out;
}

}  // namespace hardyz
