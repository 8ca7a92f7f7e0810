#pragma once

// Exhaustive reference construction of small resonators: every subset of the
// prime window is listed by bitmask, bins are located by comparing n against
// powers of (1 + 1/T) directly, and window sums are plain scans. Shares no code
// with the enumeration in hardyz/resonator.hpp.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

namespace hardyz::reference {

struct toy_config {
  std::vector<std::uint64_t> primes;  // the window's primes, ascending
  std::uint64_t N = 31;
  double epsilon = 0.1;
  double a = 1.05;
  std::optional<double> block_threshold;
  double T = 100.0;
  double truncation_mass = 1.0;
  bool as_printed_lower = false;
};

struct toy_result {
  std::vector<std::uint64_t> support;  // sorted n in M (after truncation)
  std::vector<double> support_f;
  std::vector<std::uint64_t> m;
  std::vector<double> r;
  double L = 0.0;
  double total_mass_bound = 0.0;  // prod (1 + f(p)^2) over the window
};

inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

inline std::vector<std::uint64_t> primes_between(double lo, double hi) {
  std::vector<std::uint64_t> v;
  for (auto n = static_cast<std::uint64_t>(std::max(0.0, std::floor(lo))) + 1; static_cast<double>(n) <= hi; ++n) {
    if (is_prime(n)) v.push_back(n);
  }
  return v;
}

inline toy_result build(const toy_config& c) {
  const double l1 = std::log(static_cast<double>(c.N));
  const double l2 = std::log(l1);
  const double l3 = std::log(l2);
  const double gamma = 1.0 - 3.0 * c.epsilon;
  const int k_max = std::max(1, static_cast<int>(std::floor(std::pow(l2, gamma))));
  const double base = l1 * l2;

  const std::size_t np = c.primes.size();
  std::vector<double> f(np);
  std::vector<int> block(np);
  for (std::size_t i = 0; i < np; ++i) {
    const auto p = static_cast<double>(c.primes[i]);
    f[i] = std::sqrt(l1 * l2 / l3) / (std::sqrt(p) * (std::log(p) - l2 - l3));
    int k = 1;
    while (k < k_max && p > std::exp(static_cast<double>(k + 1)) * base) ++k;
    block[i] = k;
  }

  struct item {
    std::uint64_t n;
    double f;
  };
  std::vector<item> all;
  double total = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << np); ++mask) {
    std::vector<int> count(static_cast<std::size_t>(k_max) + 1, 0);
    std::uint64_t n = 1;
    double fn = 1.0;
    for (std::size_t i = 0; i < np; ++i) {
      if (!(mask >> i & 1)) continue;
      n *= c.primes[i];
      fn *= f[i];
      ++count[static_cast<std::size_t>(block[i])];
    }
    bool excluded = false;
    for (int k = 1; k <= k_max; ++k) {
      const double limit = c.block_threshold ? *c.block_threshold : c.a * l1 / (static_cast<double>(k) * k * l3);
      if (count[static_cast<std::size_t>(k)] >= limit) excluded = true;
    }
    if (excluded) continue;
    all.push_back({n, fn});
    total += fn * fn;
  }

  std::sort(all.begin(), all.end(), [](const item& x, const item& y) { return x.f * x.f > y.f * y.f; });
  std::vector<item> kept;
  double running = 0.0;
  for (const auto& it : all) {
    kept.push_back(it);
    running += it.f * it.f;
    if (running >= c.truncation_mass * total) break;
  }
  std::sort(kept.begin(), kept.end(), [](const item& x, const item& y) { return x.n < y.n; });

  toy_result out;
  out.total_mass_bound = 1.0;
  for (double fp : f) out.total_mass_bound *= 1.0 + fp * fp;
  for (const auto& it : kept) {
    out.support.push_back(it.n);
    out.support_f.push_back(it.f);
    out.L += it.f * it.f;
  }

  const long double q = 1.0L + 1.0L / static_cast<long double>(c.T);
  auto bin_of = [&](std::uint64_t n) {
    long long j = 0;
    while (std::pow(q, static_cast<long double>(j + 1)) <= static_cast<long double>(n)) ++j;
    return j;
  };
  std::vector<long long> bins;
  for (auto n : out.support) bins.push_back(bin_of(n));
  for (std::size_t i = 0; i < out.support.size(); ++i) {
    if (i > 0 && bins[i] == bins[i - 1]) continue;
    const long long j = bins[i];
    const long double lower = c.as_printed_lower ? std::pow(1.0L - 1.0L / static_cast<long double>(c.T), static_cast<long double>(j - 1))
                                                 : std::pow(q, static_cast<long double>(j - 1));
    const long double upper = std::pow(q, static_cast<long double>(j + 2));
    double r2 = 0.0;
    for (std::size_t k = 0; k < out.support.size(); ++k) {
      const auto n = static_cast<long double>(out.support[k]);
      if (n >= lower && n <= upper) r2 += out.support_f[k] * out.support_f[k];
    }
    out.m.push_back(out.support[i]);
    out.r.push_back(std::sqrt(r2));
  }
  return out;
}

}  // namespace hardyz::reference
