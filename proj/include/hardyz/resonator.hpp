#pragma once

// Construction of the resonator
//
//   R(t) = sum_{m in M'} r(m) m^(-it)
//
// from a prime window P, the multiplicative weight f supported on squarefree
// P-products, the block-count filter defining M, and geometric binning of M at
// ratio 1 + 1/T. The set M is finite (2^|P| candidates) but usually far too
// large to list, so it is enumerated heaviest-first until a requested share of
// its exact mass sum f(n)^2 is captured.
//
// Block structure: P_k = P n (e^k log N log2 N, e^(k+1) log N log2 N] for
// k = 1..floor((log2 N)^gamma). In explicit-window mode primes outside that
// range are clamped into the first or last block.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <optional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "hardyz/double_double.hpp"
#include "hardyz/error.hpp"
#include "hardyz/primes.hpp"
#include "hardyz/special.hpp"

namespace hardyz {

enum class resonator_mode { asymptotic, explicit_window };

/// Lower endpoint of the binning window for r(m_j).
enum class window_lower_endpoint {
  corrected,   // (1 + 1/T)^(j-1)
  as_printed,  // (1 - 1/T)^(j-1)
};

enum class resonator_scheme { bondarenko_seip, soundararajan };

constexpr std::string_view to_string(resonator_mode m) noexcept {
  return m == resonator_mode::asymptotic ? "asymptotic" : "explicit";
}
constexpr std::string_view to_string(window_lower_endpoint w) noexcept {
  return w == window_lower_endpoint::corrected ? "corrected" : "as_printed";
}
constexpr std::string_view to_string(resonator_scheme s) noexcept {
  return s == resonator_scheme::bondarenko_seip ? "bondarenko_seip" : "soundararajan";
}

/// floor(x^(1/k)) for integer-valued reasoning without pow rounding surprises.
inline std::uint64_t integer_root(double x, int k) {
  if (!(x >= 1.0)) return 0;
  auto r = static_cast<std::uint64_t>(std::floor(std::pow(x, 1.0 / k)));
  auto pow_le = [&](std::uint64_t v) {
    long double acc = 1.0L;
    for (int i = 0; i < k; ++i) acc *= static_cast<long double>(v);
    return acc <= static_cast<long double>(x);
  };
  while (r > 0 && !pow_le(r)) --r;
  while (pow_le(r + 1)) ++r;
  return r;
}

struct resonator_params {
  double T = 1e6;
  std::optional<std::uint64_t> N;  // defaults to floor(T^(1/4))
  double epsilon = 0.1;
  double a = 1.05;
  resonator_mode mode = resonator_mode::asymptotic;
  std::optional<std::pair<double, double>> explicit_prime_window;  // (lo, hi]
  double truncation_mass = 0.999;
  std::size_t entry_cap = 10'000'000;
  std::optional<double> block_threshold;  // replaces a log N / (k^2 log3 N) for every block
  window_lower_endpoint lower_endpoint = window_lower_endpoint::corrected;

  double gamma() const { return 1.0 - 3.0 * epsilon; }
  std::uint64_t effective_N() const { return N ? *N : integer_root(T, 4); }

  void validate() const {
    auto fail = [](const std::string& what) { throw error(error_kind::invalid_params, what); };
    if (!(T > 1.0)) fail("resonator_params: T must exceed 1");
    if (!(epsilon > 0.0 && epsilon < 1.0 / 3.0)) fail("resonator_params: epsilon must lie in (0, 1/3)");
    if (!(a > 1.0 && a < 1.0 / (1.0 - epsilon))) fail("resonator_params: a must lie in (1, 1/(1-epsilon))");
    if (effective_N() < 2) fail("resonator_params: N must be at least 2");
    if (!(truncation_mass > 0.0 && truncation_mass <= 1.0)) fail("resonator_params: truncation_mass must lie in (0, 1]");
    if (mode == resonator_mode::explicit_window && !explicit_prime_window) {
      fail("resonator_params: explicit mode needs explicit_prime_window");
    }
    if (block_threshold && !(*block_threshold > 0.0)) fail("resonator_params: block_threshold must be positive");
  }
};

/// log N, log log N, log log log N.
struct log_scales {
  double log1;
  double log2;
  double log3;

  static log_scales of(std::uint64_t n) {
    const double l1 = std::log(static_cast<double>(n));
    const double l2 = std::log(l1);
    return {l1, l2, std::log(l2)};
  }
};

struct prime_partition {
  std::vector<std::uint64_t> primes;  // sorted
  std::vector<int> block_of;          // parallel to primes, values 1..k_max
  int k_max = 1;
  double window_lo = 0.0;
  double window_hi = 0.0;
  log_scales logs{};
};

/// Endpoints (e log N log2 N, log N exp((log2 N)^gamma) log2 N].
inline std::pair<double, double> asymptotic_window(const resonator_params& params) {
  const log_scales s = log_scales::of(params.effective_N());
  const double base = s.log1 * s.log2;
  const double hi = s.log2 > 0.0 ? base * std::exp(std::pow(s.log2, params.gamma())) : base;
  return {M_E * base, hi};
}

inline prime_partition build_prime_partition(const resonator_params& params) {
  params.validate();
  prime_partition out;
  const std::uint64_t n = params.effective_N();
  out.logs = log_scales::of(n);
  const double base = out.logs.log1 * out.logs.log2;

  if (params.mode == resonator_mode::asymptotic) {
    const auto [lo, hi] = asymptotic_window(params);
    out.window_lo = lo;
    out.window_hi = hi;
    if (!(out.logs.log3 > 0.0)) {
      throw error(error_kind::empty_window, "asymptotic prime window undefined: log3 N <= 0",
                  {{"N", n}, {"lo", lo}, {"hi", hi}, {"log3N", out.logs.log3}});
    }
    out.primes = primes_in_window(lo, hi);
    if (out.primes.empty()) {
      throw error(error_kind::empty_window, "asymptotic prime window contains no primes",
                  {{"N", n}, {"lo", lo}, {"hi", hi}});
    }
    out.k_max = std::max(1, static_cast<int>(std::floor(std::pow(out.logs.log2, params.gamma()))));
  } else {
    const auto [lo, hi] = *params.explicit_prime_window;
    out.window_lo = lo;
    out.window_hi = hi;
    out.primes = primes_in_window(lo, hi);
    if (out.primes.empty()) {
      throw error(error_kind::empty_window, "explicit prime window contains no primes", {{"lo", lo}, {"hi", hi}});
    }
    out.k_max = out.logs.log2 > 0.0
                    ? std::max(1, static_cast<int>(std::floor(std::pow(out.logs.log2, params.gamma()))))
                    : 1;
  }

  out.block_of.reserve(out.primes.size());
  for (std::uint64_t p : out.primes) {
    // p in (e^k base, e^(k+1) base]  <=>  k = ceil(log(p/base)) - 1
    int k = base > 0.0 ? static_cast<int>(std::ceil(std::log(static_cast<double>(p) / base))) - 1 : 1;
    out.block_of.push_back(std::clamp(k, 1, out.k_max));
  }
  return out;
}

/// f(p) = sqrt(log N log2 N / log3 N) / (sqrt(p) (log p - log2 N - log3 N)).
inline double weight_f_prime(std::uint64_t p, const log_scales& s) {
  if (!(s.log3 > 0.0)) {
    throw error(error_kind::nonpositive_denominator, "weight f: log3 N must be positive", {{"log3N", s.log3}});
  }
  const double denom = std::log(static_cast<double>(p)) - s.log2 - s.log3;
  if (!(denom > 0.0)) {
    throw error(error_kind::nonpositive_denominator, "weight f: log p - log2 N - log3 N <= 0",
                {{"p", p}, {"denominator", denom}});
  }
  return std::sqrt(s.log1 * s.log2 / s.log3) / (std::sqrt(static_cast<double>(p)) * denom);
}

/// f(n): multiplicative, squarefree-supported, zero on primes outside P.
inline double weight_f(std::uint64_t n, const prime_partition& partition) {
  if (n == 0) return 0.0;
  double f = 1.0;
  for (std::uint64_t p : partition.primes) {
    if (n % p != 0) continue;
    n /= p;
    if (n % p == 0) return 0.0;
    f *= weight_f_prime(p, partition.logs);
  }
  return n == 1 ? f : 0.0;
}

struct support_entry {
  std::uint64_t n;
  double fn;
};

struct weighted_support {
  std::vector<support_entry> entries;  // sorted by n
  double captured_mass = 0.0;          // sum f(n)^2 over entries, ascending n
  double total_mass_bound = 0.0;       // prod (1 + f(p)^2)
  double restricted_mass = 0.0;        // exact sum f(n)^2 over the filtered set M
  std::size_t examined = 0;
  bool complete = false;               // every element of M enumerated

  double neglected_mass() const { return std::max(0.0, restricted_mass - captured_mass); }
};

namespace detail {

/// Heaviest-first enumeration of squarefree products of `primes` with weights
/// g (= coefficient^2), subject to per-block count limits. Stops once the
/// running mass reaches `target_share` of the exact filtered mass.
///
/// Subsets are visited in nonincreasing weight by toggling away from the
/// heaviest subset {p : g_p >= 1}: every toggle multiplies by a factor c <= 1,
/// and the add/replace successor rule over toggles sorted by c produces each
/// subset exactly once.
struct enumeration_input {
  const std::vector<std::uint64_t>& primes;
  const std::vector<double>& coeff;   // f(p) or r(p), positive
  const std::vector<int>& block_of;   // 1..k_max
  int k_max;
  std::vector<double> limit;          // limit[k]: allowed iff count_k < limit[k]; index 0 unused
  double target_share;
  std::size_t cap;
};

inline double filtered_mass(const enumeration_input& in) {
  double total = 1.0;
  for (int k = 1; k <= in.k_max; ++k) {
    // elementary symmetric sums of g over block k
    std::vector<double> e{1.0};
    for (std::size_t i = 0; i < in.primes.size(); ++i) {
      if (in.block_of[i] != k) continue;
      const double g = in.coeff[i] * in.coeff[i];
      e.push_back(0.0);
      for (std::size_t j = e.size() - 1; j > 0; --j) e[j] += e[j - 1] * g;
    }
    double block = 0.0;
    for (std::size_t j = 0; j < e.size(); ++j) {
      if (static_cast<double>(j) < in.limit[static_cast<std::size_t>(k)]) block += e[j];
    }
    total *= block;
  }
  return total;
}

inline weighted_support enumerate(const enumeration_input& in) {
  weighted_support out;
  const std::size_t np = in.primes.size();
  out.total_mass_bound = 1.0;
  for (double c : in.coeff) out.total_mass_bound *= 1.0 + c * c;
  out.restricted_mass = filtered_mass(in);

  std::vector<bool> base(np);
  double base_weight = 1.0;
  for (std::size_t i = 0; i < np; ++i) {
    const double g = in.coeff[i] * in.coeff[i];
    base[i] = g >= 1.0;
    if (base[i]) base_weight *= g;
  }
  std::vector<std::size_t> order(np);
  std::iota(order.begin(), order.end(), 0);
  auto factor = [&](std::size_t i) {
    const double g = in.coeff[i] * in.coeff[i];
    return base[i] ? 1.0 / g : g;
  };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return factor(x) > factor(y); });

  struct node {
    double weight;
    int pos;     // last toggled position in `order`, -1 for the root
    int parent;  // arena index of the node without that toggle
  };
  std::vector<node> arena;
  arena.push_back({base_weight, -1, -1});
  auto cmp = [&](int x, int y) {
    if (arena[x].weight != arena[y].weight) return arena[x].weight < arena[y].weight;
    return x > y;
  };
  std::priority_queue<int, std::vector<int>, decltype(cmp)> heap(cmp);
  heap.push(0);

  std::vector<bool> member(np);
  std::vector<int> counts(static_cast<std::size_t>(in.k_max) + 1);
  const double target = in.target_share * out.restricted_mass;
  double running = 0.0;
  bool stopped_early = false;

  while (!heap.empty()) {
    const int id = heap.top();
    heap.pop();
    if (++out.examined > in.cap) {
      throw error(error_kind::budget_exceeded, "support enumeration exceeded its entry cap", {{"cap", in.cap}});
    }
    const node cur = arena[static_cast<std::size_t>(id)];
    if (cur.pos + 1 < static_cast<int>(np)) {
      const double c_next = factor(order[static_cast<std::size_t>(cur.pos + 1)]);
      arena.push_back({cur.weight * c_next, cur.pos + 1, id});
      heap.push(static_cast<int>(arena.size() - 1));
      if (cur.pos >= 0) {
        const double parent_weight = arena[static_cast<std::size_t>(cur.parent)].weight;
        arena.push_back({parent_weight * c_next, cur.pos + 1, cur.parent});
        heap.push(static_cast<int>(arena.size() - 1));
      }
    }

    member = base;
    for (int walk = id; arena[static_cast<std::size_t>(walk)].pos >= 0; walk = arena[static_cast<std::size_t>(walk)].parent) {
      const std::size_t i = order[static_cast<std::size_t>(arena[static_cast<std::size_t>(walk)].pos)];
      member[i] = !member[i];
    }
    std::fill(counts.begin(), counts.end(), 0);
    bool allowed = true;
    for (std::size_t i = 0; i < np && allowed; ++i) {
      if (!member[i]) continue;
      const int k = in.block_of[i];
      if (static_cast<double>(++counts[static_cast<std::size_t>(k)]) >= in.limit[static_cast<std::size_t>(k)]) {
        allowed = false;
      }
    }
    if (!allowed) continue;

    std::uint64_t n = 1;
    double fn = 1.0;
    for (std::size_t i = 0; i < np; ++i) {
      if (!member[i]) continue;
      if (__builtin_mul_overflow(n, in.primes[i], &n)) {
        throw error(error_kind::budget_exceeded, "support element exceeds the 64-bit range");
      }
      fn *= in.coeff[i];
    }
    out.entries.push_back({n, fn});
    running += fn * fn;
    if (running >= target && !heap.empty()) {
      stopped_early = true;
      break;
    }
  }
  out.complete = !stopped_early;

  std::sort(out.entries.begin(), out.entries.end(), [](const support_entry& x, const support_entry& y) { return x.n < y.n; });
  out.captured_mass = 0.0;
  for (const auto& e : out.entries) out.captured_mass += e.fn * e.fn;
  return out;
}

}  // namespace detail

/// a log N / (k^2 log3 N), or the configured override.
inline double block_limit(const resonator_params& params, const log_scales& s, int k) {
  if (params.block_threshold) return *params.block_threshold;
  return params.a * s.log1 / (static_cast<double>(k) * k * s.log3);
}

inline weighted_support enumerate_support(const prime_partition& partition, const resonator_params& params) {
  if (partition.primes.empty()) throw error(error_kind::empty_window, "enumerate_support: empty prime partition");
  std::vector<double> coeff;
  coeff.reserve(partition.primes.size());
  for (std::uint64_t p : partition.primes) coeff.push_back(weight_f_prime(p, partition.logs));
  std::vector<double> limit(static_cast<std::size_t>(partition.k_max) + 1, 0.0);
  for (int k = 1; k <= partition.k_max; ++k) limit[static_cast<std::size_t>(k)] = block_limit(params, partition.logs, k);
  return detail::enumerate({partition.primes, coeff, partition.block_of, partition.k_max, std::move(limit),
                            params.truncation_mass, params.entry_cap});
}

struct resonator_poly {
  resonator_scheme scheme = resonator_scheme::bondarenko_seip;
  resonator_params params;
  std::vector<std::uint64_t> m;  // strictly increasing
  std::vector<double> r;         // positive
  double mass_L = 0.0;
  double captured_mass = 0.0;
  double total_mass_bound = 0.0;
  std::size_t support_size = 0;  // |M| as enumerated

  std::size_t size() const { return m.size(); }
  double sum_r() const { return std::accumulate(r.begin(), r.end(), 0.0); }
  double sum_r2() const {
    double s = 0.0;
    for (double x : r) s += x * x;
    return s;
  }
};

/// Bin index j(n) = floor(log n / log(1 + 1/T)).
inline std::int64_t bin_index(std::uint64_t n, double T) {
  const long double step = std::log1p(1.0L / static_cast<long double>(T));
  return static_cast<std::int64_t>(std::floor(std::log(static_cast<long double>(n)) / step));
}

inline resonator_poly bin_support(const weighted_support& support, double T,
                                  window_lower_endpoint lower = window_lower_endpoint::corrected) {
  if (support.entries.empty()) throw error(error_kind::invalid_params, "bin_support: empty support");
  const auto& e = support.entries;
  std::vector<std::int64_t> bins(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) bins[i] = bin_index(e[i].n, T);

  resonator_poly poly;
  poly.captured_mass = support.captured_mass;
  poly.total_mass_bound = support.total_mass_bound;
  poly.mass_L = support.captured_mass;
  poly.support_size = e.size();

  std::vector<double> prefix;  // only for the as-printed window, which reaches down to n = 1
  if (lower == window_lower_endpoint::as_printed) {
    prefix.resize(e.size() + 1, 0.0);
    for (std::size_t i = 0; i < e.size(); ++i) prefix[i + 1] = prefix[i] + e[i].fn * e[i].fn;
  }
  const long double log_down = std::log1p(-1.0L / static_cast<long double>(T));

  for (std::size_t i = 0; i < e.size();) {
    const std::int64_t j = bins[i];
    std::size_t next = i;
    while (next < e.size() && bins[next] == j) ++next;
    const auto hi = std::upper_bound(bins.begin(), bins.end(), j + 1) - bins.begin();
    double r2 = 0.0;
    if (lower == window_lower_endpoint::corrected) {
      const auto lo = std::lower_bound(bins.begin(), bins.end(), j - 1) - bins.begin();
      for (auto k = lo; k < hi; ++k) r2 += e[static_cast<std::size_t>(k)].fn * e[static_cast<std::size_t>(k)].fn;
    } else {
      const long double log_lo = static_cast<long double>(j - 1) * log_down;
      std::size_t lo = 0;
      while (lo < static_cast<std::size_t>(hi) && std::log(static_cast<long double>(e[lo].n)) < log_lo) ++lo;
      r2 = prefix[static_cast<std::size_t>(hi)] - prefix[lo];
    }
    poly.m.push_back(e[i].n);
    poly.r.push_back(std::sqrt(r2));
    i = next;
  }
  return poly;
}

/// Full construction: partition, filtered support, binning.
inline resonator_poly build_resonator(const resonator_params& params) {
  const prime_partition partition = build_prime_partition(params);
  const weighted_support support = enumerate_support(partition, params);
  resonator_poly poly = bin_support(support, params.T, params.lower_endpoint);
  poly.params = params;
  return poly;
}

inline std::complex<double> eval_resonator(const resonator_poly& poly, double t) {
  std::complex<double> s{0.0, 0.0};
  for (std::size_t j = 0; j < poly.m.size(); ++j) {
    s += std::polar(poly.r[j], -dd::reduce_two_pi(log_dd(poly.m[j]) * t));
  }
  return s;
}

inline double resonator_abs2(const resonator_poly& poly, double t) { return std::norm(eval_resonator(poly, t)); }

struct lemma_ratio_report {
  std::uint64_t N = 0;
  std::size_t support_size = 0;  // |M|
  std::size_t binned_size = 0;   // |M'|
  double sum_r = 0.0;
  double sum_r2 = 0.0;
  double mass_L = 0.0;
  double ratio_binned_over_N = 0.0;
  double ratio_support_over_N = 0.0;
  double ratio_sum_r = 0.0;   // sum r / (T^(1/8) log T sqrt(L))
  double ratio_sum_r2 = 0.0;  // sum r^2 / ((log T)^2 L)
  bool size_chain_holds = false;  // |M'| <= |M| <= N
};

inline lemma_ratio_report lemma_ratios(const resonator_poly& poly) {
  lemma_ratio_report rep;
  const double T = poly.params.T;
  const double log_t = std::log(T);
  rep.N = poly.params.effective_N();
  rep.support_size = poly.support_size;
  rep.binned_size = poly.size();
  rep.sum_r = poly.sum_r();
  rep.sum_r2 = poly.sum_r2();
  rep.mass_L = poly.mass_L;
  rep.ratio_binned_over_N = static_cast<double>(rep.binned_size) / static_cast<double>(rep.N);
  rep.ratio_support_over_N = static_cast<double>(rep.support_size) / static_cast<double>(rep.N);
  rep.ratio_sum_r = rep.sum_r / (std::pow(T, 0.125) * log_t * std::sqrt(poly.mass_L));
  rep.ratio_sum_r2 = rep.sum_r2 / (log_t * log_t * poly.mass_L);
  rep.size_chain_holds = rep.binned_size <= rep.support_size && rep.support_size <= rep.N;
  return rep;
}

struct soundararajan_params {
  double T = 1e6;
  std::optional<std::uint64_t> N;  // defaults to floor(T^(1/2))
  std::optional<std::pair<double, double>> prime_window;  // defaults to [L^2, exp((log L)^2)]
  double truncation_mass = 0.999;
  std::size_t entry_cap = 10'000'000;

  std::uint64_t effective_N() const { return N ? *N : integer_root(T, 2); }
  double L() const {
    const log_scales s = log_scales::of(effective_N());
    return std::sqrt(s.log1 * s.log2);
  }
  std::pair<double, double> window() const {
    if (prime_window) return *prime_window;
    const double l = L();
    // closed at L^2: nudge the open lower end just below it
    return {std::nextafter(l * l, 0.0), std::exp(std::log(l) * std::log(l))};
  }
};

/// Multiplicative resonator with r(p) = L / (sqrt(p) log p) on the window,
/// L = sqrt(log N log2 N); no binning, mass truncation as above.
inline resonator_poly soundararajan_resonator(const soundararajan_params& sp) {
  if (!(sp.T >= 1e3)) throw error(error_kind::domain, "soundararajan_resonator: requires T >= 1e3", {{"T", sp.T}});
  if (sp.effective_N() < 16) throw error(error_kind::invalid_params, "soundararajan_resonator: N too small for log log N > 0");
  const auto [lo, hi] = sp.window();
  std::vector<std::uint64_t> primes = primes_in_window(lo, hi);
  if (primes.empty()) {
    throw error(error_kind::empty_window, "soundararajan prime window contains no primes", {{"lo", lo}, {"hi", hi}});
  }
  const double l = sp.L();
  std::vector<double> coeff;
  for (std::uint64_t p : primes) coeff.push_back(l / (std::sqrt(static_cast<double>(p)) * std::log(static_cast<double>(p))));
  const std::vector<int> blocks(primes.size(), 1);
  std::vector<double> limit{0.0, static_cast<double>(primes.size()) + 1.0};
  const weighted_support sup =
      detail::enumerate({primes, coeff, blocks, 1, std::move(limit), sp.truncation_mass, sp.entry_cap});

  resonator_poly poly;
  poly.scheme = resonator_scheme::soundararajan;
  poly.params.T = sp.T;
  poly.params.N = sp.effective_N();
  poly.params.mode = resonator_mode::explicit_window;
  poly.params.explicit_prime_window = std::make_pair(lo, hi);
  poly.params.truncation_mass = sp.truncation_mass;
  poly.params.entry_cap = sp.entry_cap;
  for (const auto& e : sup.entries) {
    poly.m.push_back(e.n);
    poly.r.push_back(e.fn);
  }
  poly.mass_L = sup.captured_mass;
  poly.captured_mass = sup.captured_mass;
  poly.total_mass_bound = sup.total_mass_bound;
  poly.support_size = sup.entries.size();
  return poly;
}

/// Single-term resonator R(t) = r m^(-it), handy as the K = 1 weight.
inline resonator_poly unit_resonator(double T, std::uint64_t m = 1, double r = 1.0) {
  resonator_poly poly;
  poly.params.T = T;
  poly.params.mode = resonator_mode::explicit_window;
  poly.m = {m};
  poly.r = {r};
  poly.mass_L = r * r;
  poly.captured_mass = r * r;
  poly.total_mass_bound = r * r;
  poly.support_size = 1;
  return poly;
}

}  // namespace hardyz
