#pragma once

// Hardy's Z-function on the critical line, evaluated two independent ways:
//
//   * hardy_z_main_sum: the Riemann-Siegel main sum
//       Z(t) = 2 sum_{n <= sqrt(t/2pi)} n^{-1/2} cos(theta(t) - t log n) + remainder,
//     with the remainder optionally replaced by the C0 and C1 correction terms.
//   * hardy_z_oracle: Z(t) = exp(i theta(t)) zeta(1/2 + it), zeta by
//     Euler-Maclaurin and theta from a complex log-Gamma.
//
// Phase convention. The cosine argument is theta(t) - t log n, i.e. to leading
// order t log(sqrt(t/2pi)/n) - t/2 - pi/8. A variant with "- t/n" in place of
// "- t/2" circulates in print; it is not the Riemann-Siegel phase.
// printed_phase() exposes both so the disagreement can be reported.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>

#include "hardyz/double_double.hpp"
#include "hardyz/error.hpp"
#include "hardyz/special.hpp"

namespace hardyz {

enum class method { riemann_siegel, oracle };
enum class correction_level { none, first };
enum class summation_order { ascending, descending };
enum class phase_convention { half_t, t_over_n };

constexpr std::string_view to_string(method m) noexcept {
  return m == method::riemann_siegel ? "riemann_siegel" : "oracle";
}

struct z_evaluation {
  double t = 0.0;
  double z = 0.0;
  method how = method::riemann_siegel;
  double error_budget = 0.0;
};

/// Remainder constants of the main sum: |error| <= c * t^-1/4 without
/// corrections and <= c * t^-3/4 with the C0 and C1 terms (t >= 50). The
/// second constant dominates Gabcke's 0.053 t^-5/4 for t >= 7.1 and was
/// checked against the oracle on [50, 1e4].
inline constexpr double rs_budget_constant_none = 1.6;
inline constexpr double rs_budget_constant_first = 0.02;

/// Heights beyond this lose too much of the double-double phase to be useful.
inline constexpr double max_height = 1e13;
inline constexpr double min_main_sum_height = 50.0;

namespace detail {

inline constexpr std::array<double, 22> rs_c0{
    .38268343236508977173,  .43724046807752044936,  .13237657548034352332,  -.01360502604767418865,
    -.01356762197010358089, -.00162372532314446528, .00029705353733379691,  .00007943300879521470,
    .00000046556124614505,  -.00000143272516309551, -.00000010354378684559, .00000001235792708386,
    .00000000178810838580,  -.00000000003391414390, -.00000000001632663390, -.00000000000037851093,
    .00000000000009327423,  .00000000000000522184,  -.00000000000000033507, -.00000000000000003412,
    .00000000000000000058,  .00000000000000000015};

inline constexpr std::array<double, 23> rs_c1{
    -.02682510262837534703, .01378477342635185305,  .03849125048223508223,  .00987106629906207647,
    -.00331075976085840433, -.00146478085779541508, -.00001320794062342119, .00005922748701847141,
    .00000598024258537345,  -.00000096413224561698, -.00000018334733722714, .00000000446708756272,
    .00000000270963508218,  .00000000007785288654,  -.00000000002343762601, -.00000000000158301728,
    .00000000000012119942,  .00000000000001458378,  -.00000000000000028786, -.00000000000000008663,
    -.00000000000000000084, .00000000000000000036,  .00000000000000000001};

/// Coefficient of t^-(2k-1) in the asymptotic expansion of theta.
inline double theta_series_coefficient(int k) {
  const double b = std::abs(bernoulli_even[static_cast<std::size_t>(k)]);
  return (1.0 - std::ldexp(1.0, 1 - 2 * k)) * b / (4.0 * k * (2.0 * k - 1.0));
}

inline constexpr double eps = std::numeric_limits<double>::epsilon();

}  // namespace detail

/// Default number of correction terms 1/(48t), 7/(5760t^3), ... in theta.
inline constexpr int theta_default_terms = 5;

namespace detail {
inline const std::array<double, 16>& theta_coefficients() {
  static const std::array<double, 16> c = [] {
    std::array<double, 16> out{};
    for (int k = 1; k < 16; ++k) out[static_cast<std::size_t>(k)] = theta_series_coefficient(k);
    return out;
  }();
  return c;
}
}  // namespace detail

/// Sum of the theta correction series at t (odd in t).
inline double theta_corrections(double t, int terms = theta_default_terms) {
  const auto& c = detail::theta_coefficients();
  const double inv = 1.0 / t;
  const double inv2 = inv * inv;
  double s = 0.0;
  for (int k = terms; k >= 1; --k) s = s * inv2 + c[static_cast<std::size_t>(k)];
  return s * inv;
}

/// Truncation bound of theta_corrections: twice the first omitted term plus
/// the exponentially small part (1/2) exp(-pi t) the power series cannot see.
inline double theta_truncation_bound(double t, int terms = theta_default_terms) {
  const double at = std::abs(t);
  return 2.0 * detail::theta_series_coefficient(terms + 1) * std::pow(at, -(2.0 * terms + 1.0)) +
         0.5 * std::exp(-M_PI * at);
}

struct theta_value {
  double value;
  double truncation_bound;
};

inline void require_theta_domain(double t) {
  if (!(t >= 1.0)) throw error(error_kind::domain, "theta: requires t >= 1", {{"t", t}});
}

/// Riemann-Siegel theta from its asymptotic series, t >= 1.
inline theta_value theta_with_bound(double t, int terms = theta_default_terms) {
  require_theta_domain(t);
  const double main = 0.5 * t * std::log(t / (2.0 * M_PI)) - 0.5 * t - M_PI / 8.0;
  return {main + theta_corrections(t, terms), theta_truncation_bound(t, terms)};
}

inline double theta(double t) { return theta_with_bound(t).value; }

/// theta(t) reduced into [-pi, pi] with the leading terms in double-double.
inline double theta_reduced(double t) {
  require_theta_domain(t);
  const double half_t = 0.5 * t;
  const dd::dd_real log_x = dd::log(dd::dd_real(t) / dd::two_pi);
  const dd::dd_real main = log_x * half_t - dd::dd_real(half_t) - dd::pi_over_8;
  const double r = dd::reduce_two_pi(main) + theta_corrections(t);
  return std::remainder(r, 2.0 * M_PI);
}

/// theta(t) = Im logGamma(1/4 + it/2) - (t/2) log pi; valid for all t >= 0.
inline double theta_loggamma(double t) {
  return log_gamma(complex(0.25, 0.5 * t)).imag() - 0.5 * t * std::log(M_PI);
}

/// The cosine argument of the main-sum term n in either printed convention,
/// without the theta correction series.
inline double printed_phase(std::uint64_t n, double t, phase_convention c) {
  const double base = t * std::log(std::sqrt(t / (2.0 * M_PI)) / static_cast<double>(n)) - M_PI / 8.0;
  return c == phase_convention::half_t ? base - 0.5 * t : base - t / static_cast<double>(n);
}

namespace detail {
// sum_k c[k] x^k as two interleaved fma chains in x^2.
template <std::size_t M>
inline double poly_even_odd(const std::array<double, M>& c, double x) {
  const double x2 = x * x;
  double even = 0.0;
  double odd = 0.0;
  std::size_t k = M;
  if (k % 2 == 1) even = c[--k];
  while (k > 0) {
    odd = std::fma(odd, x2, c[--k]);
    even = std::fma(even, x2, c[--k]);
  }
  return std::fma(odd, x, even);
}
}  // namespace detail

/// C0(p) = cos(2pi(p^2 - p - 1/16)) / cos(2pi p) through its series in z = 2p - 1.
inline double rs_c0(double z) { return detail::poly_even_odd(detail::rs_c0, z * z); }

/// C1(p) = -Psi'''(p) / (96 pi^2) through its odd series in z = 2p - 1.
inline double rs_c1(double z) { return detail::poly_even_odd(detail::rs_c1, z * z) * z; }

/// Number of terms floor(sqrt(t/2pi)) in the main sum.
inline std::uint64_t rs_term_count(double t) {
  return static_cast<std::uint64_t>(std::floor(std::sqrt(t / (2.0 * M_PI))));
}

/// Remainder approximation (-1)^(N-1) (t/2pi)^(-1/4) [C0 + C1 (t/2pi)^(-1/2)].
inline double rs_correction(double t, std::uint64_t n_terms) {
  const double a = std::sqrt(t / (2.0 * M_PI));
  const double p = a - static_cast<double>(n_terms);
  const double z = 2.0 * p - 1.0;
  const double sign = (n_terms % 2 == 1) ? 1.0 : -1.0;
  return sign / std::sqrt(a) * (rs_c0(z) + rs_c1(z) / a);
}

inline double rs_error_budget(double t, correction_level level) {
  return level == correction_level::first ? rs_budget_constant_first * std::pow(t, -0.75)
                                          : rs_budget_constant_none * std::pow(t, -0.25);
}

inline void require_main_sum_domain(double t) {
  if (!(t >= min_main_sum_height)) {
    throw error(error_kind::domain, "hardy_z_main_sum: requires t >= 50; use the oracle below", {{"t", t}});
  }
  if (t > max_height) {
    throw error(error_kind::precision, "phase reduction of t*log(n) exhausts double-double precision",
                {{"t", t}, {"max_height", max_height}});
  }
}

inline z_evaluation hardy_z_main_sum(double t, correction_level level = correction_level::first) {
  require_main_sum_domain(t);
  const std::uint64_t n_terms = rs_term_count(t);
  const double th = theta_reduced(t);
  double sum = 0.0;
  double comp = 0.0;
  double abs_sum = 0.0;
  for (std::uint64_t n = 1; n <= n_terms; ++n) {
    const double phase = dd::reduce_two_pi(log_dd(n) * t);
    const double w = 1.0 / std::sqrt(static_cast<double>(n));
    const double term = w * std::cos(th - phase);
    const double y = term - comp;
    const double s = sum + y;
    comp = (s - sum) - y;
    sum = s;
    abs_sum += w;
  }
  double z = 2.0 * sum;
  if (level == correction_level::first) z += rs_correction(t, n_terms);
  const double roundoff = 16.0 * detail::eps * (abs_sum + 1.0);
  return {t, z, method::riemann_siegel, rs_error_budget(t, level) + roundoff};
}

struct zeta_value {
  complex value;
  double error_bound = 0.0;
  std::uint64_t terms = 0;
  int correction_terms = 0;
};

/// zeta(s) by Euler-Maclaurin summation with `terms` direct terms and a
/// computed bound on the Bernoulli tail plus accumulated rounding.
inline zeta_value zeta_euler_maclaurin(complex s, std::uint64_t terms,
                                       summation_order order = summation_order::ascending) {
  if (s == complex(1.0, 0.0)) throw error(error_kind::pole, "zeta: pole at s = 1");
  if (!(s.real() > -1.0)) throw error(error_kind::domain, "zeta_euler_maclaurin: requires Re(s) > -1", {{"re", s.real()}});
  if (terms < 10) throw error(error_kind::domain, "zeta_euler_maclaurin: requires terms >= 10", {{"terms", terms}});
  const double sigma = s.real();
  const double tau = s.imag();
  const std::uint64_t big_n = terms;

  auto power = [&](std::uint64_t n) {
    const dd::dd_real ln = log_dd(n);
    const double mag = std::exp(-sigma * ln.hi);
    const double phase = dd::reduce_two_pi(ln * tau);
    return std::polar(mag, -phase);
  };

  complex head{0.0, 0.0};
  complex comp{0.0, 0.0};
  double abs_head = 0.0;
  auto accumulate = [&](std::uint64_t n) {
    const complex term = power(n);
    const complex y = term - comp;
    const complex sum = head + y;
    comp = (sum - head) - y;
    head = sum;
    abs_head += std::abs(term);
  };
  if (order == summation_order::ascending) {
    for (std::uint64_t n = 1; n < big_n; ++n) accumulate(n);
  } else {
    for (std::uint64_t n = big_n - 1; n >= 1; --n) accumulate(n);
  }

  const double nd = static_cast<double>(big_n);
  const complex n_pow = power(big_n);  // N^-s
  complex tail = n_pow * nd / (s - 1.0) + 0.5 * n_pow;

  // sum_k B_2k/(2k)! s(s+1)...(s+2k-2) N^(-s-2k+1)
  complex poch = s;             // (s)_(2k-1)
  complex npow = n_pow / nd;    // N^(-s-2k+1)
  double fact = 2.0;            // (2k)!
  int k = 1;
  double bound = 0.0;
  constexpr int max_k = 14;
  for (;; ++k) {
    const complex term = detail::bernoulli_even[static_cast<std::size_t>(k)] / fact * poch * npow;
    tail += term;
    // next-term bound: |B_(2k+2)/(2k+2)! (s)_(2k+1) N^(-s-2k-1)| * |s+2k+1|/(sigma+2k+1)
    const complex poch_next = poch * (s + (2.0 * k - 1.0)) * (s + 2.0 * k);
    const double fact_next = fact * (2.0 * k + 1.0) * (2.0 * k + 2.0);
    const double next = std::abs(detail::bernoulli_even[static_cast<std::size_t>(k + 1)]) / fact_next *
                        std::abs(poch_next) * std::abs(npow) / (nd * nd);
    bound = next * std::abs(s + (2.0 * k + 1.0)) / (sigma + 2.0 * k + 1.0);
    if (bound < 1e-18 * std::max(1.0, std::abs(head)) || k + 1 >= max_k) break;
    poch = poch_next;
    npow /= nd * nd;
    fact = fact_next;
  }
  const double roundoff = 8.0 * detail::eps * (abs_head + std::abs(tail) + 1.0);
  return {head + tail, bound + roundoff, big_n, k};
}

/// Oracle term count max(50, ceil(2|t|)).
inline std::uint64_t oracle_terms(double t) {
  return std::max<std::uint64_t>(50, static_cast<std::uint64_t>(std::ceil(2.0 * std::abs(t))));
}

/// Approximate functional-equation-free cross check:
/// zeta(1/2+it) ~ sum_{n<=x} n^(-s) - x^(1-s)/(1-s), error O(x^-1/2) for |t| <= x.
inline complex zeta_dirichlet_approx(double t, double x) {
  const complex s(0.5, t);
  const auto nx = static_cast<std::uint64_t>(std::floor(x));
  complex sum{0.0, 0.0};
  for (std::uint64_t n = 1; n <= nx; ++n) {
    const dd::dd_real ln = log_dd(n);
    sum += std::polar(1.0 / std::sqrt(static_cast<double>(n)), -dd::reduce_two_pi(ln * t));
  }
  const complex x_pow = std::exp((1.0 - s) * std::log(x));
  return sum - x_pow / (1.0 - s);
}

/// chi(s) = Gamma((1-s)/2) / Gamma(s/2) * pi^(s-1/2).
inline complex chi_factor(complex s) {
  auto nonpositive_integer = [](complex w) {
    return w.imag() == 0.0 && w.real() <= 0.0 && w.real() == std::floor(w.real());
  };
  if (nonpositive_integer(0.5 * s) || nonpositive_integer(0.5 * (1.0 - s))) {
    throw error(error_kind::pole, "chi_factor: Gamma quotient is singular", {{"re", s.real()}, {"im", s.imag()}});
  }
  static const double log_pi = std::log(M_PI);
  return std::exp(log_gamma(0.5 * (1.0 - s)) - log_gamma(0.5 * s) + (s - 0.5) * log_pi);
}

struct oracle_detail {
  z_evaluation eval;
  complex zeta;
  double imag_residue = 0.0;
  double theta = 0.0;
};

/// Z(t) = exp(i theta(t)) zeta(1/2+it) with theta from log-Gamma. Throws
/// BranchError if the imaginary residue exceeds the error budget.
inline oracle_detail hardy_z_oracle_detail(double t) {
  if (!(t >= 0.0)) throw error(error_kind::domain, "hardy_z_oracle: requires t >= 0", {{"t", t}});
  if (t > 1e7) throw error(error_kind::budget_exceeded, "hardy_z_oracle: t too large for direct summation", {{"t", t}});
  const zeta_value zv = zeta_euler_maclaurin(complex(0.5, t), oracle_terms(t));
  const double th = theta_loggamma(t);
  const double th_err = 16.0 * detail::eps * (std::abs(th) + 0.5 * t * std::log(t + 2.0) + 1.0);
  const complex z = std::polar(1.0, th) * zv.value;
  const double budget = zv.error_bound + th_err * std::abs(zv.value) + 4.0 * detail::eps * std::abs(zv.value);
  if (std::abs(z.imag()) > std::max(budget, 1e-9)) {
    throw error(error_kind::branch, "hardy_z_oracle: non-real result, phase tracking failed",
                {{"t", t}, {"imag", z.imag()}, {"budget", budget}});
  }
  return {{t, z.real(), method::oracle, budget}, zv.value, z.imag(), th};
}

inline z_evaluation hardy_z_oracle(double t) { return hardy_z_oracle_detail(t).eval; }

/// Main sum above the cutoff, oracle below it.
inline z_evaluation hardy_z(double t, correction_level level = correction_level::first) {
  return t >= min_main_sum_height ? hardy_z_main_sum(t, level) : hardy_z_oracle(t);
}

inline double z_plus(double z) noexcept { return z > 0.0 ? z : 0.0; }
inline double z_minus(double z) noexcept { return z < 0.0 ? -z : 0.0; }
inline double z_plus(const z_evaluation& e) noexcept { return z_plus(e.z); }
inline double z_minus(const z_evaluation& e) noexcept { return z_minus(e.z); }

}  // namespace hardyz
