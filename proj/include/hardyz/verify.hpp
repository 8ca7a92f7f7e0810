#pragma once

// Verification suites run by `hardyz verify`. Each suite compares the
// library against an independent route and reports per-case outcomes.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "hardyz/integrals.hpp"
#include "hardyz/quadrature.hpp"
#include "hardyz/reference/resonator_bruteforce.hpp"
#include "hardyz/resonator.hpp"
#include "hardyz/search.hpp"
#include "hardyz/zeta_core.hpp"

namespace hardyz::verify {

using json = nlohmann::ordered_json;

struct suite_report {
  std::string suite;
  std::uint64_t cases = 0;
  std::uint64_t passed = 0;
  json details = json::object();
  std::vector<std::string> failures;

  bool ok() const { return cases > 0 && passed == cases; }
  void record(bool pass, const std::string& what) {
    ++cases;
    if (pass) {
      ++passed;
    } else if (failures.size() < 20) {
      failures.push_back(what);
    }
  }
  json to_json() const {
    json j;
    j["suite"] = suite;
    j["cases"] = cases;
    j["passed"] = passed;
    j["ok"] = ok();
    j["details"] = details;
    j["failures"] = failures;
    return j;
  }
};

inline suite_report second_derivative(std::uint64_t cases, std::uint64_t seed) {
  suite_report rep{"second-derivative"};
  std::mt19937_64 rng(seed);
  double worst_ratio = 0.0;
  for (std::uint64_t i = 0; i < cases; ++i) {
    const second_derivative_case c = random_second_derivative_case(rng);
    const second_derivative_result r = second_derivative_bound(c.F, c.G, c.a, c.b);
    worst_ratio = std::max(worst_ratio, r.quadrature_value / r.bound);
    rep.record(r.holds(), "case " + std::to_string(i) + ": |I| = " + std::to_string(r.quadrature_value) +
                              " > bound " + std::to_string(r.bound));
  }
  rep.details["seed"] = seed;
  rep.details["max_value_over_bound"] = worst_ratio;
  return rep;
}

struct oracle_point {
  double t = 0.0;
  double main_sum = 0.0;
  double oracle = 0.0;
  double budget = 0.0;
  double modulus_gap = 0.0;  // ||Z| - |zeta(1/2+it)||
  double imag_residue = 0.0;
};

inline oracle_point compare_with_oracle(double t) {
  const z_evaluation rs = hardy_z_main_sum(t, correction_level::first);
  const oracle_detail od = hardy_z_oracle_detail(t);
  oracle_point p;
  p.t = t;
  p.main_sum = rs.z;
  p.oracle = od.eval.z;
  p.budget = rs.error_budget + od.eval.error_budget;
  p.modulus_gap = std::abs(std::abs(od.eval.z) - std::abs(od.zeta));
  p.imag_residue = std::abs(od.imag_residue);
  return p;
}

/// Main sum against the Euler-Maclaurin oracle at uniform random heights.
inline suite_report oracle_agreement(std::uint64_t cases, std::uint64_t seed, double lo = 100.0, double hi = 5000.0) {
  suite_report rep{"oracle"};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  double worst_diff = 0.0, worst_mod = 0.0, worst_imag = 0.0;
  for (std::uint64_t i = 0; i < cases; ++i) {
    const oracle_point p = compare_with_oracle(u(rng));
    const double diff = std::abs(p.main_sum - p.oracle);
    worst_diff = std::max(worst_diff, diff);
    worst_mod = std::max(worst_mod, p.modulus_gap);
    worst_imag = std::max(worst_imag, p.imag_residue);
    rep.record(diff <= p.budget && diff <= 1e-3 && p.modulus_gap <= 1e-9 && p.imag_residue <= 1e-9,
               "t = " + std::to_string(p.t) + ": diff " + std::to_string(diff));
  }
  rep.details["seed"] = seed;
  rep.details["max_abs_difference"] = worst_diff;
  rep.details["max_modulus_gap"] = worst_mod;
  rep.details["max_imag_residue"] = worst_imag;
  return rep;
}

/// Outcome of comparing one explicit-window construction with the
/// exhaustive reference.
struct brute_comparison {
  bool primes_equal = false;
  bool support_equal = false;
  bool mass_equal = false;
  bool m_equal = false;
  double max_r_rel_error = 0.0;
  bool ok() const { return primes_equal && support_equal && mass_equal && m_equal && max_r_rel_error <= 1e-14; }
};

inline brute_comparison compare_with_bruteforce(const resonator_params& params) {
  const resonator_poly poly = build_resonator(params);
  const prime_partition part = build_prime_partition(params);
  const weighted_support sup = enumerate_support(part, params);
  reference::toy_config c;
  c.primes = reference::primes_between(params.explicit_prime_window->first, params.explicit_prime_window->second);
  c.N = params.effective_N();
  c.epsilon = params.epsilon;
  c.a = params.a;
  c.block_threshold = params.block_threshold;
  c.T = params.T;
  c.truncation_mass = params.truncation_mass;
  c.as_printed_lower = params.lower_endpoint == window_lower_endpoint::as_printed;
  const reference::toy_result ref = reference::build(c);

  brute_comparison out;
  out.primes_equal = part.primes == c.primes;
  out.support_equal = sup.entries.size() == ref.support.size();
  for (std::size_t i = 0; out.support_equal && i < ref.support.size(); ++i) {
    out.support_equal = sup.entries[i].n == ref.support[i] && sup.entries[i].fn == ref.support_f[i];
  }
  out.mass_equal = poly.mass_L == ref.L;
  out.m_equal = poly.m == ref.m;
  if (out.m_equal) {
    for (std::size_t j = 0; j < ref.r.size(); ++j) {
      out.max_r_rel_error = std::max(out.max_r_rel_error, std::abs(poly.r[j] - ref.r[j]) / ref.r[j]);
    }
  } else {
    out.max_r_rel_error = INFINITY;
  }
  return out;
}

/// Small explicit-window instances (at most four primes) covering shared
/// bins, overlapping windows, block exclusion and truncation.
inline std::vector<resonator_params> toy_instances() {
  auto make = [](double lo, double hi, std::uint64_t N, double T) {
    resonator_params p;
    p.T = T;
    p.N = N;
    p.mode = resonator_mode::explicit_window;
    p.explicit_prime_window = std::make_pair(lo, hi);
    p.truncation_mass = 1.0;
    return p;
  };
  std::vector<resonator_params> v;
  v.push_back(make(10, 14, 31, 1e6));
  v.push_back(make(10, 14, 31, 1e6));
  v.back().block_threshold = 2.0;
  v.push_back(make(10, 20, 56, 1e4));
  v.push_back(make(10, 20, 56, 1e4));
  v.back().block_threshold = 2.0;
  v.push_back(make(10, 14, 31, 1.05));
  v.push_back(make(4, 8, 31, 3.0));
  v.push_back(make(10, 20, 56, 1e4));
  v.back().truncation_mass = 0.9;
  v.push_back(make(4, 8, 31, 3.0));
  v.back().lower_endpoint = window_lower_endpoint::as_printed;
  return v;
}

inline suite_report resonator_brute() {
  suite_report rep{"resonator-brute"};
  json rows = json::array();
  for (const resonator_params& p : toy_instances()) {
    const brute_comparison c = compare_with_bruteforce(p);
    rows.push_back({{"window", {p.explicit_prime_window->first, p.explicit_prime_window->second}},
                    {"T", p.T},
                    {"ok", c.ok()},
                    {"max_r_rel_error", c.max_r_rel_error}});
    rep.record(c.ok(), "window (" + std::to_string(p.explicit_prime_window->first) + ", " +
                           std::to_string(p.explicit_prime_window->second) + "] T=" + std::to_string(p.T));
  }
  rep.details["instances"] = rows;
  return rep;
}

/// Lemma ratios at asymptotic parameters (where the window is nonempty) and
/// for a fixed explicit window across a T grid. Pass means the structural
/// facts hold: |M'| <= |M|, sum r^2 >= L, and finite positive ratios.
inline suite_report lemma_ratio_suite(const std::vector<double>& Ts) {
  suite_report rep{"lemma-ratios"};
  json rows = json::array();
  for (double T : Ts) {
    resonator_params asym;
    asym.T = T;
    json row = {{"T", T}};
    try {
      const resonator_poly poly = build_resonator(asym);
      const lemma_ratio_report r = lemma_ratios(poly);
      row["asymptotic_ratio_binned_over_N"] = r.ratio_binned_over_N;
      row["asymptotic_size_chain_holds"] = r.size_chain_holds;
      rep.record(r.size_chain_holds, "asymptotic size chain at T=" + std::to_string(T));
    } catch (const error& e) {
      if (e.kind() != error_kind::empty_window) throw;
      row["asymptotic_window"] = "empty";
    }
    resonator_params ex;
    ex.T = T;
    ex.N = 56;
    ex.mode = resonator_mode::explicit_window;
    ex.explicit_prime_window = std::make_pair(10.0, 20.0);
    const resonator_poly poly = build_resonator(ex);
    const lemma_ratio_report r = lemma_ratios(poly);
    row["ratio_sum_r"] = r.ratio_sum_r;
    row["ratio_sum_r2"] = r.ratio_sum_r2;
    rep.record(r.binned_size <= r.support_size && r.sum_r2 >= r.mass_L * (1.0 - 1e-15) &&
                   std::isfinite(r.ratio_sum_r) && r.ratio_sum_r > 0.0,
               "explicit-window ratios at T=" + std::to_string(T));
    rows.push_back(row);
  }
  rep.details["rows"] = rows;
  return rep;
}

inline suite_report hardy_mean(const std::vector<double>& Ts) {
  suite_report rep{"hardy-mean"};
  json rows = json::array();
  for (double T : Ts) {
    const hardy_means hm = hardy_mean_integrals(T);
    const sign_change sc = locate_sign_change(T);
    rows.push_back({{"T", T},
                    {"zeta_ratio", hm.zeta_ratio},
                    {"z_ratio", hm.z_ratio},
                    {"sign_change", {sc.lo, sc.hi}}});
    rep.record(hm.zeta_ratio >= 0.9 && hm.zeta_ratio <= 1.1, "Re int zeta / T outside [0.9, 1.1] at T=" + std::to_string(T));
    rep.record(sc.lo >= T && sc.hi <= 2.0 * T && sc.hi - sc.lo <= 1e-6, "sign change at T=" + std::to_string(T));
  }
  rep.details["rows"] = rows;
  return rep;
}

inline suite_report extraction() {
  suite_report rep{"extraction"};
  const extreme_bounds b = extract_extreme_bounds({4.0, 0.0, 0.0, 0.0, 2.0 * M_PI, 0.0});
  rep.record(std::abs(b.lower_minus - 1.0 / M_PI) <= 1e-10 && std::abs(b.lower_plus - 1.0 / M_PI) <= 1e-10,
             "sin with K = 1 on [0, 2pi] does not give 1/pi");
  const extreme_bounds nonneg = extract_extreme_bounds({2.5, 0.0, 2.5, 0.0, 1.0, 0.0});
  rep.record(nonneg.lower_minus == 0.0, "J_signed = J_abs does not give lower_minus = 0");
  bool threw = false;
  try {
    extract_extreme_bounds({1.0, 0.0, -2.0, 0.0, 1.0, 0.0});
  } catch (const error& e) {
    threw = e.kind() == error_kind::inconsistent_inputs;
  }
  rep.record(threw, "J_abs < |J_signed| not rejected");
  rep.details["sin_lower_minus"] = b.lower_minus;
  return rep;
}

/// The two printed cosine arguments, t log(sqrt(t/2pi)/n) - t/2 - pi/8 and
/// the variant with -t/n, against theta(t) - t log n. Informational: the
/// report carries the size of the disagreement.
inline suite_report phase_convention_suite() {
  suite_report rep{"phase-convention"};
  double worst_half = 0.0;
  double worst_over_n = 0.0;
  for (double t : {100.0, 1000.0, 1e4, 1e5}) {
    const std::uint64_t N = rs_term_count(t);
    for (std::uint64_t n = 1; n <= N; n += std::max<std::uint64_t>(1, N / 7)) {
      const double ref = theta(t) - t * std::log(static_cast<double>(n));
      const double half = printed_phase(n, t, phase_convention::half_t);
      const double over_n = printed_phase(n, t, phase_convention::t_over_n);
      const double d_half = std::abs(half - ref);
      const double d_over = std::abs(std::remainder(over_n - ref, 2.0 * M_PI));
      worst_half = std::max(worst_half, d_half);
      worst_over_n = std::max(worst_over_n, d_over);
      // -t/2 form differs from theta - t log n only by the correction series
      rep.record(d_half <= std::abs(theta_corrections(t)) + theta_truncation_bound(t) + 1e-9 * t,
                 "half_t convention off at t=" + std::to_string(t));
    }
  }
  rep.details["max_disagreement_half_t"] = worst_half;
  rep.details["max_disagreement_t_over_n_mod_2pi"] = worst_over_n;
  return rep;
}

inline std::vector<std::string> suite_names() {
  return {"second-derivative", "oracle", "resonator-brute", "lemma-ratios", "hardy-mean", "extraction", "phase-convention"};
}

inline suite_report run_suite(const std::string& name, std::uint64_t cases, std::uint64_t seed) {
  if (name == "second-derivative") return second_derivative(cases, seed);
  if (name == "oracle") return oracle_agreement(cases, seed);
  if (name == "resonator-brute") return resonator_brute();
  if (name == "lemma-ratios") return lemma_ratio_suite({1e4, 1e5, 1e6, 1e7});
  if (name == "hardy-mean") return hardy_mean({1e3, 1e4});
  if (name == "extraction") return extraction();
  if (name == "phase-convention") return phase_convention_suite();
  throw error(error_kind::invalid_params, "unknown verify suite", {{"suite", name}});
}

}  // namespace hardyz::verify
