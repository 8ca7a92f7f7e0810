// Acceptance run: one PASS/FAIL line per criterion. Exit status is the
// number of failing criteria. `--criterion N` (repeatable) selects a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cli_runner.hpp"
#include "hardyz/integrals.hpp"
#include "hardyz/io.hpp"
#include "hardyz/quadrature.hpp"
#include "hardyz/resonator.hpp"
#include "hardyz/search.hpp"
#include "hardyz/verify.hpp"
#include "hardyz/zeta_core.hpp"

using namespace hardyz;

namespace {

struct outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- shared grids and runs ----

const std::vector<double>& oracle_grid() {
  static const std::vector<double> grid = [] {
    std::mt19937_64 rng(1000);
    std::uniform_real_distribution<double> u(100.0, 5000.0);
    std::vector<double> v(1000);
    for (double& t : v) t = u(rng);
    return v;
  }();
  return grid;
}

const std::vector<double> ledger_heights = {1e4, 1e5, 1e6, 1e7};

// Fixed explicit window for the ledger protocol: the asymptotic window is
// empty below T = 1e6, so a T-independent resonator is used throughout.
resonator_params ledger_resonator(double T) {
  resonator_params p;
  p.T = T;
  p.N = 56;
  p.epsilon = 0.1;
  p.mode = resonator_mode::explicit_window;
  p.explicit_prime_window = std::make_pair(10.0, 20.0);
  p.truncation_mass = 1.0;
  return p;
}

struct ledger_run {
  resonator_poly poly;
  lemma_ratio_report ratios;
  moment_ledger_result ledger;
  double seconds = 0.0;
};

const std::map<double, ledger_run>& ledger_runs() {
  static const std::map<double, ledger_run> runs = [] {
    std::map<double, ledger_run> m;
    for (double T : ledger_heights) {
      const auto t0 = std::chrono::steady_clock::now();
      ledger_run r;
      r.poly = build_resonator(ledger_resonator(T));
      r.ratios = lemma_ratios(r.poly);
      r.ledger = moment_ledger(T, r.poly, {}, 0.1);
      r.seconds = seconds_since(t0);
      std::fprintf(stderr, "  ledger T=%g done in %.1f s\n", T, r.seconds);
      m.emplace(T, std::move(r));
    }
    return m;
  }();
  return runs;
}

const std::map<double, extreme_record>& long_scans() {
  static const std::map<double, extreme_record> scans = [] {
    std::map<double, extreme_record> m;
    for (double T : ledger_heights) {
      const auto t0 = std::chrono::steady_clock::now();
      m.emplace(T, scan_extremes(std::pow(T, 0.75), T));
      std::fprintf(stderr, "  scan T=%g done in %.1f s\n", T, seconds_since(t0));
    }
    return m;
  }();
  return scans;
}

// ---- criteria ----

outcome criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0, worst_over_budget = 0.0;
  bool ok = true;
  for (double t : oracle_grid()) {
    const z_evaluation rs = hardy_z_main_sum(t, correction_level::first);
    const z_evaluation orc = hardy_z_oracle(t);
    const double d = std::abs(rs.z - orc.z);
    worst = std::max(worst, d);
    worst_over_budget = std::max(worst_over_budget, d / (rs.error_budget + orc.error_budget));
    ok = ok && d <= rs.error_budget + orc.error_budget && d <= 1e-3;
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < 60.0;
  return {ok, fmt("oracle equivalence on 1000 t in [100, 5000]: max |diff| %.3e (cap 1e-3), max diff/budget %.3f "
                  "(need <= 1), %.2f s (need < 60 s)",
                  worst, worst_over_budget, secs)};
}

outcome criterion_2() {
  double worst = 0.0;
  for (double t : oracle_grid()) {
    const oracle_detail od = hardy_z_oracle_detail(t);
    worst = std::max(worst, std::abs(std::abs(od.eval.z) - std::abs(od.zeta)));
  }
  return {worst <= 1e-9, fmt("modulus identity: max ||Z| - |zeta(1/2+it)|| %.3e (need <= 1e-9)", worst)};
}

outcome criterion_3() {
  double worst = 0.0;
  for (double t : oracle_grid()) worst = std::max(worst, std::abs(hardy_z_oracle_detail(t).imag_residue));
  return {worst <= 1e-9, fmt("realness: max |Im Z_oracle| %.3e (need <= 1e-9)", worst)};
}

outcome criterion_4() {
  bool ok = true;
  std::string d = "sign change in [T, 2T] to width 1e-6:";
  for (double T : {1e3, 1e4, 1e5}) {
    const sign_change sc = locate_sign_change(T, 1e-6);
    // the bracket's signs are confirmed by the oracle, not the main sum
    const double a = hardy_z_oracle(sc.lo).z;
    const double b = hardy_z_oracle(sc.hi).z;
    const bool here = sc.lo >= T && sc.hi <= 2.0 * T && sc.hi - sc.lo <= 1e-6 && a * b < 0.0;
    ok = ok && here;
    d += fmt(" T=%g [%.9f, %.9f] width %.2e oracle signs %+d/%+d%s;", T, sc.lo, sc.hi, sc.hi - sc.lo, a > 0 ? 1 : -1,
             b > 0 ? 1 : -1, here ? "" : " (bad)");
  }
  return {ok, d};
}

outcome criterion_5() {
  bool ok = true;
  std::vector<double> zr;
  std::string d = "Hardy means:";
  for (double T : {1e3, 1e4, 1e5}) {
    const hardy_means hm = hardy_mean_integrals(T);
    const bool in = hm.zeta_ratio >= 0.9 && hm.zeta_ratio <= 1.1;
    ok = ok && in;
    zr.push_back(std::abs(hm.z_ratio));
    d += fmt(" T=%g Re int zeta/T %.6f%s, |int Z|/T^(3/4) %.6f (int Z = %.4f +- %.2e);", T, hm.zeta_ratio,
             in ? "" : " (outside [0.9, 1.1])", std::abs(hm.z_ratio), hm.z_integral.value,
             hm.z_integral.abs_error_estimate);
  }
  const double spread = *std::max_element(zr.begin(), zr.end()) / *std::min_element(zr.begin(), zr.end());
  ok = ok && spread <= 3.0;
  d += fmt(" max/min of |int Z|/T^(3/4) = %.3f (need <= 3)", spread);
  return {ok, d};
}

outcome criterion_6() {
  const auto t0 = std::chrono::steady_clock::now();
  const verify::suite_report rep = verify::second_derivative(100, 7);
  const double secs = seconds_since(t0);
  return {rep.cases == 100 && rep.ok() && secs < 30.0,
          fmt("second-derivative test: %llu/%llu cases hold at seed 7, max |I|/bound %.4f, %.2f s (need < 30 s)",
              static_cast<unsigned long long>(rep.passed), static_cast<unsigned long long>(rep.cases),
              rep.details["max_value_over_bound"].get<double>(), secs)};
}

outcome criterion_7() {
  std::size_t n = 0, good = 0, max_primes = 0;
  double worst_r = 0.0;
  for (const resonator_params& p : verify::toy_instances()) {
    const auto primes = reference::primes_between(p.explicit_prime_window->first, p.explicit_prime_window->second);
    max_primes = std::max(max_primes, primes.size());
    const verify::brute_comparison c = verify::compare_with_bruteforce(p);
    ++n;
    good += c.ok() ? 1 : 0;
    worst_r = std::max(worst_r, c.max_r_rel_error);
  }
  return {n >= 5 && good == n && max_primes <= 4,
          fmt("brute-force equivalence: %zu/%zu toy instances exact (support, f, L, m), max r relative error %.1e "
              "(need <= 1e-14), at most %zu primes per window",
              good, n, worst_r, max_primes)};
}

struct ratio_series {
  std::string name;
  std::vector<std::pair<double, double>> values;  // (T, ratio)
};

outcome criterion_8() {
  std::vector<ratio_series> series;
  ratio_series binned{"|M'|/N (asymptotic)", {}};
  for (double T : ledger_heights) {
    resonator_params p;
    p.T = T;
    p.epsilon = 0.1;
    try {
      const lemma_ratio_report r = lemma_ratios(build_resonator(p));
      binned.values.emplace_back(T, r.ratio_binned_over_N);
    } catch (const error& e) {
      if (e.kind() != error_kind::empty_window) throw;
    }
  }
  series.push_back(binned);
  ratio_series sr{"sum r/(T^(1/8) log T sqrt L)", {}}, sr2{"sum r^2/((log T)^2 L)", {}};
  ratio_series k{"K_mass/(T (log T)^3 L)", {}}, js{"J_signed/(L T (log T)^2)", {}};
  for (const auto& [T, run] : ledger_runs()) {
    sr.values.emplace_back(T, run.ratios.ratio_sum_r);
    sr2.values.emplace_back(T, run.ratios.ratio_sum_r2);
    k.values.emplace_back(T, run.ledger.ratio_K);
    js.values.emplace_back(T, run.ledger.ratio_signed);
  }
  series.insert(series.end(), {sr, sr2, k, js});

  bool ok = true;
  std::string d = "ratio boundedness over T in {1e4..1e7}, eps = 0.1 (need variation < 10x):";
  for (const ratio_series& s : series) {
    double lo = INFINITY, hi = 0.0;
    bool pos = false, neg = false;
    std::string vals;
    for (const auto& [T, v] : s.values) {
      lo = std::min(lo, std::abs(v));
      hi = std::max(hi, std::abs(v));
      pos = pos || v > 0.0;
      neg = neg || v < 0.0;
      vals += fmt(" %g:%.4g", T, v);
    }
    const double factor = hi / lo;
    const bool here = s.values.size() >= 2 && factor < 10.0 && !(pos && neg);
    ok = ok && here;
    d += fmt(" [%s%s; factor %.3g%s%s]", s.name.c_str(), vals.c_str(), factor, pos && neg ? ", changes sign" : "",
             here ? "" : " FAIL");
  }
  return {ok, d};
}

outcome criterion_9() {
  bool ok = true;
  std::string d = "extraction soundness:";
  for (const auto& [T, run] : ledger_runs()) {
    const extreme_record& rec = long_scans().at(T);
    const bool here = run.ledger.bound_plus <= rec.max_plus && run.ledger.bound_minus <= rec.max_minus;
    ok = ok && here;
    d += fmt(" T=%g lower+ %.4f <= max+ %.4f, lower- %.4f <= max- %.4f%s;", T, run.ledger.bound_plus, rec.max_plus,
             run.ledger.bound_minus, rec.max_minus, here ? "" : " (violated)");
  }
  // Z = sin on [0, 2 pi], K = 1: the integrals go through composite quadrature,
  // split at the kink of |sin|.
  auto integrate = [](auto f) {
    const composite_result a = composite_with_halving(f, 0.0, M_PI, 16, 16);
    const composite_result b = composite_with_halving(f, M_PI, 2.0 * M_PI, 16, 16);
    return std::pair{a.value.real() + b.value.real(), a.error_estimate + b.error_estimate};
  };
  const auto [ja, ea] = integrate([](double x) { return std::abs(std::sin(x)); });
  const auto [js, es] = integrate([](double x) { return std::sin(x); });
  const auto [k, ek] = integrate([](double) { return 1.0; });
  const extreme_bounds b = extract_extreme_bounds({ja, ea, js, es, k, ek});
  const double err = std::max(std::abs(b.lower_plus - 1.0 / M_PI), std::abs(b.lower_minus - 1.0 / M_PI));
  ok = ok && err <= 1e-10;
  d += fmt(" sin/K=1: lower+ %.15f, lower- %.15f vs 1/pi, error %.2e (need <= 1e-10)", b.lower_plus, b.lower_minus, err);
  return {ok, d};
}

outcome criterion_10() {
  bool ok = true;
  std::string d = "scanned maxima on [T^(3/4), T] above (log T)^(1/4), nondecreasing:";
  double prev_p = 0.0, prev_m = 0.0;
  for (const auto& [T, rec] : long_scans()) {
    const double floor = ivic_floor(T);
    const bool above = rec.max_plus > floor && rec.max_minus > floor;
    const bool mono = rec.max_plus >= prev_p && rec.max_minus >= prev_m;
    ok = ok && above && mono;
    d += fmt(" T=%g max+ %.4f max- %.4f floor %.4f%s%s;", T, rec.max_plus, rec.max_minus, floor, above ? "" : " (below)",
             mono ? "" : " (decreased)");
    prev_p = rec.max_plus;
    prev_m = rec.max_minus;
  }
  return {ok, d};
}

outcome criterion_11() {
  namespace fs = std::filesystem;
  const fs::path dir = testing::scratch_dir("acceptance_replay");
  const std::string cfg = std::string(HARDYZ_TEST_DATA_DIR) + "/resonate_toy_config.json";
  const fs::path first = dir / "first";
  std::vector<std::pair<std::string, std::string>> runs = {
      {"eval", "eval --t 100 1000 4000 --method both"},
      {"theta", "theta --t 50 1e3 1e6"},
      {"resonate", "resonate --config " + cfg},
      {"resonate-asym", "resonate --T 1e7"},
      {"ledger", "ledger --T 1e4 --resonator " + (first / "resonate" / "resonator.json").string() + " --panels-csv"},
      {"search", "search --T 1e4 1e5 --with-ledger --mode explicit --window 10 20 --N 56 --truncation-mass 1"},
      {"verify", "verify --suite resonator-brute"},
      {"report", "report " + (first / "ledger" / "ledger.json").string() + " " +
                     (first / "search" / "extremes.json").string()},
  };
  std::size_t files = 0, identical = 0, manifests = 0;
  std::string bad;
  for (const auto& [name, cmd] : runs) {
    const fs::path a = first / name;
    const fs::path b = dir / "replay" / name;
    if (testing::run_cli(cmd + " --out-dir " + a.string()).code != 0) {
      bad += " " + name + " (run failed)";
      continue;
    }
    if (testing::run_cli("--from-manifest " + (a / "manifest.json").string() + " --out-dir " + b.string()).code != 0) {
      bad += " " + name + " (replay failed)";
      continue;
    }
    ++manifests;
    const auto m = io::json::parse(io::read_file((a / "manifest.json").string()));
    for (const auto& o : m["outputs"]) {
      const std::string file = o["path"];
      ++files;
      if (io::read_file((a / file).string()) == io::read_file((b / file).string())) {
        ++identical;
      } else {
        bad += " " + name + "/" + file;
      }
    }
  }
  const bool ok = manifests == runs.size() && files > 0 && identical == files;
  return {ok, fmt("manifest replay: %zu/%zu manifests replayed, %zu/%zu output files byte-identical%s%s", manifests,
                  runs.size(), identical, files, bad.empty() ? "" : "; mismatches:", bad.c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> only;
  app.add_option("--criterion", only, "Run only these criteria (1-11)")->check(CLI::Range(1, 11));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::function<outcome()>> criteria = {criterion_1, criterion_2, criterion_3, criterion_4,
                                                          criterion_5, criterion_6, criterion_7, criterion_8,
                                                          criterion_9, criterion_10, criterion_11};
  const std::set<int> selected(only.begin(), only.end());
  int failures = 0;
  for (int i = 1; i <= 11; ++i) {
    if (!selected.empty() && !selected.count(i)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    outcome o;
    try {
      o = criteria[static_cast<std::size_t>(i - 1)]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("criterion %2d: %s  %s [%.1f s]\n", i, o.pass ? "PASS" : "FAIL", o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  return failures;
}
