#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hardyz/integrals.hpp"
#include "hardyz/search.hpp"

using namespace hardyz;

namespace {

resonator_poly small_resonator(double T) {
  resonator_params p;
  p.T = T;
  p.N = 56;
  p.mode = resonator_mode::explicit_window;
  p.explicit_prime_window = std::make_pair(10.0, 20.0);
  p.truncation_mass = 1.0;
  return build_resonator(p);
}

bool is_error(const error& e, error_kind k) { return e.kind() == k; }

}  // namespace

TEST_CASE("unit moment of a single-term resonator matches the erf closed form", "[integrals]") {
  for (double T : {1e3, 1e4, 1e5}) {
    const integral_estimate e = weighted_moment(moment_integrand::unit, unit_resonator(T), T);
    const double ref = unit_moment_closed_form(T);
    CHECK(std::abs(e.value - ref) <= e.abs_error_estimate + 1e-12 * ref);
    CHECK(std::abs(e.value - ref) <= 1e-10 * ref);
    CHECK(e.nodes_used >= 2);
    CHECK(e.lo == Catch::Approx(std::pow(T, 0.75)));
    CHECK(e.hi == T);
  }
}

TEST_CASE("unit moment is positive and below the sup bound", "[integrals]") {
  const double T = 1e4;
  const resonator_poly poly = small_resonator(T);
  const integral_estimate e = weighted_moment(moment_integrand::unit, poly, T);
  const double r0 = poly.sum_r();
  CHECK(e.value > 0.0);
  CHECK(e.value <= r0 * r0 * (T - std::pow(T, 0.75)));
}

TEST_CASE("declared error covers a finer grid", "[integrals]") {
  const double T = 1e4;
  const resonator_poly poly = small_resonator(T);
  quadrature_config base;
  quadrature_config finer = base;
  finer.oversample = 4.0 * base.oversample;
  for (auto g : {moment_integrand::signed_z, moment_integrand::abs_zeta, moment_integrand::unit}) {
    const integral_estimate a = weighted_moment(g, poly, T, base);
    const integral_estimate b = weighted_moment(g, poly, T, finer);
    CHECK(std::abs(a.value - b.value) <= a.abs_error_estimate);
    CHECK(a.quadrature_error <= a.abs_error_estimate);
  }
}

TEST_CASE("Hardy mean integrals", "[integrals]") {
  const hardy_means hm = hardy_mean_integrals(1e3);
  // Euler-Maclaurin oracle with an independent composite Gauss-Legendre rule
  const double oracle = -31.0711950325;
  CHECK(std::abs(hm.z_integral.value - oracle) <= hm.z_integral.abs_error_estimate);
  CHECK(hm.zeta_ratio >= 0.9);
  CHECK(hm.zeta_ratio <= 1.1);
  const hardy_means h4 = hardy_mean_integrals(1e4);
  CHECK(h4.zeta_ratio >= 0.9);
  CHECK(h4.zeta_ratio <= 1.1);
  CHECK_THROWS_AS(hardy_mean_integrals(500.0), error);
}

TEST_CASE("extraction on closed-form integrands", "[integrals]") {
  // Z -> sin on [0, 2 pi], K = 1
  auto abs_sin = [](double x) { return std::complex<double>(std::abs(std::sin(x)), 0.0); };
  auto sin_ = [](double x) { return std::complex<double>(std::sin(x), 0.0); };
  // panel edges on the kink at pi keep the rule exact to rounding
  const double J_abs = composite_with_halving(abs_sin, 0.0, M_PI, 8, 16).value.real() +
                       composite_with_halving(abs_sin, M_PI, 2.0 * M_PI, 8, 16).value.real();
  const double J_signed = composite_with_halving(sin_, 0.0, 2.0 * M_PI, 16, 16).value.real();
  CHECK(J_abs == Catch::Approx(4.0).epsilon(1e-13));
  const extreme_bounds b = extract_extreme_bounds({J_abs, 0.0, J_signed, 0.0, 2.0 * M_PI, 0.0});
  CHECK(std::abs(b.lower_minus - 1.0 / M_PI) < 1e-10);
  CHECK(std::abs(b.lower_plus - 1.0 / M_PI) < 1e-10);

  const extreme_bounds exact = extract_extreme_bounds({4.0, 0.0, 0.0, 0.0, 2.0 * M_PI, 0.0});
  CHECK(exact.lower_minus == Catch::Approx(1.0 / M_PI).epsilon(1e-15));

  const extreme_bounds nonneg = extract_extreme_bounds({3.0, 0.0, 3.0, 0.0, 1.0, 0.0});
  CHECK(nonneg.lower_minus == 0.0);
  CHECK(nonneg.lower_plus == 3.0);

  // errors make the bounds smaller
  const extreme_bounds noisy = extract_extreme_bounds({4.0, 0.01, 0.0, 0.01, 2.0 * M_PI, 0.001});
  CHECK(noisy.lower_minus < exact.lower_minus);
  CHECK(noisy.propagated_minus > 0.0);

  CHECK_THROWS_MATCHES(extract_extreme_bounds({1.0, 0.0, 2.0, 0.0, 1.0, 0.0}), error,
                       Catch::Matchers::Predicate<const error&>(
                           [](const error& e) { return is_error(e, error_kind::inconsistent_inputs); }));
  CHECK_THROWS_AS(extract_extreme_bounds({1.0, 0.0, 0.0, 0.0, 0.0, 0.0}), error);
}

TEST_CASE("moment ledger invariants at T = 1e4", "[integrals]") {
  const double T = 1e4;
  const resonator_poly poly = small_resonator(T);
  const moment_ledger_result L = moment_ledger(T, poly);
  const double r0 = poly.sum_r();
  CHECK(L.K_mass.value > 0.0);
  CHECK(L.K_mass.value <= r0 * r0 * (T - std::pow(T, 0.75)));
  CHECK(std::abs(L.J_signed.value) <= L.J1.value + L.J1.abs_error_estimate + L.J_signed.abs_error_estimate);
  // bound_plus - bound_minus = J_signed / K_mass up to the propagated errors
  const extreme_bounds b = extract_extreme_bounds({L.J1.value, L.J1.abs_error_estimate, L.J_signed.value,
                                                   L.J_signed.abs_error_estimate, L.K_mass.value,
                                                   L.K_mass.abs_error_estimate});
  CHECK(std::abs((L.bound_plus - L.bound_minus) - L.J_signed.value / L.K_mass.value) <=
        b.propagated_plus + b.propagated_minus + 1e-12);
  CHECK(L.envelope_A == Catch::Approx(envelope_A(T, 0.1)));
  CHECK(L.ratio_K == Catch::Approx(L.K_mass.value / (T * std::pow(std::log(T), 3) * poly.mass_L)));

  const extreme_record rec = scan_extremes(std::pow(T, 0.75), T);
  CHECK(L.bound_plus <= rec.max_plus);
  CHECK(L.bound_minus <= rec.max_minus);
}

TEST_CASE("results do not depend on the worker count", "[integrals]") {
  const double T = 1e4;
  const resonator_poly poly = small_resonator(T);
  quadrature_config one;
  one.workers = 1;
  quadrature_config three;
  three.workers = 3;
  const moment_ledger_result a = moment_ledger(T, poly, one);
  const moment_ledger_result b = moment_ledger(T, poly, three);
  CHECK(a.J1.value == b.J1.value);
  CHECK(a.J_signed.value == b.J_signed.value);
  CHECK(a.K_mass.value == b.K_mass.value);
  CHECK(a.J1.abs_error_estimate == b.J1.abs_error_estimate);
}

TEST_CASE("node budget and Gaussian tail", "[integrals]") {
  const double T = 1e4;
  const resonator_poly poly = small_resonator(T);
  quadrature_config tiny;
  tiny.node_budget = 1000;
  CHECK_THROWS_MATCHES(weighted_moment(moment_integrand::unit, poly, T, tiny), error,
                       Catch::Matchers::Predicate<const error&>(
                           [](const error& e) { return is_error(e, error_kind::node_budget_exceeded); }));

  quadrature_config cut;
  cut.phi_floor = 1e-20;  // cutoff at u = 6.8 < log T
  const integral_estimate full = weighted_moment(moment_integrand::unit, poly, T);
  const integral_estimate clipped = weighted_moment(moment_integrand::unit, poly, T, cut);
  CHECK(clipped.tail_bound > 0.0);
  CHECK(full.tail_bound == 0.0);
  CHECK(std::abs(full.value - clipped.value) <= clipped.abs_error_estimate + full.abs_error_estimate);
  CHECK(clipped.nodes_used < full.nodes_used);
}

TEST_CASE("panel contributions add up", "[integrals]") {
  moment_job job;
  job.lo = 1000.0;
  job.hi = 1200.0;
  job.need_z = true;
  quadrature_config cfg;
  cfg.record_panels = true;
  const moment_result r = integrate_moments(job, cfg);
  REQUIRE(!r.panels.empty());
  compensated_sum<> s;
  for (const auto& p : r.panels) s.add(p.signed_z);
  CHECK(s.value() == Catch::Approx(r.signed_z.value).epsilon(1e-12));
  CHECK(r.panels.front().lo == 1000.0);
  CHECK(r.panels.back().hi == Catch::Approx(1200.0).epsilon(1e-15));
}
