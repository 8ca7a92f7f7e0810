#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hardyz/search.hpp"

using namespace hardyz;

TEST_CASE("scan brackets the first zero", "[search]") {
  const extreme_record rec = scan_extremes(14.0, 15.0);
  REQUIRE(rec.first_sign_change.has_value());
  CHECK(rec.sign_changes == 1);
  const sign_change sc = bisect_sign_change(rec.first_sign_change->first, rec.first_sign_change->second, 1e-9);
  CHECK(sc.hi - sc.lo <= 1e-9);
  CHECK(std::abs(0.5 * (sc.lo + sc.hi) - 14.134725141734693) < 1e-8);
}

TEST_CASE("zero count on [0, 50] through the oracle range", "[search]") {
  const extreme_record rec = scan_extremes(0.0, 50.0);
  CHECK(rec.sign_changes == 10);
}

TEST_CASE("refinement never lowers the maxima", "[search]") {
  scan_config coarse;
  coarse.refine = false;
  const extreme_record a = scan_extremes(1000.0, 1300.0, coarse);
  const extreme_record b = scan_extremes(1000.0, 1300.0);
  CHECK(b.max_plus >= a.max_plus);
  CHECK(b.max_minus >= a.max_minus);
  CHECK(b.argmax_plus >= 1000.0);
  CHECK(b.argmax_plus <= 1300.0);
  CHECK(b.argmax_minus >= 1000.0);
  CHECK(b.argmax_minus <= 1300.0);
  CHECK(z_value(b.argmax_plus) == Catch::Approx(b.max_plus).epsilon(1e-15));
  CHECK(-z_value(b.argmax_minus) == Catch::Approx(b.max_minus).epsilon(1e-15));
}

TEST_CASE("halving the step moves the grid maximum by a Taylor-bounded amount", "[search]") {
  const double lo = 5000.0;
  const double hi = 5400.0;
  scan_config c1;
  c1.refine = false;
  scan_config c2 = c1;
  c2.step_fraction = c1.step_fraction / 2.0;
  const extreme_record a = scan_extremes(lo, hi, c1);
  const extreme_record b = scan_extremes(lo, hi, c2);
  // |Z''| <= 2 sum n^{-1/2} (theta' + log n)^2 <= 2 (2 sqrt N) log^2(t / 2 pi)
  const double n = static_cast<double>(rs_term_count(hi));
  const double z2 = 4.0 * std::sqrt(n) * std::pow(std::log(hi / (2.0 * M_PI)), 2);
  const double h = c1.step_fraction * mean_zero_spacing(lo);
  const double bound = 0.5 * z2 * h * h;
  CHECK(std::abs(a.max_plus - b.max_plus) <= bound);
  CHECK(std::abs(a.max_minus - b.max_minus) <= bound);
  CHECK(b.max_plus >= a.max_plus - bound);
}

TEST_CASE("sign changes in [T, 2T]", "[search]") {
  for (double T : {1e3, 1e4}) {
    const sign_change sc = locate_sign_change(T, 1e-6);
    CHECK(sc.lo >= T);
    CHECK(sc.hi <= 2.0 * T);
    CHECK(sc.hi - sc.lo <= 1e-6);
    CHECK(((sc.z_lo > 0.0) != (sc.z_hi > 0.0) || sc.z_lo == 0.0));
  }
  CHECK_THROWS_AS(bisect_sign_change(14.0, 14.05), error);
}

TEST_CASE("scan is deterministic across worker counts", "[search]") {
  scan_config a;
  a.workers = 1;
  scan_config b;
  b.workers = 4;
  const extreme_record x = scan_extremes(2e4, 2.5e4, a);
  const extreme_record y = scan_extremes(2e4, 2.5e4, b);
  CHECK(x.max_plus == y.max_plus);
  CHECK(x.argmax_plus == y.argmax_plus);
  CHECK(x.max_minus == y.max_minus);
  CHECK(x.sign_changes == y.sign_changes);
  CHECK(x.grid_points == y.grid_points);
}

TEST_CASE("envelopes and growth curve", "[search]") {
  double prev = 0.0;
  for (double T : {1e4, 1e5, 1e6, 1e7, 1e8}) {
    const double A = envelope_A(T, 0.1);
    CHECK(A > prev);
    prev = A;
    CHECK(envelope_A_short(T, 0.1) > 1.0);
  }
  CHECK(ivic_floor(std::exp(16.0)) == Catch::Approx(2.0));
  CHECK_THROWS_AS(envelope_A(10.0, 0.1), error);

  growth_options opt;
  opt.with_ledger = false;
  const std::vector<double> Ts{1e3, 1e4};
  const auto rows = growth_curve(Ts, opt);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK(!r.below_ivic_plus);
    CHECK(!r.below_ivic_minus);
    CHECK(r.record.max_plus > r.record.envelope_ivic);
  }
  const std::vector<double> bad{1e4, 1e3};
  CHECK_THROWS_AS(growth_curve(bad, opt), error);
}

TEST_CASE("located sign changes hold for Z itself, not only the main sum", "[search]") {
  // near 1001.35 the main-sum error exceeds |Z| on any 1e-6 bracket
  for (double T : {1e3, 1e4}) {
    const sign_change sc = locate_sign_change(T, 1e-6);
    const double a = hardy_z_oracle(sc.lo).z;
    const double b = hardy_z_oracle(sc.hi).z;
    CHECK(a * b < 0.0);
  }
}
