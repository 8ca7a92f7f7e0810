#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cmath>
#include <random>

#include "hardyz/block_eval.hpp"

using namespace hardyz;

namespace {

const std::vector<double> gl_like_offsets{0.0198550717512319, 0.1016667612931866, 0.2372337950418355,
                                          0.4082826787521751, 0.5917173212478249, 0.7627662049581645,
                                          0.8983332387068134, 0.9801449282487681};
const std::vector<double> dyadic_offsets{0.0, 0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875};

// Reported node abscissae are rounded; the sums are taken at the unrounded
// points. With dyadic h and offsets the two coincide and `slack` can be 0.
void check_segment(double lo, std::size_t panels, double h, const std::vector<double>& offsets,
                   const resonator_poly* poly, bool exact_nodes) {
  panel_segment seg{lo, h, panels, rs_term_count(lo)};
  REQUIRE(seg.n_terms == rs_term_count(lo + h * panels));
  const std::vector<panel_segment> segs{seg};
  const term_set z_terms = term_set::riemann_siegel(seg.n_terms);
  const term_set r_terms = poly ? term_set::resonator(*poly) : term_set{};
  z_block_state st;
  node_values out;
  evaluate_block_nodes(st, segs, {0, 0, panels}, offsets, z_terms, poly ? &r_terms : nullptr, true,
                       correction_level::first, out);
  const double hi = lo + h * panels;
  const double ulp = exact_nodes ? 0.0 : std::nextafter(hi, 2 * hi) - hi;
  // |Z'| <= 2 sum n^-1/2 (theta' + log n) <= 8 sqrt(N) log t
  const double slack_z = ulp * 8.0 * std::sqrt(double(seg.n_terms)) * std::log(hi);
  double worst = 0.0;
  for (std::size_t i = 0; i < out.t.size(); ++i) {
    const z_evaluation ref = hardy_z_main_sum(out.t[i]);
    CHECK(std::abs(ref.z - out.z[i]) <= 1e-10 + slack_z);
    worst = std::max(worst, std::abs(ref.z - out.z[i]));
    const double th = theta_reduced(out.t[i]);
    CHECK(std::abs(std::remainder(out.theta[i] - th, 2.0 * M_PI)) <= 1e-12 + ulp * std::log(hi));
    if (poly) {
      const double r2 = resonator_abs2(*poly, out.t[i]);
      const double r0 = poly->sum_r();
      const double slack_r = ulp * 2.0 * r0 * r0 * std::log(double(poly->m.back()));
      CHECK(std::abs(r2 - out.abs_r2[i]) <= 1e-12 * r0 * r0 + slack_r);
    }
  }
  if (exact_nodes) CHECK(worst < 1e-11);
}

}  // namespace

TEST_CASE("block nodes match pointwise main sum", "[block]") {
  check_segment(1000.0, 200, 0.0625, dyadic_offsets, nullptr, true);
  check_segment(123456.5, 300, 0.015625, dyadic_offsets, nullptr, true);
  check_segment(1e7 + 0.25, 128, 0.0078125, dyadic_offsets, nullptr, true);
  check_segment(1000.0, 200, 0.05, gl_like_offsets, nullptr, false);
  check_segment(1e7 + 0.25, 128, 0.011, gl_like_offsets, nullptr, false);
}

TEST_CASE("block resonator matches direct evaluation", "[block]") {
  resonator_params p;
  p.T = 1e4;
  p.N = 56;
  p.mode = resonator_mode::explicit_window;
  p.explicit_prime_window = std::make_pair(10.0, 20.0);
  p.truncation_mass = 1.0;
  const resonator_poly poly = build_resonator(p);
  REQUIRE(poly.size() > 1);
  check_segment(1e4, 400, 0.03125, dyadic_offsets, &poly, true);
  check_segment(1e4, 400, 0.03, gl_like_offsets, &poly, false);
}

TEST_CASE("odd offset count uses the generic path", "[block]") {
  const std::vector<double> three{0.0, 0.25, 0.5};
  check_segment(2000.0, 50, 0.0625, three, nullptr, true);
}

TEST_CASE("unit offset path", "[block]") {
  const double lo = 5000.0;
  const double h = 0.07;
  panel_segment seg{lo, h, 100, rs_term_count(lo)};
  const std::vector<panel_segment> segs{seg};
  const term_set z_terms = term_set::riemann_siegel(seg.n_terms);
  const std::vector<double> offs{0.0};
  z_block_state st;
  node_values out;
  evaluate_block_nodes(st, segs, {0, 0, 100}, offs, z_terms, nullptr, true, correction_level::none, out);
  for (std::size_t i = 0; i < out.t.size(); ++i) {
    CHECK(out.t[i] == Catch::Approx(lo + h * i).epsilon(1e-15));
    CHECK(out.z[i] == Catch::Approx(hardy_z_main_sum(out.t[i], correction_level::none).z).margin(1e-10));
  }
}

TEST_CASE("breakpoints follow main sum length", "[block]") {
  const auto cuts = rs_breakpoints(100.0, 2000.0);
  REQUIRE(cuts.front() == 100.0);
  REQUIRE(cuts.back() == 2000.0);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    const double eps_mid = cuts[i] + 1e-9 * cuts[i];
    CHECK(rs_term_count(mid) == rs_term_count(eps_mid));
  }
}

TEST_CASE("parallel split is independent of worker count", "[block]") {
  std::vector<double> a(1000), b(1000);
  parallel_for_blocks<int>(a.size(), 1, [&](int&, std::size_t i) { a[i] = std::sin(double(i)); });
  parallel_for_blocks<int>(b.size(), 4, [&](int&, std::size_t i) { b[i] = std::sin(double(i)); });
  CHECK(a == b);
}

TEST_CASE("block throughput", "[.bench]") {
  const double lo = 1e7;
  const double h = 0.0025;
  panel_segment seg{lo, h, 4096, rs_term_count(lo)};
  const std::vector<panel_segment> segs{seg};
  const term_set z_terms = term_set::riemann_siegel(seg.n_terms);
  z_block_state st;
  node_values out;
  std::size_t nodes = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t b = 0; b < 16; ++b) {
    evaluate_block_nodes(st, segs, {0, b * 256, 256}, gl_like_offsets, z_terms, nullptr, true,
                         correction_level::first, out);
    nodes += out.t.size();
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  WARN("nodes " << nodes << " terms " << seg.n_terms << " seconds " << dt << " ns/term-node "
                << 1e9 * dt / (nodes * double(seg.n_terms)));
}
