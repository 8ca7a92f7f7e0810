#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "hardyz/double_double.hpp"
#include "hardyz/special.hpp"

using namespace hardyz;

// Reference values computed with mpmath at 50 digits.

TEST_CASE("log in double-double matches 50-digit reference", "[dd]") {
  const dd::dd_real l3 = dd::log(dd::dd_real(3.0));
  CHECK(l3.hi == 1.0986122886681098);
  CHECK(std::abs(l3.lo - (-9.07129723500153e-17)) < 1e-31);

  const dd::dd_real big = log_dd(100003);
  CHECK(big.hi == 11.512955464520237);
  CHECK(std::abs(big.lo - 2.0559987195603626e-16) < 1e-30);
}

TEST_CASE("exp in double-double", "[dd]") {
  const dd::dd_real e = dd::exp(dd::dd_real(3.7));
  CHECK(e.hi == 40.4473043600674);
  CHECK(std::abs(e.lo - (-1.2179541332469429e-15)) < 1e-29);
}

TEST_CASE("exp and log are inverse to ~1e-30", "[dd]") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  for (int i = 0; i < 200; ++i) {
    const dd::dd_real x(u(rng));
    const dd::dd_real back = dd::log(dd::exp(x));
    const dd::dd_real diff = back - x;
    CHECK(std::abs(diff.hi) < 1e-30 * std::max(1.0, std::abs(x.hi)));
  }
}

TEST_CASE("phase reduction of t*log(n) modulo 2pi at large heights", "[dd]") {
  CHECK(std::abs(dd::reduce_two_pi(log_dd(7) * 1e8) - (-0.606427938589391)) < 1e-14);
  CHECK(std::abs(dd::reduce_two_pi(log_dd(1234) * 12345678.9) - (-0.33822347412395276)) < 1e-14);
  CHECK(std::abs(dd::reduce_two_pi(log_dd(3999) * 99999999.5) - (-1.1550988089309038)) < 1e-14);
}

TEST_CASE("from_uint is exact above 2^53", "[dd]") {
  const std::uint64_t n = (std::uint64_t{1} << 60) + 12345;
  const dd::dd_real x = dd::from_uint(n);
  const auto hi = static_cast<std::uint64_t>(x.hi);
  CHECK(static_cast<std::int64_t>(n - hi) == static_cast<std::int64_t>(x.lo));
}
