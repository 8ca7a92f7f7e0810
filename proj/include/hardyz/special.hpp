#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "hardyz/double_double.hpp"
#include "hardyz/error.hpp"

namespace hardyz {

using complex = std::complex<double>;

namespace detail {

/// B_{2k} for k = 0..15.
inline constexpr std::array<double, 16> bernoulli_even{
    1.0,
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
    8615841276005.0 / 14322.0,
};

inline constexpr std::uint64_t log_table_size = std::uint64_t{1} << 17;

inline const std::vector<dd::dd_real>& log_table() {
  static const std::vector<dd::dd_real> table = [] {
    std::vector<dd::dd_real> v(log_table_size);
    for (std::uint64_t n = 1; n < log_table_size; ++n) v[n] = dd::log(dd::dd_real(static_cast<double>(n)));
    return v;
  }();
  return table;
}

}  // namespace detail

/// log(n) to double-double precision; cached for n < 2^17.
inline dd::dd_real log_dd(std::uint64_t n) {
  if (n < detail::log_table_size) return detail::log_table()[n];
  return dd::log(dd::from_uint(n));
}

/// Principal branch of log Gamma(z) (continuous off the negative real axis),
/// by upward recurrence to |z| >= 16 and the Stirling series.
inline complex log_gamma(complex z) {
  if (z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::floor(z.real())) {
    throw error(error_kind::pole, "log_gamma: pole at nonpositive integer", {{"z", z.real()}});
  }
  complex shift_sum{0.0, 0.0};
  while (std::abs(z) < 16.0) {
    shift_sum += std::log(z);
    z += 1.0;
  }
  const complex inv = 1.0 / z;
  const complex inv2 = inv * inv;
  complex series{0.0, 0.0};
  complex pw = inv;
  for (int k = 1; k <= 10; ++k) {
    series += detail::bernoulli_even[k] / (2.0 * k * (2.0 * k - 1.0)) * pw;
    pw *= inv2;
  }
  static const double half_log_two_pi = 0.5 * std::log(2.0 * M_PI);
  return (z - 0.5) * std::log(z) - z + half_log_two_pi + series - shift_sum;
}

}  // namespace hardyz
