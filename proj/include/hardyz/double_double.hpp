#pragma once

// Double-double ("paired-limb") arithmetic: an unevaluated sum hi + lo with
// |lo| <= ulp(hi)/2, giving roughly 106 bits of significand. Used for phase
// reduction of products like t*log(n) modulo 2*pi at large heights.
//
// Requires strict IEEE evaluation; do not compile with -ffast-math.

#include <cmath>
#include <cstdint>

namespace hardyz::dd {

struct dd_real {
  double hi = 0.0;
  double lo = 0.0;

  constexpr dd_real() = default;
  constexpr dd_real(double h) : hi(h), lo(0.0) {}  // NOLINT(google-explicit-constructor)
  constexpr dd_real(double h, double l) : hi(h), lo(l) {}

  constexpr explicit operator double() const { return hi + lo; }
};

inline dd_real quick_two_sum(double a, double b) {
  const double s = a + b;
  return {s, b - (s - a)};
}

inline dd_real two_sum(double a, double b) {
  const double s = a + b;
  const double bb = s - a;
  return {s, (a - (s - bb)) + (b - bb)};
}

inline dd_real two_prod(double a, double b) {
  const double p = a * b;
  return {p, std::fma(a, b, -p)};
}

inline dd_real operator+(const dd_real& a, const dd_real& b) {
  dd_real s = two_sum(a.hi, b.hi);
  dd_real t = two_sum(a.lo, b.lo);
  s.lo += t.hi;
  s = quick_two_sum(s.hi, s.lo);
  s.lo += t.lo;
  return quick_two_sum(s.hi, s.lo);
}

inline dd_real operator-(const dd_real& a) { return {-a.hi, -a.lo}; }
inline dd_real operator-(const dd_real& a, const dd_real& b) { return a + (-b); }

inline dd_real operator*(const dd_real& a, double b) {
  dd_real p = two_prod(a.hi, b);
  p.lo = std::fma(a.lo, b, p.lo);
  return quick_two_sum(p.hi, p.lo);
}

inline dd_real operator*(const dd_real& a, const dd_real& b) {
  dd_real p = two_prod(a.hi, b.hi);
  p.lo += a.hi * b.lo + a.lo * b.hi;
  return quick_two_sum(p.hi, p.lo);
}

inline dd_real operator/(const dd_real& a, const dd_real& b) {
  const double q1 = a.hi / b.hi;
  dd_real r = a - b * q1;
  const double q2 = r.hi / b.hi;
  r = r - b * q2;
  const double q3 = r.hi / b.hi;
  return dd_real(quick_two_sum(q1, q2)) + dd_real(q3);
}

inline dd_real ldexp(const dd_real& a, int e) { return {std::ldexp(a.hi, e), std::ldexp(a.lo, e)}; }

inline dd_real from_uint(std::uint64_t n) {
  const double hi = static_cast<double>(n);
  // the rounding residual of a 64-bit integer is exact in a double
  const auto back = static_cast<std::int64_t>(static_cast<std::uint64_t>(hi) - n);
  return quick_two_sum(hi, -static_cast<double>(back));
}

inline constexpr dd_real two_pi{6.283185307179586, 2.4492935982947064e-16};
inline constexpr dd_real pi{3.141592653589793, 1.2246467991473532e-16};
inline constexpr dd_real pi_over_8{0.39269908169872414, 1.5308084989341915e-17};
inline constexpr dd_real ln2{0.6931471805599453, 2.3190468138462996e-17};

/// exp in double-double: reduce by ln2, scale by 2^-9, Taylor, square back.
inline dd_real exp(const dd_real& x) {
  if (x.hi > 709.0) return {HUGE_VAL, 0.0};
  if (x.hi < -745.0) return {0.0, 0.0};
  const double k = std::nearbyint(x.hi / ln2.hi);
  dd_real r = x - ln2 * k;
  r = ldexp(r, -9);
  // s = exp(r) - 1 via Taylor; |r| < 7e-4 so 10 terms reach ~1e-35.
  dd_real term = r;
  dd_real s = r;
  for (int i = 2; i <= 10; ++i) {
    term = term * r / dd_real(static_cast<double>(i));
    s = s + term;
  }
  for (int i = 0; i < 9; ++i) s = s * 2.0 + s * s;
  return ldexp(s + dd_real(1.0), static_cast<int>(k));
}

/// Natural log in double-double by one Newton step on exp.
inline dd_real log(const dd_real& a) {
  const double y = std::log(a.hi);
  const dd_real ey = exp(dd_real(-y));
  return dd_real(y) + (a * ey - dd_real(1.0));
}

/// Reduce x modulo 2*pi into [-pi, pi] and round to double.
inline double reduce_two_pi(const dd_real& x) {
  const double k = std::nearbyint(x.hi / two_pi.hi);
  const dd_real r = x - two_pi * k;
  return r.hi + r.lo;
}

}  // namespace hardyz::dd
