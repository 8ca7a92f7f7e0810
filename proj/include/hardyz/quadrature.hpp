#pragma once

// Gauss-Legendre rules, a generic composite integrator with a grid-halving
// error estimate, and the second derivative test for oscillatory integrals.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "hardyz/error.hpp"

namespace hardyz {

/// Nodes and weights of the n-point rule mapped to [0, 1].
struct gauss_legendre {
  std::vector<double> x;
  std::vector<double> w;

  explicit gauss_legendre(int n) {
    if (n < 1 || n > 64) throw error(error_kind::invalid_params, "Gauss-Legendre order must be in [1, 64]");
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
      double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0;
        double p1 = z;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1.0);
        const double dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-17) break;
      }
      const double wi = 1.0 / ((1.0 - z * z) * dp * dp);  // 2/(..) on [-1,1], halved for [0,1]
      x[i] = 0.5 * (1.0 - z);
      x[n - 1 - i] = 0.5 * (1.0 + z);
      w[i] = w[n - 1 - i] = wi;
    }
  }

  std::size_t size() const { return x.size(); }
};

/// Neumaier compensated sum.
template <class T = double>
struct compensated_sum {
  T sum{};
  T comp{};

  void add(T v) {
    if constexpr (std::is_same_v<T, double>) {
      const double t = sum + v;
      if (std::abs(sum) >= std::abs(v)) {
        comp += (sum - t) + v;
      } else {
        comp += (v - t) + sum;
      }
      sum = t;
    } else {
      sum += v;
    }
  }
  T value() const { return sum + comp; }
};

struct complex_compensated_sum {
  compensated_sum<double> re, im;
  void add(std::complex<double> v) {
    re.add(v.real());
    im.add(v.imag());
  }
  std::complex<double> value() const { return {re.value(), im.value()}; }
};

struct composite_result {
  std::complex<double> value;
  double error_estimate = 0.0;
  std::uint64_t nodes = 0;
  std::size_t panels = 0;
};

/// Integrate f : double -> complex over [a, b] with `panels` equal panels.
template <class F>
std::complex<double> composite_rule(F&& f, double a, double b, std::size_t panels, const gauss_legendre& rule) {
  complex_compensated_sum acc;
  const double h = (b - a) / static_cast<double>(panels);
  for (std::size_t p = 0; p < panels; ++p) {
    const double lo = a + static_cast<double>(p) * h;
    std::complex<double> s{};
    for (std::size_t k = 0; k < rule.size(); ++k) s += rule.w[k] * std::complex<double>(f(lo + rule.x[k] * h));
    acc.add(s * h);
  }
  return acc.value();
}

/// Composite rule on `panels` and 2*panels; the finer value is returned and
/// the difference is the error estimate.
template <class F>
composite_result composite_with_halving(F&& f, double a, double b, std::size_t panels, int order = 8) {
  const gauss_legendre rule(order);
  const std::complex<double> coarse = composite_rule(f, a, b, panels, rule);
  const std::complex<double> fine = composite_rule(f, a, b, 2 * panels, rule);
  return {fine, std::abs(fine - coarse), static_cast<std::uint64_t>(3 * panels * rule.size()), 2 * panels};
}

/// Quadratic phase F(x) = c0 + c1 x + c2 x^2 and amplitude G(x) = g0 exp(g1 x),
/// which is positive and monotonic.
struct quadratic_phase {
  double c0 = 0.0, c1 = 0.0, c2 = 1.0;
  double operator()(double x) const { return c0 + x * (c1 + x * c2); }
  double derivative(double x) const { return c1 + 2.0 * c2 * x; }
  double second(double) const { return 2.0 * c2; }
};

struct exponential_amplitude {
  double g0 = 1.0, g1 = 0.0;
  double operator()(double x) const { return g0 * std::exp(g1 * x); }
};

struct second_derivative_result {
  double bound = 0.0;             // 8 G / sqrt(m)
  double quadrature_value = 0.0;  // |int G e^{iF}|
  double quadrature_error = 0.0;
  double m = 0.0;
  double G = 0.0;
  std::uint64_t nodes = 0;

  bool holds() const { return quadrature_value <= bound + quadrature_error; }
};

/// |int_a^b G e^{iF}| <= 8 G / sqrt(m) with m = inf |F''| and G = sup G, for
/// positive monotonic G. `F2` is F''; `max_slope` bounds |F'| on [a, b] and
/// sets the panel count.
template <class F, class F2, class Amp>
second_derivative_result second_derivative_bound(const F& phase, const F2& phase_second, const Amp& amp, double a,
                                                 double b, double max_slope, int samples = 1025) {
  if (!(b > a)) throw error(error_kind::invalid_params, "second derivative test needs a < b");
  double m = std::numeric_limits<double>::infinity();
  double sign = 0.0;
  double g_prev = amp(a);
  int g_dir = 0;
  for (int i = 0; i < samples; ++i) {
    const double x = a + (b - a) * i / (samples - 1);
    const double f2 = phase_second(x);
    if (f2 == 0.0 || (sign != 0.0 && (f2 > 0.0) != (sign > 0.0))) {
      throw error(error_kind::degenerate_curvature, "F'' vanishes or changes sign", {{"x", x}, {"F2", f2}});
    }
    sign = f2;
    m = std::min(m, std::abs(f2));
    const double g = amp(x);
    if (!(g > 0.0)) throw error(error_kind::invalid_params, "G must be positive", {{"x", x}});
    if (i > 0 && g != g_prev) {
      const int dir = g > g_prev ? 1 : -1;
      if (g_dir != 0 && dir != g_dir) throw error(error_kind::invalid_params, "G must be monotonic", {{"x", x}});
      g_dir = dir;
    }
    g_prev = g;
  }
  if (!(m > 0.0)) throw error(error_kind::degenerate_curvature, "inf |F''| is not positive", {{"m", m}});

  second_derivative_result out;
  out.m = m;
  out.G = std::max(amp(a), amp(b));
  out.bound = 8.0 * out.G / std::sqrt(m);
  // Four GL-16 panels per radian of phase keeps the rule far into its
  // convergent regime; halving then gives a reliable error estimate.
  const double radians = std::max(1.0, max_slope * (b - a));
  const std::size_t panels = static_cast<std::size_t>(std::ceil(radians / 4.0)) + 4;
  auto integrand = [&](double x) { return amp(x) * std::polar(1.0, std::remainder(phase(x), 2.0 * M_PI)); };
  const composite_result q = composite_with_halving(integrand, a, b, panels, 16);
  out.quadrature_value = std::abs(q.value);
  out.quadrature_error = q.error_estimate + 1e-14 * out.G * (b - a);
  out.nodes = q.nodes;
  return out;
}

inline second_derivative_result second_derivative_bound(const quadratic_phase& F, const exponential_amplitude& G,
                                                        double a, double b) {
  const double slope = std::max(std::abs(F.derivative(a)), std::abs(F.derivative(b)));
  return second_derivative_bound(F, [&](double x) { return F.second(x); }, G, a, b, slope);
}

struct second_derivative_case {
  quadratic_phase F;
  exponential_amplitude G;
  double a = 0.0;
  double b = 1.0;
};

/// Random quadratic-phase, monotone-amplitude instance. Curvature spans
/// several decades so both sides of the stationary-phase regime are hit.
inline second_derivative_case random_second_derivative_case(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  second_derivative_case c;
  const double c2 = std::pow(10.0, -1.0 + 3.0 * u(rng));
  c.F.c2 = u(rng) < 0.5 ? -c2 : c2;
  c.F.c1 = -40.0 + 80.0 * u(rng);
  c.F.c0 = 2.0 * M_PI * u(rng);
  c.G.g0 = 0.1 + 2.9 * u(rng);
  c.G.g1 = -2.0 + 4.0 * u(rng);
  c.a = -5.0 + 10.0 * u(rng);
  c.b = c.a + 0.2 + 9.8 * u(rng);
  return c;
}

}  // namespace hardyz
