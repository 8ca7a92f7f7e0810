// Builds the explicit-window resonator on the primes in (10, 20] and prints
// its coefficients next to the size and mass ratios.

#include <cstdio>

#include "hardyz/resonator.hpp"

int main() {
  hardyz::resonator_params p;
  p.T = 1e4;
  p.N = 56;
  p.mode = hardyz::resonator_mode::explicit_window;
  p.explicit_prime_window = std::make_pair(10.0, 20.0);
  p.truncation_mass = 1.0;

  const hardyz::resonator_poly poly = hardyz::build_resonator(p);
  std::printf("%8s %20s\n", "m", "r");
  for (std::size_t i = 0; i < poly.size(); ++i) {
    std::printf("%8llu %20.15f\n", static_cast<unsigned long long>(poly.m[i]), poly.r[i]);
  }
  const auto ratios = hardyz::lemma_ratios(poly);
  std::printf("\nL = %.15g, |M| = %zu, |M'| = %zu\n", poly.mass_L, ratios.support_size, ratios.binned_size);
  std::printf("sum r / (T^(1/8) log T sqrt(L))  = %.6g\n", ratios.ratio_sum_r);
  std::printf("sum r^2 / ((log T)^2 L)         = %.6g\n", ratios.ratio_sum_r2);
}
