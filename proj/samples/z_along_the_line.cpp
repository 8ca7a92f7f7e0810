// Prints Z(t) from the main sum and from the oracle near the first zeros,
// then the first few sign changes located by bisection.

#include <cstdio>

#include "hardyz/search.hpp"
#include "hardyz/zeta_core.hpp"

int main() {
  std::printf("%10s %22s %22s %12s\n", "t", "main sum", "oracle", "budget");
  for (double t : {50.0, 100.0, 1000.0, 5000.0}) {
    const auto rs = hardyz::hardy_z_main_sum(t);
    const auto orc = hardyz::hardy_z_oracle(t);
    std::printf("%10.1f %22.15f %22.15f %12.3e\n", t, rs.z, orc.z, rs.error_budget + orc.error_budget);
  }

  const auto rec = hardyz::scan_extremes(10.0, 50.0);
  std::printf("\nsign changes in [10, 50]: %llu\n", static_cast<unsigned long long>(rec.sign_changes));
  const auto first = hardyz::bisect_sign_change(14.0, 15.0, 1e-12, hardyz::correction_level::first);
  std::printf("first zero bracket: [%.13f, %.13f]\n", first.lo, first.hi);
}
