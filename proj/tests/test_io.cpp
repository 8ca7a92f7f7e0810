#include <catch2/catch_amalgamated.hpp>

#include <cstring>
#include <fstream>
#include <random>

#include "hardyz/io.hpp"
#include "hardyz/reference/resonator_bruteforce.hpp"

using namespace hardyz;
namespace ref = hardyz::reference;

namespace {

const std::string golden_path = std::string(HARDYZ_TEST_DATA_DIR) + "/resonator_toy_golden.json";

// Same parameters as data/resonate_toy_config.json
resonator_params toy_params() {
  resonator_params p;
  p.T = 1e4;
  p.N = 56;
  p.mode = resonator_mode::explicit_window;
  p.explicit_prime_window = std::make_pair(10.0, 20.0);
  p.truncation_mass = 1.0;
  return p;
}

// The golden document is assembled from the exhaustive construction only.
std::string golden_from_reference() {
  const resonator_params p = toy_params();
  ref::toy_config c;
  c.primes = ref::primes_between(10.0, 20.0);
  c.N = 56;
  c.T = 1e4;
  const ref::toy_result r = ref::build(c);
  resonator_poly poly;
  poly.params = p;
  poly.m = r.m;
  poly.r = r.r;
  poly.mass_L = r.L;
  poly.captured_mass = r.L;
  poly.total_mass_bound = r.total_mass_bound;
  poly.support_size = r.support.size();
  return io::dump(io::to_json(poly));
}

}  // namespace

TEST_CASE("golden resonator document", "[io]") {
  const std::string golden = io::read_file(golden_path);
  CHECK(golden == golden_from_reference());
  CHECK(io::dump(io::to_json(build_resonator(toy_params()))) == golden);
}

TEST_CASE("regenerate golden resonator document", "[.generate]") {
  io::write_file(golden_path, golden_from_reference());
}

TEST_CASE("resonator documents round-trip byte for byte", "[io]") {
  resonator_params asym;
  asym.T = 1e7;
  for (const resonator_params& p : {toy_params(), asym}) {
    const std::string first = io::dump(io::to_json(build_resonator(p)));
    const resonator_poly back = io::poly_from_json(io::parse(first, "memory"));
    CHECK(io::dump(io::to_json(back)) == first);
  }
}

TEST_CASE("numbers are shortest round-trip decimals", "[io]") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::uint64_t> bits;
  for (int i = 0; i < 20000; ++i) {
    double v;
    const std::uint64_t b = bits(rng);
    std::memcpy(&v, &b, sizeof v);
    if (!std::isfinite(v)) continue;
    const std::string s = io::number(v);
    REQUIRE(std::strtod(s.c_str(), nullptr) == v);
    const io::json j = v;
    REQUIRE(io::json::parse(j.dump()).get<double>() == v);
  }
  CHECK(io::number(0.1) == "0.1");
  CHECK(io::number(1e5) == "1e+05");
}

TEST_CASE("malformed resonator documents are rejected", "[io]") {
  const io::json good = io::to_json(build_resonator(toy_params()));
  auto rejects = [](const io::json& j) {
    try {
      io::poly_from_json(j);
    } catch (const error& e) {
      return e.kind() == error_kind::invalid_params;
    }
    return false;
  };
  io::json j = good;
  j["schema"] = "hardyz.resonator/0";
  CHECK(rejects(j));
  j = good;
  j["extra"] = 1;
  CHECK(rejects(j));
  j = good;
  j["m"][2] = j["m"][1];
  CHECK(rejects(j));
  j = good;
  j["r"][0] = -1.0;
  CHECK(rejects(j));
  j = good;
  j["r"].erase(0);
  CHECK(rejects(j));
  j = good;
  j["params"]["gamma"] = 0.5;
  CHECK(rejects(j));
  j = good;
  j["params"]["gamma"] = 1.0 - 3.0 * 0.1;
  CHECK_FALSE(rejects(j));
  CHECK_THROWS_AS(io::parse("{", "memory"), error);
}

TEST_CASE("extremes CSV carries one row per T and blank certified bounds without a ledger", "[io]") {
  growth_row row;
  row.record.T = 1e4;
  row.record.envelope_A = 2.0;
  const std::string csv = io::extremes_csv({row});
  CHECK(csv.rfind("# hardyz.extremes.csv/1\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(csv.find(",,") != std::string::npos);
  CHECK(io::to_json(row.record)["certified_lower_plus"].is_null());
}
