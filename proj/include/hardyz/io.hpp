#pragma once

// JSON and CSV persistence. JSON documents carry a "schema" tag; numbers are
// written as shortest round-trip decimals, so load + dump reproduces a
// document byte for byte.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hardyz/error.hpp"
#include "hardyz/integrals.hpp"
#include "hardyz/resonator.hpp"
#include "hardyz/search.hpp"
#include "hardyz/zeta_core.hpp"

namespace hardyz::io {

using json = nlohmann::ordered_json;

inline constexpr std::string_view resonator_schema = "hardyz.resonator/1";
inline constexpr std::string_view ledger_schema = "hardyz.ledger/1";
inline constexpr std::string_view extremes_schema = "hardyz.extremes/1";
inline constexpr std::string_view config_schema = "hardyz.config/1";
inline constexpr std::string_view manifest_schema = "hardyz.manifest/1";
inline constexpr std::string_view extremes_csv_version = "hardyz.extremes.csv/1";

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error(error_kind::io, "cannot open file", {{"path", path}});
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw error(error_kind::io, "cannot write file", {{"path", path}});
  out << content;
  if (!out) throw error(error_kind::io, "write failed", {{"path", path}});
}

inline json parse(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw error(error_kind::invalid_params, "malformed JSON", {{"source", origin}, {"detail", e.what()}});
  }
}

/// FNV-1a, 64 bit, as 16 hex digits.
inline std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Shortest decimal that reads back as the same double.
inline std::string number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

inline std::string optional_number(const std::optional<double>& v) { return v ? number(*v) : std::string(); }

inline void require_schema(const json& j, std::string_view schema) {
  if (!j.is_object() || !j.contains("schema") || j["schema"] != schema) {
    throw error(error_kind::invalid_params, "unexpected document schema",
                {{"expected", std::string(schema)}, {"found", j.is_object() && j.contains("schema") ? j["schema"].dump() : "none"}});
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  try {
    return j[key].get<T>();
  } catch (const json::exception& e) {
    throw error(error_kind::invalid_params, "bad field type", {{"field", key}, {"detail", e.what()}});
  }
}

inline void reject_unknown(const json& j, std::initializer_list<std::string_view> known, std::string_view where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
      throw error(error_kind::invalid_params, "unknown field", {{"field", it.key()}, {"in", std::string(where)}});
    }
  }
}

// ----- resonator -----

inline json to_json(const resonator_params& p) {
  json j;
  j["T"] = p.T;
  j["N"] = p.N ? json(*p.N) : json(nullptr);
  j["epsilon"] = p.epsilon;
  j["a"] = p.a;
  j["mode"] = std::string(to_string(p.mode));
  j["explicit_prime_window"] =
      p.explicit_prime_window ? json::array({p.explicit_prime_window->first, p.explicit_prime_window->second}) : json(nullptr);
  j["truncation_mass"] = p.truncation_mass;
  j["entry_cap"] = p.entry_cap;
  j["block_threshold"] = p.block_threshold ? json(*p.block_threshold) : json(nullptr);
  j["lower_endpoint"] = std::string(to_string(p.lower_endpoint));
  return j;
}

inline resonator_mode parse_mode(const std::string& s) {
  if (s == "asymptotic") return resonator_mode::asymptotic;
  if (s == "explicit") return resonator_mode::explicit_window;
  throw error(error_kind::invalid_params, "mode must be asymptotic or explicit", {{"mode", s}});
}

inline window_lower_endpoint parse_lower_endpoint(const std::string& s) {
  if (s == "corrected") return window_lower_endpoint::corrected;
  if (s == "as_printed") return window_lower_endpoint::as_printed;
  throw error(error_kind::invalid_params, "lower_endpoint must be corrected or as_printed", {{"lower_endpoint", s}});
}

inline resonator_scheme parse_scheme(const std::string& s) {
  if (s == "bondarenko_seip") return resonator_scheme::bondarenko_seip;
  if (s == "soundararajan") return resonator_scheme::soundararajan;
  throw error(error_kind::invalid_params, "unknown resonator scheme", {{"scheme", s}});
}

/// Fields absent from `j` keep the values already in `p`.
inline void merge_params(const json& j, resonator_params& p) {
  reject_unknown(j,
                 {"T", "N", "epsilon", "gamma", "a", "mode", "explicit_prime_window", "truncation_mass", "entry_cap",
                  "block_threshold", "lower_endpoint"},
                 "resonator params");
  p.T = get_or(j, "T", p.T);
  if (j.contains("N")) p.N = j["N"].is_null() ? std::nullopt : std::optional<std::uint64_t>(j["N"].get<std::uint64_t>());
  p.epsilon = get_or(j, "epsilon", p.epsilon);
  p.a = get_or(j, "a", p.a);
  if (j.contains("mode")) p.mode = parse_mode(j["mode"].get<std::string>());
  if (j.contains("explicit_prime_window")) {
    const json& w = j["explicit_prime_window"];
    if (w.is_null()) {
      p.explicit_prime_window.reset();
    } else {
      if (!w.is_array() || w.size() != 2) throw error(error_kind::invalid_params, "explicit_prime_window must be [lo, hi]");
      p.explicit_prime_window = std::make_pair(w[0].get<double>(), w[1].get<double>());
    }
  }
  p.truncation_mass = get_or(j, "truncation_mass", p.truncation_mass);
  p.entry_cap = get_or(j, "entry_cap", p.entry_cap);
  if (j.contains("block_threshold")) {
    p.block_threshold = j["block_threshold"].is_null() ? std::nullopt : std::optional<double>(j["block_threshold"].get<double>());
  }
  if (j.contains("lower_endpoint")) p.lower_endpoint = parse_lower_endpoint(j["lower_endpoint"].get<std::string>());
  if (j.contains("gamma") && !j["gamma"].is_null() && j["gamma"].get<double>() != p.gamma()) {
    throw error(error_kind::invalid_params, "gamma is derived as 1 - 3 epsilon", {{"gamma", j["gamma"]}, {"expected", p.gamma()}});
  }
}

inline json to_json(const resonator_poly& poly) {
  json j;
  j["schema"] = std::string(resonator_schema);
  j["scheme"] = std::string(to_string(poly.scheme));
  json params = to_json(poly.params);
  j["params"] = params;
  j["m"] = poly.m;
  j["r"] = poly.r;
  j["L"] = poly.mass_L;
  j["captured_mass"] = poly.captured_mass;
  j["total_mass_bound"] = poly.total_mass_bound;
  j["support_size"] = poly.support_size;
  return j;
}

inline resonator_poly poly_from_json(const json& j) {
  require_schema(j, resonator_schema);
  reject_unknown(j, {"schema", "scheme", "params", "m", "r", "L", "captured_mass", "total_mass_bound", "support_size"},
                 "resonator");
  resonator_poly poly;
  try {
    poly.scheme = parse_scheme(j.at("scheme").get<std::string>());
    merge_params(j.at("params"), poly.params);
    poly.m = j.at("m").get<std::vector<std::uint64_t>>();
    poly.r = j.at("r").get<std::vector<double>>();
    poly.mass_L = j.at("L").get<double>();
    poly.captured_mass = j.at("captured_mass").get<double>();
    poly.total_mass_bound = j.at("total_mass_bound").get<double>();
    poly.support_size = j.at("support_size").get<std::size_t>();
  } catch (const json::exception& e) {
    throw error(error_kind::invalid_params, "malformed resonator document", {{"detail", e.what()}});
  }
  if (poly.m.size() != poly.r.size()) throw error(error_kind::invalid_params, "m and r differ in length");
  for (std::size_t i = 0; i < poly.m.size(); ++i) {
    if (i > 0 && poly.m[i] <= poly.m[i - 1]) throw error(error_kind::invalid_params, "m must be strictly increasing");
    if (!(poly.r[i] > 0.0)) throw error(error_kind::invalid_params, "r must be positive");
  }
  return poly;
}

inline json to_json(const lemma_ratio_report& r) {
  json j;
  j["N"] = r.N;
  j["support_size"] = r.support_size;
  j["binned_size"] = r.binned_size;
  j["sum_r"] = r.sum_r;
  j["sum_r2"] = r.sum_r2;
  j["L"] = r.mass_L;
  j["ratio_binned_over_N"] = r.ratio_binned_over_N;
  j["ratio_support_over_N"] = r.ratio_support_over_N;
  j["ratio_sum_r"] = r.ratio_sum_r;
  j["ratio_sum_r2"] = r.ratio_sum_r2;
  j["size_chain_holds"] = r.size_chain_holds;
  return j;
}

// ----- integrals -----

inline json to_json(const integral_estimate& e) {
  json j;
  j["value"] = e.value;
  if (e.imag != 0.0) j["imag"] = e.imag;
  j["abs_error_estimate"] = e.abs_error_estimate;
  j["quadrature_error"] = e.quadrature_error;
  j["evaluation_error"] = e.evaluation_error;
  j["tail_bound"] = e.tail_bound;
  j["nodes_used"] = e.nodes_used;
  j["interval"] = json::array({e.lo, e.hi});
  return j;
}

inline json to_json(const quadrature_config& q) {
  json j;
  j["order"] = q.order;
  j["oversample"] = q.oversample;
  j["block_panels"] = q.block_panels;
  j["node_budget"] = q.node_budget;
  j["phi_floor"] = q.phi_floor;
  j["correction_level"] = q.level == correction_level::first ? "first" : "none";
  return j;
}

inline void merge_quadrature(const json& j, quadrature_config& q) {
  reject_unknown(j, {"order", "oversample", "block_panels", "node_budget", "phi_floor", "correction_level"}, "quadrature");
  q.order = get_or(j, "order", q.order);
  q.oversample = get_or(j, "oversample", q.oversample);
  q.block_panels = get_or(j, "block_panels", q.block_panels);
  q.node_budget = get_or(j, "node_budget", q.node_budget);
  q.phi_floor = get_or(j, "phi_floor", q.phi_floor);
  if (j.contains("correction_level")) {
    const std::string s = j["correction_level"].get<std::string>();
    if (s != "first" && s != "none") throw error(error_kind::invalid_params, "correction_level must be first or none");
    q.level = s == "first" ? correction_level::first : correction_level::none;
  }
}

inline json to_json(const moment_ledger_result& L) {
  json j;
  j["schema"] = std::string(ledger_schema);
  j["T"] = L.T;
  j["epsilon"] = L.epsilon;
  j["L"] = L.mass_L;
  j["R0"] = L.R0;
  j["support_size"] = L.support_size;
  j["J1"] = to_json(L.J1);
  j["J_signed"] = to_json(L.J_signed);
  j["K_mass"] = to_json(L.K_mass);
  j["bound_plus"] = L.bound_plus;
  j["bound_minus"] = L.bound_minus;
  j["envelope_A"] = L.envelope_A;
  j["ratio_J1_over_LTA"] = L.ratio_J1;
  j["ratio_J_signed_over_LTlog2T"] = L.ratio_signed;
  j["ratio_K_over_Tlog3TL"] = L.ratio_K;
  return j;
}

inline json to_json(const hardy_means& h) {
  json j;
  j["T"] = h.T;
  j["z_integral"] = to_json(h.z_integral);
  j["zeta_integral"] = to_json(h.zeta_integral);
  j["z_ratio_over_T34"] = h.z_ratio;
  j["zeta_ratio_over_T"] = h.zeta_ratio;
  return j;
}

inline std::string panels_csv(const std::vector<panel_contribution>& panels) {
  std::string out = "lo,hi,signed_z,abs_z,unit,zeta_re,zeta_im\n";
  for (const auto& p : panels) {
    out += number(p.lo) + "," + number(p.hi) + "," + number(p.signed_z) + "," + number(p.abs_z) + "," +
           number(p.unit) + "," + number(p.zeta_re) + "," + number(p.zeta_im) + "\n";
  }
  return out;
}

// ----- search -----

inline json to_json(const extreme_record& r) {
  json j;
  j["T"] = r.T;
  j["interval"] = json::array({r.lo, r.hi});
  j["grid_step_policy"] = r.grid_step_policy;
  j["max_plus"] = r.max_plus;
  j["argmax_plus"] = r.argmax_plus;
  j["max_minus"] = r.max_minus;
  j["argmax_minus"] = r.argmax_minus;
  j["envelope_A"] = r.envelope_A;
  j["envelope_ivic"] = r.envelope_ivic;
  j["certified_lower_plus"] = r.certified_lower_plus ? json(*r.certified_lower_plus) : json(nullptr);
  j["certified_lower_minus"] = r.certified_lower_minus ? json(*r.certified_lower_minus) : json(nullptr);
  j["grid_points"] = r.grid_points;
  j["sign_changes"] = r.sign_changes;
  j["first_sign_change"] =
      r.first_sign_change ? json::array({r.first_sign_change->first, r.first_sign_change->second}) : json(nullptr);
  j["refined"] = r.refined;
  return j;
}

inline json to_json(const growth_row& row) {
  json j;
  j["record"] = to_json(row.record);
  j["ledger"] = row.ledger ? to_json(*row.ledger) : json(nullptr);
  j["below_ivic_plus"] = row.below_ivic_plus;
  j["below_ivic_minus"] = row.below_ivic_minus;
  j["ratio_plus_over_A"] = row.ratio_plus;
  j["ratio_minus_over_A"] = row.ratio_minus;
  return j;
}

inline json extremes_document(const std::vector<growth_row>& rows) {
  json j;
  j["schema"] = std::string(extremes_schema);
  json arr = json::array();
  for (const auto& r : rows) arr.push_back(to_json(r));
  j["rows"] = arr;
  return j;
}

/// One row per T; the column set is versioned by the leading comment line.
inline std::string extremes_csv(const std::vector<growth_row>& rows) {
  std::string out = "# " + std::string(extremes_csv_version) + "\n";
  out +=
      "T,lo,hi,max_plus,argmax_plus,max_minus,argmax_minus,certified_lower_plus,certified_lower_minus,envelope_A,"
      "envelope_ivic,ratio_plus_over_A,ratio_minus_over_A,below_ivic_plus,below_ivic_minus,sign_changes\n";
  for (const auto& row : rows) {
    const extreme_record& r = row.record;
    out += number(r.T) + "," + number(r.lo) + "," + number(r.hi) + "," + number(r.max_plus) + "," +
           number(r.argmax_plus) + "," + number(r.max_minus) + "," + number(r.argmax_minus) + "," +
           optional_number(r.certified_lower_plus) + "," + optional_number(r.certified_lower_minus) + "," + number(r.envelope_A) + "," +
           number(r.envelope_ivic) + "," + number(row.ratio_plus) + "," + number(row.ratio_minus) + "," +
           (row.below_ivic_plus ? "1" : "0") + "," + (row.below_ivic_minus ? "1" : "0") + "," +
           std::to_string(r.sign_changes) + "\n";
  }
  return out;
}

// ----- zeta core -----

inline json to_json(const z_evaluation& e) {
  json j;
  j["t"] = e.t;
  j["z"] = e.z;
  j["method"] = std::string(to_string(e.how));
  j["error_budget"] = e.error_budget;
  return j;
}

}  // namespace hardyz::io
