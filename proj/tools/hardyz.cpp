// hardyz: batch front end. Each run resolves a full configuration snapshot
// (defaults < config file < environment < flags), executes from that
// snapshot alone, and records it with input/output hashes in a manifest.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hardyz/error.hpp"
#include "hardyz/integrals.hpp"
#include "hardyz/io.hpp"
#include "hardyz/resonator.hpp"
#include "hardyz/search.hpp"
#include "hardyz/verify.hpp"
#include "hardyz/zeta_core.hpp"

#ifndef HARDYZ_VERSION
#define HARDYZ_VERSION "unversioned"
#endif

namespace fs = std::filesystem;
namespace io = hardyz::io;
using io::json;
using hardyz::error;
using hardyz::error_kind;

namespace {

constexpr int exit_verification_failed = 4;

json scan_to_json(const hardyz::scan_config& s) {
  json j;
  j["step_fraction"] = s.step_fraction;
  j["refine"] = s.refine;
  j["candidates"] = s.candidates;
  j["block_points"] = s.block_points;
  j["point_budget"] = s.point_budget;
  return j;
}

void merge_scan(const json& j, hardyz::scan_config& s) {
  io::reject_unknown(j, {"step_fraction", "refine", "candidates", "block_points", "point_budget"}, "scan");
  s.step_fraction = io::get_or(j, "step_fraction", s.step_fraction);
  s.refine = io::get_or(j, "refine", s.refine);
  s.candidates = io::get_or(j, "candidates", s.candidates);
  s.block_points = io::get_or(j, "block_points", s.block_points);
  s.point_budget = io::get_or(j, "point_budget", s.point_budget);
}

json default_args(const std::string& command) {
  if (command == "eval") return {{"t", json::array({100.0})}, {"method", "both"}};
  if (command == "theta") return {{"t", json::array({100.0})}};
  if (command == "resonate") return {{"load", nullptr}};
  if (command == "ledger") return {{"T", 1e5}, {"epsilon", 0.1}, {"resonator_file", nullptr}, {"panels_csv", false}};
  if (command == "search") return {{"T", json::array({1e4})}, {"regime", "long"}, {"with_ledger", false}, {"epsilon", 0.1}};
  if (command == "verify") return {{"suite", "all"}, {"cases", 100}, {"seed", 7}};
  if (command == "report") return {{"inputs", json::array()}};
  throw error(error_kind::invalid_params, "unknown command", {{"command", command}});
}

/// Everything a run depends on. Serialized verbatim into the manifest.
struct settings {
  std::string command;
  unsigned workers = 0;
  hardyz::resonator_params resonator;
  hardyz::resonator_scheme scheme = hardyz::resonator_scheme::bondarenko_seip;
  hardyz::quadrature_config quad;
  hardyz::scan_config scan;
  json args;

  json snapshot() const {
    json j;
    j["schema"] = std::string(io::config_schema);
    j["command"] = command;
    json res = io::to_json(resonator);
    res["scheme"] = std::string(hardyz::to_string(scheme));
    j["resonator"] = res;
    j["quadrature"] = io::to_json(quad);
    j["scan"] = scan_to_json(scan);
    j[command] = args;
    return j;
  }

  /// Merge a hardyz.config/1 document. A config file may carry sections for
  /// several commands; only the active one is kept.
  void merge(const json& doc) {
    io::require_schema(doc, io::config_schema);
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      const std::string& key = it.key();
      const json& v = it.value();
      if (key == "schema" || key == "command") continue;
      if (key == "workers") {
        workers = v.get<unsigned>();
      } else if (key == "resonator") {
        json params = v;
        if (params.contains("scheme")) {
          scheme = io::parse_scheme(params["scheme"].get<std::string>());
          params.erase("scheme");
        }
        io::merge_params(params, resonator);
      } else if (key == "quadrature") {
        io::merge_quadrature(v, quad);
      } else if (key == "scan") {
        merge_scan(v, scan);
      } else if (key == command) {
        for (auto a = v.begin(); a != v.end(); ++a) {
          if (!args.contains(a.key())) {
            throw error(error_kind::invalid_params, "unknown field", {{"field", a.key()}, {"in", command}});
          }
          args[a.key()] = a.value();
        }
      } else {
        try {
          default_args(key);
        } catch (const error&) {
          throw error(error_kind::invalid_params, "unknown config section", {{"section", key}});
        }
      }
    }
  }

  void finalize() {
    quad.workers = workers;
    scan.workers = workers;
    scan.level = quad.level;
    quad.validate();
    scan.validate();
    if (command == "resonate" || command == "ledger" || command == "search") resonator.validate();
  }
};

struct run_context {
  fs::path out_dir;
  std::vector<std::pair<std::string, std::string>> inputs;   // path, hash
  std::vector<std::pair<std::string, std::string>> outputs;  // name relative to out_dir, hash
  std::optional<json> expected_inputs;                        // from a manifest being replayed

  std::string read_input(const std::string& path) {
    std::string bytes = io::read_file(path);
    const std::string h = io::fnv1a_hex(bytes);
    if (expected_inputs) {
      for (const auto& e : *expected_inputs) {
        if (e.at("path") == path && e.at("fnv1a") != h) {
          throw error(error_kind::io, "input file changed since the manifest was written",
                      {{"path", path}, {"expected", e.at("fnv1a")}, {"found", h}});
        }
      }
    }
    inputs.emplace_back(path, h);
    return bytes;
  }

  void write_output(const std::string& name, const std::string& bytes) {
    io::write_file((out_dir / name).string(), bytes);
    outputs.emplace_back(name, io::fnv1a_hex(bytes));
  }
};

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<double> as_list(const json& v) {
  if (v.is_number()) return {v.get<double>()};
  return v.get<std::vector<double>>();
}

hardyz::resonator_poly build_poly(const settings& s, double T) {
  if (s.scheme == hardyz::resonator_scheme::soundararajan) {
    hardyz::soundararajan_params sp;
    sp.T = T;
    sp.truncation_mass = s.resonator.truncation_mass;
    sp.entry_cap = s.resonator.entry_cap;
    return hardyz::soundararajan_resonator(sp);
  }
  hardyz::resonator_params p = s.resonator;
  p.T = T;
  return hardyz::build_resonator(p);
}

// ----- commands -----

int cmd_eval(const settings& s, run_context& ctx) {
  const std::string method = s.args.at("method").get<std::string>();
  if (method != "riemann-siegel" && method != "oracle" && method != "both" && method != "auto") {
    throw error(error_kind::invalid_params, "method must be riemann-siegel, oracle, both or auto", {{"method", method}});
  }
  json rows = json::array();
  for (double t : as_list(s.args.at("t"))) {
    json row;
    row["t"] = t;
    if (method == "auto") {
      row["auto"] = io::to_json(hardyz::hardy_z(t, s.quad.level));
    }
    std::optional<hardyz::z_evaluation> rs, orc;
    if (method == "riemann-siegel" || method == "both") {
      rs = hardyz::hardy_z_main_sum(t, s.quad.level);
      row["riemann_siegel"] = io::to_json(*rs);
    }
    if (method == "oracle" || method == "both") {
      orc = hardyz::hardy_z_oracle(t);
      row["oracle"] = io::to_json(*orc);
    }
    if (rs && orc) {
      const double diff = std::abs(rs->z - orc->z);
      row["difference"] = diff;
      row["combined_budget"] = rs->error_budget + orc->error_budget;
      row["within_budget"] = diff <= rs->error_budget + orc->error_budget;
    }
    rows.push_back(row);
  }
  json doc = {{"schema", "hardyz.eval/1"}, {"rows", rows}};
  ctx.write_output("eval.json", io::dump(doc));
  std::cout << io::dump(doc);
  return 0;
}

int cmd_theta(const settings& s, run_context& ctx) {
  json rows = json::array();
  for (double t : as_list(s.args.at("t"))) {
    const hardyz::theta_value tv = hardyz::theta_with_bound(t);
    const double lg = hardyz::theta_loggamma(t);
    rows.push_back({{"t", t},
                    {"theta", tv.value},
                    {"truncation_bound", tv.truncation_bound},
                    {"theta_loggamma", lg},
                    {"difference", std::abs(tv.value - lg)}});
  }
  json doc = {{"schema", "hardyz.theta/1"}, {"rows", rows}};
  ctx.write_output("theta.json", io::dump(doc));
  std::cout << io::dump(doc);
  return 0;
}

int cmd_resonate(const settings& s, run_context& ctx) {
  hardyz::resonator_poly poly;
  if (!s.args.at("load").is_null()) {
    const std::string path = s.args.at("load").get<std::string>();
    poly = io::poly_from_json(io::parse(ctx.read_input(path), path));
  } else {
    poly = build_poly(s, s.resonator.T);
  }
  ctx.write_output("resonator.json", io::dump(io::to_json(poly)));
  json ratios = io::to_json(hardyz::lemma_ratios(poly));
  ratios = {{"schema", "hardyz.lemma_ratios/1"}, {"T", poly.params.T}, {"ratios", ratios}};
  ctx.write_output("lemma_ratios.json", io::dump(ratios));
  std::cout << "resonator: " << poly.size() << " coefficients, L = " << io::number(poly.mass_L) << "\n";
  return 0;
}

int cmd_ledger(const settings& s, run_context& ctx) {
  const double T = s.args.at("T").get<double>();
  const double eps = s.args.at("epsilon").get<double>();
  hardyz::resonator_poly poly;
  if (!s.args.at("resonator_file").is_null()) {
    const std::string path = s.args.at("resonator_file").get<std::string>();
    poly = io::poly_from_json(io::parse(ctx.read_input(path), path));
  } else {
    poly = build_poly(s, T);
  }
  hardyz::quadrature_config q = s.quad;
  q.record_panels = s.args.at("panels_csv").get<bool>();
  const hardyz::moment_ledger_result led = hardyz::moment_ledger(T, poly, q, eps);
  ctx.write_output("ledger.json", io::dump(io::to_json(led)));
  if (q.record_panels) ctx.write_output("panels.csv", io::panels_csv(led.panels));
  std::cout << "ledger T=" << io::number(T) << ": bound_plus = " << io::number(led.bound_plus)
            << ", bound_minus = " << io::number(led.bound_minus) << "\n";
  return 0;
}

int cmd_search(const settings& s, run_context& ctx) {
  hardyz::growth_options opt;
  const std::string regime = s.args.at("regime").get<std::string>();
  if (regime != "long" && regime != "short") throw error(error_kind::invalid_params, "regime must be long or short");
  opt.regime = regime == "long" ? hardyz::growth_regime::long_interval : hardyz::growth_regime::short_interval;
  opt.epsilon = s.args.at("epsilon").get<double>();
  opt.with_ledger = s.args.at("with_ledger").get<bool>();
  opt.scan = s.scan;
  opt.quad = s.quad;
  if (opt.with_ledger) opt.resonator = [&s](double T) { return build_poly(s, T); };
  const std::vector<double> Ts = as_list(s.args.at("T"));
  const std::vector<hardyz::growth_row> rows = hardyz::growth_curve(Ts, opt);
  const std::string csv = io::extremes_csv(rows);
  ctx.write_output("extremes.csv", csv);
  ctx.write_output("extremes.json", io::dump(io::extremes_document(rows)));
  std::cout << csv;
  return 0;
}

int cmd_verify(const settings& s, run_context& ctx) {
  const std::string suite = s.args.at("suite").get<std::string>();
  const auto cases = s.args.at("cases").get<std::uint64_t>();
  const auto seed = s.args.at("seed").get<std::uint64_t>();
  std::vector<std::string> names = suite == "all" ? hardyz::verify::suite_names() : std::vector<std::string>{suite};
  json reports = json::array();
  bool ok = true;
  for (const std::string& name : names) {
    const hardyz::verify::suite_report rep = hardyz::verify::run_suite(name, cases, seed);
    ok = ok && rep.ok();
    reports.push_back(rep.to_json());
    std::cout << name << ": " << rep.passed << "/" << rep.cases << (rep.ok() ? " pass" : " FAIL") << "\n";
  }
  json doc = {{"schema", "hardyz.verify/1"}, {"ok", ok}, {"suites", reports}};
  ctx.write_output("verify.json", io::dump(doc));
  return ok ? 0 : exit_verification_failed;
}

// report: one plot-ready CSV over ledger and extremes documents
int cmd_report(const settings& s, run_context& ctx) {
  const auto inputs = s.args.at("inputs").get<std::vector<std::string>>();
  if (inputs.empty()) throw error(error_kind::invalid_params, "report needs at least one input document");
  auto cell = [](const json& j, const char* key) { return j.contains(key) && j[key].is_number() ? io::number(j[key].get<double>()) : std::string(); };
  std::string csv =
      "source,kind,T,L,J1,J_signed,K_mass,bound_plus,bound_minus,max_plus,max_minus,envelope_A,envelope_ivic\n";
  for (const std::string& path : inputs) {
    const json doc = io::parse(ctx.read_input(path), path);
    const std::string schema = doc.value("schema", "");
    const std::string src = fs::path(path).filename().string();
    if (schema == io::ledger_schema) {
      csv += src + ",ledger," + cell(doc, "T") + "," + cell(doc, "L") + "," + cell(doc["J1"], "value") + "," +
             cell(doc["J_signed"], "value") + "," + cell(doc["K_mass"], "value") + "," + cell(doc, "bound_plus") + "," +
             cell(doc, "bound_minus") + ",,," + cell(doc, "envelope_A") + ",\n";
    } else if (schema == io::extremes_schema) {
      for (const json& row : doc.at("rows")) {
        const json& r = row.at("record");
        csv += src + ",extremes," + cell(r, "T") + ",,,,," + cell(r, "certified_lower_plus") + "," +
               cell(r, "certified_lower_minus") + "," + cell(r, "max_plus") + "," + cell(r, "max_minus") + "," +
               cell(r, "envelope_A") + "," + cell(r, "envelope_ivic") + "\n";
      }
    } else {
      throw error(error_kind::invalid_params, "report accepts ledger or extremes documents", {{"path", path}, {"schema", schema}});
    }
  }
  ctx.write_output("report.csv", csv);
  std::cout << csv;
  return 0;
}

int dispatch(const settings& s, run_context& ctx) {
  if (s.command == "eval") return cmd_eval(s, ctx);
  if (s.command == "theta") return cmd_theta(s, ctx);
  if (s.command == "resonate") return cmd_resonate(s, ctx);
  if (s.command == "ledger") return cmd_ledger(s, ctx);
  if (s.command == "search") return cmd_search(s, ctx);
  if (s.command == "verify") return cmd_verify(s, ctx);
  return cmd_report(s, ctx);
}

void print_error(const json& e) { std::cerr << e.dump() << "\n"; }

// Flags collected before the command is known; applied after the config file.
struct flag_values {
  std::optional<std::string> config_file;
  std::optional<unsigned> workers;
  // resonator
  std::optional<double> T, epsilon, a, truncation_mass, block_threshold;
  std::optional<std::uint64_t> N;
  std::optional<std::size_t> entry_cap;
  std::optional<std::string> mode, lower_endpoint, scheme;
  std::vector<double> window;
  // quadrature
  std::optional<int> order;
  std::optional<double> oversample, phi_floor;
  std::optional<std::size_t> block_panels;
  std::optional<std::uint64_t> node_budget;
  std::optional<std::string> correction_level;
  // scan
  std::optional<double> step_fraction;
  std::optional<std::size_t> candidates;
  bool no_refine = false;
  // command arguments
  std::vector<double> t_list, T_list;
  std::optional<std::string> method, load, resonator_file, regime, suite;
  std::optional<std::uint64_t> cases, seed;
  bool panels_csv = false, with_ledger = false;
  std::vector<std::string> inputs;
};

void apply_flags(const flag_values& f, settings& s) {
  if (f.workers) s.workers = *f.workers;
  json res;
  if (f.T) res["T"] = *f.T;
  if (f.N) res["N"] = *f.N;
  if (f.epsilon) res["epsilon"] = *f.epsilon;
  if (f.a) res["a"] = *f.a;
  if (f.mode) res["mode"] = *f.mode;
  if (!f.window.empty()) res["explicit_prime_window"] = f.window;
  if (f.truncation_mass) res["truncation_mass"] = *f.truncation_mass;
  if (f.entry_cap) res["entry_cap"] = *f.entry_cap;
  if (f.block_threshold) res["block_threshold"] = *f.block_threshold;
  if (f.lower_endpoint) res["lower_endpoint"] = *f.lower_endpoint;
  if (!res.empty()) io::merge_params(res, s.resonator);
  if (f.scheme) s.scheme = io::parse_scheme(*f.scheme);

  json q = json::object();
  if (f.order) q["order"] = *f.order;
  if (f.oversample) q["oversample"] = *f.oversample;
  if (f.block_panels) q["block_panels"] = *f.block_panels;
  if (f.node_budget) q["node_budget"] = *f.node_budget;
  if (f.phi_floor) q["phi_floor"] = *f.phi_floor;
  if (f.correction_level) q["correction_level"] = *f.correction_level;
  io::merge_quadrature(q, s.quad);

  if (f.step_fraction) s.scan.step_fraction = *f.step_fraction;
  if (f.candidates) s.scan.candidates = *f.candidates;
  if (f.no_refine) s.scan.refine = false;

  json& a = s.args;
  if (!f.t_list.empty()) a["t"] = f.t_list;
  if (f.method) a["method"] = *f.method;
  if (f.load) a["load"] = *f.load;
  if (s.command == "ledger") {
    if (f.epsilon) a["epsilon"] = *f.epsilon;
    if (f.T_list.size() > 1) throw error(error_kind::invalid_params, "ledger takes a single --T");
    if (!f.T_list.empty()) a["T"] = f.T_list.front();
    if (f.resonator_file) a["resonator_file"] = *f.resonator_file;
    if (f.panels_csv) a["panels_csv"] = true;
  }
  if (s.command == "search") {
    if (f.epsilon) a["epsilon"] = *f.epsilon;
    if (!f.T_list.empty()) a["T"] = f.T_list;
    if (f.regime) a["regime"] = *f.regime;
    if (f.with_ledger) a["with_ledger"] = true;
  }
  if (f.suite) a["suite"] = *f.suite;
  if (f.cases) a["cases"] = *f.cases;
  if (f.seed) a["seed"] = *f.seed;
  if (!f.inputs.empty()) a["inputs"] = f.inputs;
}

void add_resonator_flags(CLI::App* c, flag_values& f) {
  c->add_option("--N", f.N, "Resonator length N (default floor(T^(1/4)))");
  c->add_option("--a", f.a, "Block threshold scale a in (1, 1/(1-epsilon))");
  c->add_option("--mode", f.mode, "asymptotic or explicit");
  c->add_option("--window", f.window, "Explicit prime window lo hi, read as (lo, hi]")->expected(2);
  c->add_option("--truncation-mass", f.truncation_mass, "Mass share kept by truncation, in (0, 1]");
  c->add_option("--entry-cap", f.entry_cap, "Enumeration entry cap");
  c->add_option("--block-threshold", f.block_threshold, "Fixed per-block prime-count limit");
  c->add_option("--lower-endpoint", f.lower_endpoint, "corrected or as_printed");
  c->add_option("--scheme", f.scheme, "bondarenko_seip or soundararajan");
}

void add_quadrature_flags(CLI::App* c, flag_values& f) {
  c->add_option("--order", f.order, "Gauss-Legendre order per panel");
  c->add_option("--oversample", f.oversample, "Nodes per half period of the integrand");
  c->add_option("--block-panels", f.block_panels, "Panels per parallel work block");
  c->add_option("--node-budget", f.node_budget, "Maximum nodes over both grids");
  c->add_option("--phi-floor", f.phi_floor, "Gaussian weight below which the tail is bounded, not integrated");
}

void add_scan_flags(CLI::App* c, flag_values& f) {
  c->add_option("--step-fraction", f.step_fraction, "Grid step as a fraction of the mean zero spacing");
  c->add_option("--candidates", f.candidates, "Local extrema refined per sign");
  c->add_flag("--no-refine", f.no_refine, "Report raw grid maxima");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hardyz: Hardy Z evaluation, resonator moments and extreme-value search"};
  app.set_version_flag("--version", std::string(HARDYZ_VERSION));
  flag_values f;
  std::optional<std::string> from_manifest, out_dir_flag, manifest_name;
  app.add_option("--from-manifest", from_manifest, "Re-run the configuration recorded in a manifest");
  app.add_option("--out-dir", out_dir_flag, "Output directory (env HARDYZ_OUTPUT_DIR, default .)");
  app.add_option("--manifest", manifest_name, "Manifest file name inside the output directory")->default_str("manifest.json");
  app.add_option("--workers", f.workers, "Worker threads, 0 = all cores (env HARDYZ_WORKERS)");
  app.require_subcommand(0, 1);
  app.fallthrough();

  auto* eval = app.add_subcommand("eval", "Evaluate Z(t)");
  eval->add_option("--t", f.t_list, "Heights")->expected(1, -1);
  eval->add_option("--method", f.method, "riemann-siegel, oracle, both or auto");
  eval->add_option("--correction-level", f.correction_level, "first or none");

  auto* theta = app.add_subcommand("theta", "Evaluate the Riemann-Siegel theta function");
  theta->add_option("--t", f.t_list, "Heights")->expected(1, -1);

  auto* resonate = app.add_subcommand("resonate", "Build a resonator and its size/mass ratios");
  resonate->add_option("--T", f.T, "Height T");
  resonate->add_option("--epsilon", f.epsilon, "epsilon in (0, 1/3)");
  resonate->add_option("--load", f.load, "Re-serialize an existing resonator document");
  add_resonator_flags(resonate, f);

  auto* ledger = app.add_subcommand("ledger", "Moment ledger on [T^(3/4), T]");
  ledger->add_option("--T", f.T_list, "Height T")->expected(1);
  ledger->add_option("--epsilon", f.epsilon, "epsilon in (0, 1/3)");
  ledger->add_option("--resonator", f.resonator_file, "Resonator document (default: build from config)");
  ledger->add_flag("--panels-csv", f.panels_csv, "Also write per-panel contributions");
  ledger->add_option("--correction-level", f.correction_level, "first or none");
  add_resonator_flags(ledger, f);
  add_quadrature_flags(ledger, f);

  auto* search = app.add_subcommand("search", "Scan for extreme values of Z");
  search->add_option("--T", f.T_list, "Increasing list of heights")->expected(1, -1);
  search->add_option("--regime", f.regime, "long: [T^(3/4), T]; short: [T, 2T]");
  search->add_option("--epsilon", f.epsilon, "epsilon in (0, 1/3)");
  search->add_flag("--with-ledger", f.with_ledger, "Attach certified lower bounds from a moment ledger");
  search->add_option("--correction-level", f.correction_level, "first or none");
  add_resonator_flags(search, f);
  add_quadrature_flags(search, f);
  add_scan_flags(search, f);

  auto* verify = app.add_subcommand("verify", "Run verification suites");
  verify->add_option("--suite", f.suite, "all or one of: second-derivative, oracle, resonator-brute, lemma-ratios, hardy-mean, extraction, phase-convention");
  verify->add_option("--cases", f.cases, "Randomized cases per suite");
  verify->add_option("--seed", f.seed, "RNG seed");

  auto* report = app.add_subcommand("report", "Collect ledger and extremes documents into one CSV");
  report->add_option("inputs", f.inputs, "Ledger or extremes JSON files")->expected(1, -1);

  for (auto* c : {eval, theta, resonate, ledger, search, verify, report}) {
    c->add_option("--config", f.config_file, "hardyz.config/1 JSON file; flags override its values");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error({{"error", "InvalidParams"}, {"message", e.what()}, {"details", json::object()}});
    return 2;
  }

  settings s;
  run_context ctx;
  const std::string started = utc_now();
  std::string manifest_file = manifest_name.value_or("manifest.json");
  int code = 0;
  std::optional<json> failure;
  try {
    if (const char* env = std::getenv("HARDYZ_OUTPUT_DIR"); env && *env) ctx.out_dir = env;
    if (out_dir_flag) ctx.out_dir = *out_dir_flag;
    if (ctx.out_dir.empty()) ctx.out_dir = ".";
    fs::create_directories(ctx.out_dir);

    if (from_manifest) {
      if (!app.get_subcommands().empty()) {
        throw error(error_kind::invalid_params, "--from-manifest replaces the subcommand");
      }
      const json m = io::parse(io::read_file(*from_manifest), *from_manifest);
      io::require_schema(m, io::manifest_schema);
      const json& cfg = m.at("config");
      s.command = cfg.at("command").get<std::string>();
      s.args = default_args(s.command);
      s.merge(cfg);
      ctx.expected_inputs = m.at("inputs");
    } else {
      if (app.get_subcommands().empty()) {
        std::cout << app.help();
        return 2;
      }
      s.command = app.get_subcommands().front()->get_name();
      s.args = default_args(s.command);
      if (f.config_file) {
        s.merge(io::parse(ctx.read_input(*f.config_file), *f.config_file));
      }
      if (const char* env = std::getenv("HARDYZ_WORKERS"); env && *env) {
        s.workers = static_cast<unsigned>(std::stoul(env));
      }
      apply_flags(f, s);
    }
    if (f.workers) s.workers = *f.workers;
    s.finalize();
    code = dispatch(s, ctx);
  } catch (const error& e) {
    failure = json{{"error", std::string(hardyz::to_string(e.kind()))}, {"message", e.what()}, {"details", e.details()}};
    code = hardyz::exit_code(e.kind());
  } catch (const nlohmann::json::exception& e) {
    failure = json{{"error", "InvalidParams"}, {"message", e.what()}, {"details", json::object()}};
    code = 2;
  } catch (const std::exception& e) {
    failure = json{{"error", "InternalError"}, {"message", e.what()}, {"details", json::object()}};
    code = 3;
  }
  if (failure) print_error(*failure);

  if (!s.command.empty()) {
    json m;
    m["schema"] = std::string(io::manifest_schema);
    m["command"] = s.command;
    m["code_version"] = std::string(HARDYZ_VERSION);
    m["config"] = s.snapshot();
    m["workers"] = s.workers;
    m["started_utc"] = started;
    m["finished_utc"] = utc_now();
    json ins = json::array();
    for (const auto& [p, h] : ctx.inputs) ins.push_back({{"path", p}, {"fnv1a", h}});
    json outs = json::array();
    for (const auto& [p, h] : ctx.outputs) outs.push_back({{"path", p}, {"fnv1a", h}});
    m["inputs"] = ins;
    m["outputs"] = outs;
    m["exit_code"] = code;
    m["error"] = failure ? *failure : json(nullptr);
    try {
      io::write_file((ctx.out_dir / manifest_file).string(), io::dump(m));
    } catch (const error& e) {
      print_error({{"error", std::string(hardyz::to_string(e.kind()))}, {"message", e.what()}, {"details", e.details()}});
      if (code == 0) code = 2;
    }
  }
  return code;
}
