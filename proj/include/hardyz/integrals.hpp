#pragma once

// Weighted moments of Z against |R|^2 Phi, the Hardy mean integrals, and the
// extraction of positive/negative large-value bounds from them.
//
// Every integrand is evaluated with the block evaluator on composite
// Gauss-Legendre panels. The grid is planned per run of constant main-sum
// length, with node density oversample x (highest local frequency / 2 pi).
// Each integral is computed on the planned grid and on the grid with every
// panel bisected; the finer value is reported and the difference is the
// quadrature part of its error.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "hardyz/block_eval.hpp"
#include "hardyz/error.hpp"
#include "hardyz/quadrature.hpp"
#include "hardyz/resonator.hpp"
#include "hardyz/zeta_core.hpp"

namespace hardyz {

struct quadrature_config {
  int order = 8;
  double oversample = 8.0;
  std::size_t block_panels = 64;
  std::uint64_t node_budget = 4'000'000'000ULL;  // over both grids
  double phi_floor = 1e-300;
  unsigned workers = 0;  // 0: all hardware threads
  correction_level level = correction_level::first;
  bool record_panels = false;

  void validate() const {
    if (order < 2 || order > 32) throw error(error_kind::invalid_params, "quadrature order must be in [2, 32]");
    if (!(oversample >= 1.0)) throw error(error_kind::invalid_params, "oversample must be >= 1");
    if (block_panels == 0 || block_panels > 4096) throw error(error_kind::invalid_params, "block_panels must be in [1, 4096]");
    if (!(phi_floor > 0.0 && phi_floor < 1.0)) throw error(error_kind::invalid_params, "phi_floor must be in (0, 1)");
  }
};

struct integral_estimate {
  double value = 0.0;
  double imag = 0.0;  // used by complex integrands only
  double abs_error_estimate = 0.0;
  double quadrature_error = 0.0;
  double evaluation_error = 0.0;
  double tail_bound = 0.0;
  std::uint64_t nodes_used = 0;
  double lo = 0.0;
  double hi = 0.0;
};

enum class moment_integrand { signed_z, abs_zeta, unit };

constexpr std::string_view to_string(moment_integrand g) noexcept {
  switch (g) {
    case moment_integrand::signed_z: return "signed_Z";
    case moment_integrand::abs_zeta: return "abs_zeta";
    case moment_integrand::unit: return "unit";
  }
  return "?";
}

/// One panel's contribution on the fine grid (debug export).
struct panel_contribution {
  double lo = 0.0;
  double hi = 0.0;
  double signed_z = 0.0;
  double abs_z = 0.0;
  double unit = 0.0;
  double zeta_re = 0.0;
  double zeta_im = 0.0;
};

/// Integration job: int_lo^hi g(t) |R(t)|^2 Phi(t * phi_scale) dt.
struct moment_job {
  double lo = 0.0;
  double hi = 0.0;
  const resonator_poly* poly = nullptr;  // null: |R|^2 = 1
  double phi_scale = 0.0;                // 0: no Gaussian weight
  bool need_z = true;
  bool need_zeta = false;                // also integrate e^{-i theta} Z = zeta(1/2 + it)
};

struct moment_values {
  double signed_z = 0.0;
  double abs_z = 0.0;
  double unit = 0.0;
  std::complex<double> zeta;
  double err_signed = 0.0;
  double err_abs = 0.0;
  double err_unit = 0.0;
  double err_zeta = 0.0;
  std::uint64_t nodes = 0;
  std::vector<panel_contribution> panels;
};

namespace detail {

inline double theta_prime(double t) { return 0.5 * std::log(t / (2.0 * M_PI)); }

inline double resonator_spread(const resonator_poly* poly) {
  if (!poly || poly->size() < 2) return 0.0;
  return std::log(static_cast<double>(poly->m.back()) / static_cast<double>(poly->m.front()));
}

/// Panels for each run of constant main-sum length, `refine` x the base count.
inline std::vector<panel_segment> plan_grid(const moment_job& job, const quadrature_config& cfg, std::size_t refine) {
  const std::vector<double> cuts =
      job.need_z ? rs_breakpoints(job.lo, job.hi) : std::vector<double>{job.lo, job.hi};
  const double spread = resonator_spread(job.poly);
  double h_cap = (job.hi - job.lo) / 4.0;
  if (job.phi_scale > 0.0) h_cap = std::min(h_cap, 0.05 / job.phi_scale);
  std::vector<panel_segment> segs;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i];
    const double b = cuts[i + 1];
    if (!(b > a)) continue;
    double freq = spread;  // radians per unit t
    if (job.need_z) freq += (job.need_zeta ? 2.0 : 1.0) * theta_prime(b);
    double h = h_cap;
    if (freq > 0.0) h = std::min(h, 2.0 * M_PI * cfg.order / (cfg.oversample * freq));
    const std::size_t base = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((b - a) / h)));
    const std::size_t panels = base * refine;
    segs.push_back({a, (b - a) / static_cast<double>(panels), panels, job.need_z ? rs_term_count(a) : 0});
  }
  return segs;
}

inline std::uint64_t grid_nodes(std::span<const panel_segment> segs, int order) {
  std::uint64_t n = 0;
  for (const auto& s : segs) n += static_cast<std::uint64_t>(s.panels) * static_cast<std::uint64_t>(order);
  return n;
}

struct block_sums {
  compensated_sum<> signed_z, abs_z, unit, zeta_re, zeta_im, e_signed, e_abs, e_unit, e_zeta;
  std::vector<panel_contribution> panels;
};

struct pass_worker {
  z_block_state st;
  node_values nv;
};

inline double max_dirichlet_sum(std::uint64_t n_terms) {
  // sum_{n<=N} n^{-1/2} <= 2 sqrt(N) - 1
  return 2.0 * std::sqrt(static_cast<double>(n_terms)) - 1.0;
}

}  // namespace detail

/// Integrate all requested integrands of `job` over one grid.
inline moment_values moment_pass(const moment_job& job, const quadrature_config& cfg, std::size_t refine) {
  const std::vector<panel_segment> segs = detail::plan_grid(job, cfg, refine);
  const gauss_legendre rule(cfg.order);
  const std::vector<panel_block> blocks = split_blocks(segs, cfg.block_panels);
  std::uint64_t max_terms = 0;
  for (const auto& s : segs) max_terms = std::max(max_terms, s.n_terms);
  const term_set z_terms = job.need_z ? term_set::riemann_siegel(max_terms) : term_set{};
  const term_set r_terms = job.poly ? term_set::resonator(*job.poly) : term_set{};
  const double r0 = job.poly ? job.poly->sum_r() : 1.0;
  const double eps = std::numeric_limits<double>::epsilon();
  // Phasor recurrences lose about two ulps per panel step; seeding adds a few.
  const double drift = (4.0 * static_cast<double>(cfg.block_panels) + 16.0) * eps;
  const double r_abs_err = job.poly ? r0 * drift : 0.0;
  const double r2_err = job.poly ? 2.0 * r0 * r_abs_err + r_abs_err * r_abs_err : 0.0;

  std::vector<detail::block_sums> results(blocks.size());
  parallel_for_blocks<detail::pass_worker>(blocks.size(), resolve_workers(cfg.workers), [&](detail::pass_worker& w,
                                                                                           std::size_t bi) {
    const panel_block& blk = blocks[bi];
    const panel_segment& seg = segs[blk.segment];
    evaluate_block_nodes(w.st, segs, blk, rule.x, z_terms, job.poly ? &r_terms : nullptr, job.need_z, cfg.level, w.nv);
    const double z_sup = detail::max_dirichlet_sum(seg.n_terms);
    const double z_round = 2.0 * z_sup * drift;
    detail::block_sums& out = results[bi];
    const std::size_t k = rule.size();
    for (std::size_t p = 0; p < blk.panels; ++p) {
      double s_signed = 0, s_abs = 0, s_unit = 0, s_zr = 0, s_zi = 0;
      double e_signed = 0, e_abs = 0, e_unit = 0, e_zeta = 0;
      // both budgets decrease in t, so the panel's left end bounds them
      const double t_left = seg.lo + static_cast<double>(blk.first_panel + p) * seg.h;
      const double ez = job.need_z ? rs_error_budget(t_left, cfg.level) + z_round : 0.0;
      const double eth = job.need_zeta ? theta_truncation_bound(t_left) + 8.0 * eps * (t_left + seg.h) : 0.0;
      for (std::size_t q = 0; q < k; ++q) {
        const std::size_t idx = p * k + q;
        const double t = w.nv.t[idx];
        const double phi = job.phi_scale > 0.0 ? std::exp(-(t * job.phi_scale) * (t * job.phi_scale)) : 1.0;
        const double wr = rule.w[q] * w.nv.abs_r2[idx] * phi;
        const double werr = rule.w[q] * phi;
        const double r2 = w.nv.abs_r2[idx];
        s_unit += wr;
        e_unit += werr * r2_err;
        if (job.need_z) {
          const double z = w.nv.z[idx];
          s_signed += wr * z;
          s_abs += wr * std::abs(z);
          const double ep = werr * (std::abs(z) * r2_err + ez * (r2 + r2_err));
          e_signed += ep;
          e_abs += ep;
          if (job.need_zeta) {
            const double th = w.nv.theta[idx];
            s_zr += wr * z * std::cos(th);
            s_zi -= wr * z * std::sin(th);
            e_zeta += werr * ((ez + std::abs(z) * eth) * (r2 + r2_err) + std::abs(z) * r2_err);
          }
        }
      }
      const double h = seg.h;
      out.signed_z.add(s_signed * h);
      out.abs_z.add(s_abs * h);
      out.unit.add(s_unit * h);
      out.zeta_re.add(s_zr * h);
      out.zeta_im.add(s_zi * h);
      out.e_signed.add(e_signed * h);
      out.e_abs.add(e_abs * h);
      out.e_unit.add(e_unit * h);
      out.e_zeta.add(e_zeta * h);
      if (cfg.record_panels) {
        const double plo = seg.lo + static_cast<double>(blk.first_panel + p) * h;
        out.panels.push_back({plo, plo + h, s_signed * h, s_abs * h, s_unit * h, s_zr * h, s_zi * h});
      }
    }
  });

  // Fixed-order reduction: identical for any worker count.
  detail::block_sums total;
  moment_values mv;
  for (auto& b : results) {
    total.signed_z.add(b.signed_z.value());
    total.abs_z.add(b.abs_z.value());
    total.unit.add(b.unit.value());
    total.zeta_re.add(b.zeta_re.value());
    total.zeta_im.add(b.zeta_im.value());
    total.e_signed.add(b.e_signed.value());
    total.e_abs.add(b.e_abs.value());
    total.e_unit.add(b.e_unit.value());
    total.e_zeta.add(b.e_zeta.value());
    if (cfg.record_panels) mv.panels.insert(mv.panels.end(), b.panels.begin(), b.panels.end());
  }
  mv.signed_z = total.signed_z.value();
  mv.abs_z = total.abs_z.value();
  mv.unit = total.unit.value();
  mv.zeta = {total.zeta_re.value(), total.zeta_im.value()};
  // roundoff of the accumulation itself
  const double acc_round = 4.0 * eps;
  mv.err_signed = total.e_signed.value() + acc_round * mv.abs_z;
  mv.err_abs = total.e_abs.value() + acc_round * mv.abs_z;
  mv.err_unit = total.e_unit.value() + acc_round * mv.unit;
  mv.err_zeta = total.e_zeta.value() + acc_round * mv.abs_z;
  mv.nodes = detail::grid_nodes(segs, cfg.order);
  return mv;
}

struct moment_result {
  integral_estimate signed_z;
  integral_estimate abs_z;
  integral_estimate unit;
  integral_estimate zeta;  // value + i imag
  std::vector<panel_contribution> panels;
};

/// Coarse and fine passes, Gaussian tail cutoff, and error assembly.
inline moment_result integrate_moments(moment_job job, const quadrature_config& cfg) {
  cfg.validate();
  if (!(job.hi > job.lo)) throw error(error_kind::invalid_params, "integration interval must have lo < hi");
  if (job.need_z) require_main_sum_domain(job.lo), require_main_sum_domain(job.hi);

  // Beyond u_c = sqrt(-log phi_floor) the weight is below phi_floor.
  double tail = 0.0;
  const double full_hi = job.hi;
  if (job.phi_scale > 0.0) {
    const double u_c = std::sqrt(-std::log(cfg.phi_floor));
    const double t_c = u_c / job.phi_scale;
    if (t_c < job.hi) {
      job.hi = std::max(t_c, job.lo);
      const double r0 = job.poly ? job.poly->sum_r() : 1.0;
      tail = r0 * r0 * 0.5 * std::sqrt(M_PI) * std::erfc(u_c) / job.phi_scale;
    }
  }
  const std::uint64_t planned =
      detail::grid_nodes(detail::plan_grid(job, cfg, 1), cfg.order) * 3;  // coarse + fine
  if (planned > cfg.node_budget) {
    throw error(error_kind::node_budget_exceeded, "quadrature would exceed the node budget",
                {{"nodes", planned}, {"budget", cfg.node_budget}, {"lo", job.lo}, {"hi", full_hi}});
  }

  moment_result res;
  moment_values coarse;
  moment_values fine;
  if (job.hi > job.lo) {
    quadrature_config coarse_cfg = cfg;
    coarse_cfg.record_panels = false;
    coarse = moment_pass(job, coarse_cfg, 1);
    fine = moment_pass(job, cfg, 2);
  }
  const double z_sup = job.need_z ? detail::max_dirichlet_sum(rs_term_count(full_hi)) + 1.0 : 1.0;
  auto make = [&](double v, double c, double e, double tail_factor) {
    integral_estimate ie;
    ie.value = v;
    ie.quadrature_error = std::abs(v - c);
    ie.evaluation_error = e;
    ie.tail_bound = tail * tail_factor;
    ie.abs_error_estimate = ie.quadrature_error + ie.evaluation_error + ie.tail_bound;
    ie.nodes_used = coarse.nodes + fine.nodes;
    ie.lo = job.lo;
    ie.hi = full_hi;
    return ie;
  };
  res.signed_z = make(fine.signed_z, coarse.signed_z, fine.err_signed, z_sup);
  res.abs_z = make(fine.abs_z, coarse.abs_z, fine.err_abs, z_sup);
  res.unit = make(fine.unit, coarse.unit, fine.err_unit, 1.0);
  res.zeta = make(fine.zeta.real(), coarse.zeta.real(), fine.err_zeta, z_sup);
  res.zeta.imag = fine.zeta.imag();
  res.zeta.quadrature_error = std::abs(fine.zeta - coarse.zeta);
  res.zeta.abs_error_estimate = res.zeta.quadrature_error + res.zeta.evaluation_error + res.zeta.tail_bound;
  res.panels = std::move(fine.panels);
  return res;
}

/// int_{T^{3/4}}^{T} g(t) |R(t)|^2 Phi(t log T / T) dt.
inline integral_estimate weighted_moment(moment_integrand g, const resonator_poly& poly, double T,
                                         const quadrature_config& cfg = {}) {
  if (!(T >= 1e3)) throw error(error_kind::domain, "weighted moments need T >= 1e3", {{"T", T}});
  moment_job job;
  job.lo = std::pow(T, 0.75);
  job.hi = T;
  job.poly = &poly;
  job.phi_scale = std::log(T) / T;
  job.need_z = g != moment_integrand::unit;
  const moment_result r = integrate_moments(job, cfg);
  switch (g) {
    case moment_integrand::signed_z: return r.signed_z;
    case moment_integrand::abs_zeta: return r.abs_z;
    case moment_integrand::unit: return r.unit;
  }
  return r.unit;
}

/// Closed form of int_{T^{3/4}}^{T} Phi(t log T / T) dt.
inline double unit_moment_closed_form(double T) {
  const double L = std::log(T);
  return T / L * 0.5 * std::sqrt(M_PI) * (std::erf(L) - std::erf(std::pow(T, -0.25) * L));
}

struct hardy_means {
  double T = 0.0;
  integral_estimate z_integral;     // int_T^{2T} Z
  integral_estimate zeta_integral;  // int_T^{2T} zeta(1/2 + it), value + i imag
  double z_ratio = 0.0;             // z_integral / T^{3/4}
  double zeta_ratio = 0.0;          // Re zeta_integral / T
};

inline hardy_means hardy_mean_integrals(double T, const quadrature_config& cfg = {}) {
  if (!(T >= 1e3)) throw error(error_kind::domain, "Hardy mean integrals need T >= 1e3", {{"T", T}});
  moment_job job;
  job.lo = T;
  job.hi = 2.0 * T;
  job.need_z = true;
  job.need_zeta = true;
  const moment_result r = integrate_moments(job, cfg);
  hardy_means hm;
  hm.T = T;
  hm.z_integral = r.signed_z;
  hm.zeta_integral = r.zeta;
  hm.z_ratio = r.signed_z.value / std::pow(T, 0.75);
  hm.zeta_ratio = r.zeta.value / T;
  return hm;
}

struct extraction_inputs {
  double J_abs = 0.0;
  double J_abs_error = 0.0;
  double J_signed = 0.0;
  double J_signed_error = 0.0;
  double K_mass = 0.0;
  double K_mass_error = 0.0;
};

struct extreme_bounds {
  double lower_plus = 0.0;
  double lower_minus = 0.0;
  double propagated_plus = 0.0;   // subtracted from the plain quotient
  double propagated_minus = 0.0;
};

/// max Z^- >= int Z^- K / int K = (J_abs - J_signed) / (2 K_mass), and the
/// same with a plus sign for Z^+, made conservative by worst-case errors.
inline extreme_bounds extract_extreme_bounds(const extraction_inputs& in) {
  if (!(in.K_mass > 0.0)) throw error(error_kind::invalid_params, "K_mass must be positive", {{"K_mass", in.K_mass}});
  const double tol = in.J_abs_error + in.J_signed_error;
  if (in.J_abs < std::abs(in.J_signed) - tol) {
    throw error(error_kind::inconsistent_inputs, "J_abs < |J_signed| beyond the error budgets",
                {{"J_abs", in.J_abs}, {"J_signed", in.J_signed}, {"tolerance", tol}});
  }
  const double k_lo = in.K_mass - in.K_mass_error;
  const double k_hi = in.K_mass + in.K_mass_error;
  auto one = [&](double num, double& lower, double& propagated) {
    // smallest num / (2K) over the error box
    const double worst = num - tol;
    if (worst < 0.0 && !(k_lo > 0.0)) {
      throw error(error_kind::budget_exceeded, "K_mass error exceeds K_mass", {{"K_mass", in.K_mass}});
    }
    lower = worst / (2.0 * (worst >= 0.0 ? k_hi : k_lo));
    propagated = num / (2.0 * in.K_mass) - lower;
  };
  extreme_bounds b;
  one(in.J_abs + in.J_signed, b.lower_plus, b.propagated_plus);
  one(in.J_abs - in.J_signed, b.lower_minus, b.propagated_minus);
  return b;
}

/// Growth target exp((1/2 - eps) sqrt(log T log3 T / log2 T)).
inline double envelope_A(double T, double epsilon) {
  const double l1 = std::log(T);
  const double l2 = std::log(l1);
  const double l3 = std::log(l2);
  if (!(l3 > 0.0)) throw error(error_kind::domain, "envelope needs log log log T > 0", {{"T", T}});
  return std::exp((0.5 - epsilon) * std::sqrt(l1 * l3 / l2));
}

/// exp((1/2 - eps) sqrt(log T / log2 T)), the target on [T, 2T].
inline double envelope_A_short(double T, double epsilon) {
  const double l1 = std::log(T);
  const double l2 = std::log(l1);
  if (!(l2 > 0.0)) throw error(error_kind::domain, "envelope needs log log T > 0", {{"T", T}});
  return std::exp((0.5 - epsilon) * std::sqrt(l1 / l2));
}

inline double ivic_floor(double T) { return std::pow(std::log(T), 0.25); }

struct moment_ledger_result {
  double T = 0.0;
  double epsilon = 0.1;
  double mass_L = 0.0;
  double R0 = 0.0;
  std::size_t support_size = 0;
  integral_estimate J1;        // int |zeta| |R|^2 Phi
  integral_estimate J_signed;  // int Z |R|^2 Phi
  integral_estimate K_mass;    // int |R|^2 Phi
  double bound_plus = 0.0;
  double bound_minus = 0.0;
  double envelope_A = 0.0;
  double ratio_J1 = 0.0;      // J1 / (L T A)
  double ratio_signed = 0.0;  // J_signed / (L T log^2 T)
  double ratio_K = 0.0;       // K_mass / (T log^3 T L)
  std::vector<panel_contribution> panels;
};

inline moment_ledger_result moment_ledger(double T, const resonator_poly& poly, const quadrature_config& cfg = {},
                                          double epsilon = 0.1) {
  if (!(T >= 1e3)) throw error(error_kind::domain, "moment ledger needs T >= 1e3", {{"T", T}});
  if (poly.size() == 0) throw error(error_kind::invalid_params, "resonator is empty");
  moment_job job;
  job.lo = std::pow(T, 0.75);
  job.hi = T;
  job.poly = &poly;
  job.phi_scale = std::log(T) / T;
  job.need_z = true;
  moment_result r = integrate_moments(job, cfg);

  moment_ledger_result led;
  led.T = T;
  led.epsilon = epsilon;
  led.mass_L = poly.mass_L;
  led.R0 = poly.sum_r();
  led.support_size = poly.size();
  led.J1 = r.abs_z;
  led.J_signed = r.signed_z;
  led.K_mass = r.unit;
  const extreme_bounds b = extract_extreme_bounds({led.J1.value, led.J1.abs_error_estimate, led.J_signed.value,
                                                   led.J_signed.abs_error_estimate, led.K_mass.value,
                                                   led.K_mass.abs_error_estimate});
  led.bound_plus = b.lower_plus;
  led.bound_minus = b.lower_minus;
  led.envelope_A = envelope_A(T, epsilon);
  const double lT = std::log(T);
  led.ratio_J1 = led.J1.value / (poly.mass_L * T * led.envelope_A);
  led.ratio_signed = led.J_signed.value / (poly.mass_L * T * lT * lT);
  led.ratio_K = led.K_mass.value / (T * lT * lT * lT * poly.mass_L);
  led.panels = std::move(r.panels);
  return led;
}

}  // namespace hardyz
