#pragma once

// Grid scans of Z for large positive and negative values, sign-change
// location, and growth curves against the reference envelopes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hardyz/block_eval.hpp"
#include "hardyz/error.hpp"
#include "hardyz/integrals.hpp"
#include "hardyz/resonator.hpp"
#include "hardyz/zeta_core.hpp"

namespace hardyz {

struct scan_config {
  double step_fraction = 0.25;  // of the mean zero spacing 2 pi / log(t / 2 pi)
  bool refine = true;
  std::size_t candidates = 100;
  std::size_t block_points = 2048;
  std::uint64_t point_budget = 2'000'000'000ULL;
  unsigned workers = 0;
  correction_level level = correction_level::first;

  void validate() const {
    if (!(step_fraction > 0.0 && step_fraction <= 1.0)) throw error(error_kind::invalid_params, "step_fraction must be in (0, 1]");
    if (block_points < 2) throw error(error_kind::invalid_params, "block_points must be >= 2");
  }
};

struct extreme_record {
  double T = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::string grid_step_policy;
  double max_plus = 0.0;
  double argmax_plus = 0.0;
  double max_minus = 0.0;
  double argmax_minus = 0.0;
  double envelope_A = 0.0;
  double envelope_ivic = 0.0;
  std::optional<double> certified_lower_plus;  // set when a moment ledger ran
  std::optional<double> certified_lower_minus;
  std::uint64_t grid_points = 0;
  std::uint64_t sign_changes = 0;
  std::optional<std::pair<double, double>> first_sign_change;
  bool refined = false;
};

/// Z at one point, through the oracle below the main-sum range.
inline double z_value(double t, correction_level level = correction_level::first) {
  return t < min_main_sum_height ? hardy_z_oracle(t).z : hardy_z_main_sum(t, level).z;
}

/// Mean zero spacing 2 pi / log(t / 2 pi), floored where the log is small.
inline double mean_zero_spacing(double t) { return 2.0 * M_PI / std::max(1.0, std::log(t / (2.0 * M_PI))); }

namespace detail {

struct scan_candidate {
  double t = 0.0;
  double value = 0.0;  // |Z| of the local extremum
};

inline bool candidate_before(const scan_candidate& a, const scan_candidate& b) {
  return a.value != b.value ? a.value > b.value : a.t < b.t;
}

inline void keep_top(std::vector<scan_candidate>& v, std::size_t n) {
  if (v.size() > n) {
    std::partial_sort(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n), v.end(), candidate_before);
    v.resize(n);
  } else {
    std::sort(v.begin(), v.end(), candidate_before);
  }
}

struct scan_block {
  double h = 0.0;
  std::vector<double> t;
  std::vector<double> z;
};

struct block_summary {
  double first_t = 0.0, first_z = 0.0, last_t = 0.0, last_z = 0.0;
  std::uint64_t points = 0;
  std::uint64_t sign_changes = 0;
  std::optional<std::pair<double, double>> first_change;
  std::vector<scan_candidate> plus, minus;
  double h = 0.0;
};

inline void summarize(const scan_block& b, std::size_t keep, block_summary& s) {
  const std::size_t n = b.t.size();
  s.points = n;
  s.h = b.h;
  if (n == 0) return;
  s.first_t = b.t.front();
  s.first_z = b.z.front();
  s.last_t = b.t.back();
  s.last_z = b.z.back();
  for (std::size_t i = 0; i < n; ++i) {
    const double z = b.z[i];
    const double left = i > 0 ? b.z[i - 1] : z;
    const double right = i + 1 < n ? b.z[i + 1] : z;
    if (z > 0.0 && z >= left && z >= right) s.plus.push_back({b.t[i], z});
    if (z < 0.0 && z <= left && z <= right) s.minus.push_back({b.t[i], -z});
    if (i + 1 < n && ((z > 0.0) != (b.z[i + 1] > 0.0) || z == 0.0)) {
      ++s.sign_changes;
      if (!s.first_change) s.first_change = std::make_pair(b.t[i], b.t[i + 1]);
    }
  }
  keep_top(s.plus, keep);
  keep_top(s.minus, keep);
}

/// Golden-section search for the maximum of sign * Z on [a, b].
inline scan_candidate golden_refine(double a, double b, double sign, correction_level level) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - g * (b - a);
  double x2 = a + g * (b - a);
  double f1 = sign * z_value(x1, level);
  double f2 = sign * z_value(x2, level);
  for (int it = 0; it < 200 && (b - a) > 1e-10 * std::max(1.0, std::abs(a)); ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = sign * z_value(x2, level);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = sign * z_value(x1, level);
    }
  }
  return f1 >= f2 ? scan_candidate{x1, f1} : scan_candidate{x2, f2};
}

}  // namespace detail

/// Scan Z on [lo, hi] at a step of step_fraction x the local mean zero
/// spacing; optionally refine the best local extrema of each sign.
inline extreme_record scan_extremes(double lo, double hi, const scan_config& cfg = {}) {
  cfg.validate();
  if (!(hi > lo) || lo < 0.0) throw error(error_kind::invalid_params, "scan interval must satisfy 0 <= lo < hi");
  if (hi > max_height) require_main_sum_domain(hi);

  // Pieces: oracle range below min_main_sum_height, then runs of constant
  // main-sum length. Each piece is a uniform grid including its left end.
  std::vector<panel_segment> segs;
  std::vector<bool> oracle_piece;
  const double step_cap = (hi - lo) / 64.0;
  if (lo < min_main_sum_height) {
    const double b = std::min(hi, min_main_sum_height);
    const double h = std::min(step_cap, cfg.step_fraction * mean_zero_spacing(b));
    const std::size_t n = static_cast<std::size_t>(std::ceil((b - lo) / h));
    segs.push_back({lo, (b - lo) / static_cast<double>(n), n, 0});
    oracle_piece.push_back(true);
  }
  if (hi > min_main_sum_height) {
    const std::vector<double> cuts = rs_breakpoints(std::max(lo, min_main_sum_height), hi);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double a = cuts[i];
      const double b = cuts[i + 1];
      if (!(b > a)) continue;
      const double h = std::min(step_cap, cfg.step_fraction * mean_zero_spacing(b));
      const std::size_t n = static_cast<std::size_t>(std::ceil((b - a) / h));
      segs.push_back({a, (b - a) / static_cast<double>(n), n, rs_term_count(a)});
      oracle_piece.push_back(false);
    }
  }
  std::uint64_t total = 1;
  for (const auto& s : segs) total += s.panels;
  if (total > cfg.point_budget) {
    throw error(error_kind::node_budget_exceeded, "scan would exceed the point budget",
                {{"points", total}, {"budget", cfg.point_budget}});
  }

  const std::vector<panel_block> blocks = split_blocks(segs, cfg.block_points);
  std::uint64_t max_terms = 0;
  for (const auto& s : segs) max_terms = std::max(max_terms, s.n_terms);
  const term_set z_terms = term_set::riemann_siegel(max_terms);
  const std::vector<double> offsets{0.0};
  const std::size_t keep = std::max<std::size_t>(cfg.candidates, 1);

  struct worker {
    z_block_state st;
    node_values nv;
    detail::scan_block sb;
  };
  // one extra summary for the right end point
  std::vector<detail::block_summary> sums(blocks.size() + 1);
  parallel_for_blocks<worker>(blocks.size(), resolve_workers(cfg.workers), [&](worker& w, std::size_t bi) {
    const panel_block& blk = blocks[bi];
    const panel_segment& seg = segs[blk.segment];
    w.sb.h = seg.h;
    if (oracle_piece[blk.segment]) {
      w.sb.t.resize(blk.panels);
      w.sb.z.resize(blk.panels);
      for (std::size_t p = 0; p < blk.panels; ++p) {
        const double t = seg.lo + static_cast<double>(blk.first_panel + p) * seg.h;
        w.sb.t[p] = t;
        w.sb.z[p] = hardy_z_oracle(t).z;
      }
    } else {
      evaluate_block_nodes(w.st, segs, blk, offsets, z_terms, nullptr, true, cfg.level, w.nv);
      w.sb.t = w.nv.t;
      w.sb.z = w.nv.z;
    }
    detail::summarize(w.sb, keep, sums[bi]);
  });
  {
    detail::scan_block end;
    end.h = segs.back().h;
    end.t = {hi};
    end.z = {z_value(hi, cfg.level)};
    detail::summarize(end, keep, sums.back());
  }

  extreme_record rec;
  rec.lo = lo;
  rec.hi = hi;
  rec.grid_step_policy = "step = " + std::to_string(cfg.step_fraction) + " x 2pi/log(t/2pi), oracle below t=50";
  std::vector<detail::scan_candidate> plus, minus;
  std::vector<double> plus_h, minus_h;
  const detail::block_summary* prev = nullptr;
  for (const auto& s : sums) {
    if (s.points == 0) continue;
    rec.grid_points += s.points;
    rec.sign_changes += s.sign_changes;
    if (prev) {
      const bool change = (prev->last_z > 0.0) != (s.first_z > 0.0) || prev->last_z == 0.0;
      if (change) {
        ++rec.sign_changes;
        if (!rec.first_sign_change) rec.first_sign_change = std::make_pair(prev->last_t, s.first_t);
      }
    }
    if (!rec.first_sign_change && s.first_change) rec.first_sign_change = s.first_change;
    for (const auto& c : s.plus) plus.push_back(c), plus_h.push_back(s.h);
    for (const auto& c : s.minus) minus.push_back(c), minus_h.push_back(s.h);
    prev = &s;
  }

  auto finish = [&](std::vector<detail::scan_candidate>& cands, std::vector<double>& hs, double sign, double& best,
                    double& arg) {
    // candidate order carries its grid step along
    std::vector<std::size_t> order(cands.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return detail::candidate_before(cands[a], cands[b]); });
    if (order.size() > keep) order.resize(keep);
    best = 0.0;
    arg = lo;
    for (std::size_t i : order) {
      detail::scan_candidate c = cands[i];
      if (cfg.refine) {
        const double a = std::max(lo, c.t - hs[i]);
        const double b = std::min(hi, c.t + hs[i]);
        if (b > a) {
          const detail::scan_candidate r = detail::golden_refine(a, b, sign, cfg.level);
          if (r.value > c.value) c = r;
        }
      }
      if (c.value > best || (c.value == best && c.t < arg)) {
        best = c.value;
        arg = c.t;
      }
    }
  };
  finish(plus, plus_h, 1.0, rec.max_plus, rec.argmax_plus);
  finish(minus, minus_h, -1.0, rec.max_minus, rec.argmax_minus);
  rec.refined = cfg.refine;
  return rec;
}

struct sign_change {
  double lo = 0.0;
  double hi = 0.0;
  double z_lo = 0.0;
  double z_hi = 0.0;
  int iterations = 0;
};

/// Sign of Z(t) that the error budget supports. The main sum is used when
/// |Z| clears its budget, otherwise the oracle; 0 if neither can decide.
inline int certified_sign(double t, correction_level level, double* value = nullptr) {
  const z_evaluation e = t < min_main_sum_height ? hardy_z_oracle(t) : hardy_z_main_sum(t, level);
  if (value) *value = e.z;
  if (std::abs(e.z) > e.error_budget) return e.z > 0.0 ? 1 : -1;
  if (e.how == method::oracle || t > 1e7) return 0;
  const z_evaluation o = hardy_z_oracle(t);
  if (value) *value = o.z;
  if (std::abs(o.z) > o.error_budget) return o.z > 0.0 ? 1 : -1;
  return 0;
}

/// Bisect a bracketing pair of Z down to `width`. Every sign used is
/// certified, so the final bracket contains a sign change of Z itself, not
/// just of its approximation.
inline sign_change bisect_sign_change(double lo, double hi, double width = 1e-6,
                                      correction_level level = correction_level::first) {
  sign_change sc{lo, hi, 0.0, 0.0, 0};
  const int sl = certified_sign(lo, level, &sc.z_lo);
  const int sh = certified_sign(hi, level, &sc.z_hi);
  if (sl == 0 || sh == 0) {
    throw error(error_kind::precision, "bracket endpoint sign is below the error budget", {{"lo", lo}, {"hi", hi}});
  }
  if (sl == sh) throw error(error_kind::invalid_params, "bisection needs a sign change", {{"lo", lo}, {"hi", hi}});
  while (sc.hi - sc.lo > width && sc.iterations < 200) {
    const double mid = 0.5 * (sc.lo + sc.hi);
    double zm = 0.0;
    const int sm = certified_sign(mid, level, &zm);
    if (sm == 0) {
      throw error(error_kind::precision, "sign of Z not certified inside the bracket",
                  {{"t", mid}, {"lo", sc.lo}, {"hi", sc.hi}});
    }
    if (sm == sl) {
      sc.lo = mid;
      sc.z_lo = zm;
    } else {
      sc.hi = mid;
      sc.z_hi = zm;
    }
    ++sc.iterations;
  }
  return sc;
}

/// Locate one sign change of Z in [T, 2T] to `width`.
inline sign_change locate_sign_change(double T, double width = 1e-6, const scan_config& cfg = {}) {
  scan_config c = cfg;
  c.refine = false;
  const extreme_record rec = scan_extremes(T, 2.0 * T, c);
  if (!rec.first_sign_change) {
    throw error(error_kind::budget_exceeded, "no sign change found on the scan grid", {{"T", T}});
  }
  return bisect_sign_change(rec.first_sign_change->first, rec.first_sign_change->second, width, cfg.level);
}

enum class growth_regime { long_interval, short_interval };  // [T^{3/4}, T] or [T, 2T]

struct growth_options {
  growth_regime regime = growth_regime::long_interval;
  double epsilon = 0.1;
  bool with_ledger = true;
  scan_config scan;
  quadrature_config quad;
  /// Builds the resonator for one T; empty means no ledger.
  std::function<resonator_poly(double)> resonator;
};

struct growth_row {
  extreme_record record;
  std::optional<moment_ledger_result> ledger;
  bool below_ivic_plus = false;
  bool below_ivic_minus = false;
  double ratio_plus = 0.0;   // max_plus / A
  double ratio_minus = 0.0;  // max_minus / A
};

inline std::vector<growth_row> growth_curve(std::span<const double> T_list, const growth_options& opt) {
  for (std::size_t i = 1; i < T_list.size(); ++i) {
    if (!(T_list[i] > T_list[i - 1])) throw error(error_kind::invalid_params, "T list must be increasing");
  }
  std::vector<growth_row> rows;
  for (double T : T_list) {
    const bool long_iv = opt.regime == growth_regime::long_interval;
    const double lo = long_iv ? std::pow(T, 0.75) : T;
    const double hi = long_iv ? T : 2.0 * T;
    growth_row row;
    row.record = scan_extremes(lo, hi, opt.scan);
    row.record.T = T;
    row.record.envelope_A = long_iv ? envelope_A(T, opt.epsilon) : envelope_A_short(T, opt.epsilon);
    row.record.envelope_ivic = ivic_floor(T);
    if (opt.with_ledger && opt.resonator && long_iv) {
      const resonator_poly poly = opt.resonator(T);
      row.ledger = moment_ledger(T, poly, opt.quad, opt.epsilon);
      row.record.certified_lower_plus = row.ledger->bound_plus;
      row.record.certified_lower_minus = row.ledger->bound_minus;
    }
    row.below_ivic_plus = row.record.max_plus < row.record.envelope_ivic;
    row.below_ivic_minus = row.record.max_minus < row.record.envelope_ivic;
    row.ratio_plus = row.record.max_plus / row.record.envelope_A;
    row.ratio_minus = row.record.max_minus / row.record.envelope_A;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace hardyz
