#pragma once

// Batched evaluation of Dirichlet sums S(t) = sum_i w_i exp(-i t lambda_i) on
// regular panel grids t = a + (p + x_k) h, p = 0..P-1, k = 0..K-1.
//
// Per block the base phasors w_i exp(-i a lambda_i) are seeded with
// double-double phase reduction; moving between panels is one complex
// multiply by exp(-i h lambda_i), and node k inside a panel is an inner
// product with exp(-i x_k h lambda_i). The recurrence drifts by about one ulp
// per panel, so blocks stay short (tens to a few thousand panels).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <thread>
#include <vector>

#if defined(__AVX512F__)
#include <immintrin.h>
#endif

#include "hardyz/double_double.hpp"
#include "hardyz/resonator.hpp"
#include "hardyz/special.hpp"
#include "hardyz/zeta_core.hpp"

namespace hardyz {

struct term_set {
  std::vector<double> weight;
  std::vector<dd::dd_real> log;

  std::size_t size() const { return weight.size(); }

  /// n^(-1/2), log n for n = 1..count.
  static term_set riemann_siegel(std::uint64_t count) {
    term_set ts;
    ts.weight.reserve(count);
    ts.log.reserve(count);
    for (std::uint64_t n = 1; n <= count; ++n) {
      ts.weight.push_back(1.0 / std::sqrt(static_cast<double>(n)));
      ts.log.push_back(log_dd(n));
    }
    return ts;
  }

  static term_set resonator(const resonator_poly& poly) {
    term_set ts;
    for (std::size_t j = 0; j < poly.size(); ++j) {
      ts.weight.push_back(poly.r[j]);
      ts.log.push_back(log_dd(poly.m[j]));
    }
    return ts;
  }
};

class phasor_kernel {
 public:
  /// Precompute panel and node rotations for the first `count` terms.
  void prepare(const term_set& terms, std::size_t count, double h, std::span<const double> offsets) {
    terms_ = &terms;
    count_ = std::min(count, terms.size());
    k_ = offsets.size();
    padded_ = (count_ + 7) / 8 * 8;  // zero lanes contribute nothing
    pr_.assign(padded_, 0.0);
    pi_.assign(padded_, 0.0);
    qr_.assign(k_ * padded_, 0.0);
    qi_.assign(k_ * padded_, 0.0);
    zr_.assign(padded_, 0.0);
    zi_.assign(padded_, 0.0);
    for (std::size_t i = 0; i < count_; ++i) {
      const double lam = terms.log[i].hi + terms.log[i].lo;
      const double step = h * lam;
      pr_[i] = std::cos(step);
      pi_[i] = -std::sin(step);
      for (std::size_t k = 0; k < k_; ++k) {
        const double ph = offsets[k] * h * lam;
        qr_[k * padded_ + i] = std::cos(ph);
        qi_[k * padded_ + i] = -std::sin(ph);
      }
    }
  }

  std::size_t count() const { return count_; }

  /// Fill out[p*K + k] with S(a + (p + x_k) h).
  void evaluate(double a, std::size_t panels, std::span<std::complex<double>> out) {
    for (std::size_t i = 0; i < count_; ++i) {
      const double ph = dd::reduce_two_pi(terms_->log[i] * a);
      zr_[i] = terms_->weight[i] * std::cos(ph);
      zi_[i] = -terms_->weight[i] * std::sin(ph);
    }
    std::fill(out.begin(), out.begin() + panels * k_, std::complex<double>{});
    // Terms are processed in tiles small enough that the node rotations of a
    // tile stay in L1 while all panels of the block sweep over it.
    for (std::size_t i0 = 0; i0 < padded_; i0 += tile) {
      const std::size_t i1 = std::min(padded_, i0 + tile);
      for (std::size_t p = 0; p < panels; ++p) {
        if (k_ == 8) {
          node_sums<8>(p, i0, i1, out);
        } else if (k_ == 1) {
          node_sums<1>(p, i0, i1, out);
        } else {
          node_sums_any(p, i0, i1, out);
        }
        advance(i0, i1);
      }
    }
  }

 private:
  static constexpr std::size_t tile = 256;

  void advance(std::size_t i0, std::size_t i1) {
    double* zr = zr_.data();
    double* zi = zi_.data();
    const double* pr = pr_.data();
    const double* pi = pi_.data();
#pragma omp simd
    for (std::size_t i = i0; i < i1; ++i) {
      const double re = std::fma(zr[i], pr[i], -zi[i] * pi[i]);
      const double im = std::fma(zr[i], pi[i], zi[i] * pr[i]);
      zr[i] = re;
      zi[i] = im;
    }
  }

  void node_sums_any(std::size_t p, std::size_t i0, std::size_t i1, std::span<std::complex<double>> out) const {
    const double* zr = zr_.data();
    const double* zi = zi_.data();
    for (std::size_t k = 0; k < k_; ++k) {
      const double* qr = qr_.data() + k * padded_;
      const double* qi = qi_.data() + k * padded_;
      double sr = 0.0;
      double si = 0.0;
#pragma omp simd reduction(+ : sr, si)
      for (std::size_t i = i0; i < i1; ++i) {
        sr += std::fma(zr[i], qr[i], -zi[i] * qi[i]);
        si += std::fma(zr[i], qi[i], zi[i] * qr[i]);
      }
      out[p * k_ + k] += std::complex<double>{sr, si};
    }
  }

  // All K node sums in one pass so z is read once per panel.
  template <std::size_t K>
  void node_sums(std::size_t p, std::size_t i0, std::size_t i1, std::span<std::complex<double>> out) const {
    const std::size_t n = padded_;
    const double* zr = zr_.data();
    const double* zi = zi_.data();
    double sr[K] = {};
    double si[K] = {};
#if defined(__AVX512F__)
    __m512d ar[K], ai[K];
    for (std::size_t k = 0; k < K; ++k) ar[k] = ai[k] = _mm512_setzero_pd();
    for (std::size_t i = i0; i < i1; i += 8) {
      const __m512d a = _mm512_loadu_pd(zr + i);
      const __m512d b = _mm512_loadu_pd(zi + i);
      for (std::size_t k = 0; k < K; ++k) {
        const __m512d c = _mm512_loadu_pd(qr_.data() + k * n + i);
        const __m512d d = _mm512_loadu_pd(qi_.data() + k * n + i);
        ar[k] = _mm512_fnmadd_pd(b, d, _mm512_fmadd_pd(a, c, ar[k]));
        ai[k] = _mm512_fmadd_pd(b, c, _mm512_fmadd_pd(a, d, ai[k]));
      }
    }
    for (std::size_t k = 0; k < K; ++k) {
      sr[k] = _mm512_reduce_add_pd(ar[k]);
      si[k] = _mm512_reduce_add_pd(ai[k]);
    }
#else
    for (std::size_t i = i0; i < i1; ++i) {
      const double a = zr[i];
      const double b = zi[i];
      for (std::size_t k = 0; k < K; ++k) {
        const double c = qr_[k * n + i];
        const double d = qi_[k * n + i];
        sr[k] = std::fma(-b, d, std::fma(a, c, sr[k]));
        si[k] = std::fma(b, c, std::fma(a, d, si[k]));
      }
    }
#endif
    for (std::size_t k = 0; k < K; ++k) out[p * K + k] += std::complex<double>{sr[k], si[k]};
  }

  const term_set* terms_ = nullptr;
  std::size_t count_ = 0;
  std::size_t padded_ = 0;
  std::size_t k_ = 0;
  std::vector<double> pr_, pi_, qr_, qi_, zr_, zi_;
};

/// theta(a + delta) given theta(a) reduced, without cancellation in
/// (t/2) log(t/2pi) - (a/2) log(a/2pi). `corr_a` is theta_corrections(a).
inline double theta_shifted(double a, double theta_a_reduced, double corr_a, double delta) {
  const double t = a + delta;
  const double main = 0.5 * delta * std::log(t * (1.0 / (2.0 * M_PI))) + 0.5 * a * std::log1p(delta / a) - 0.5 * delta;
  return theta_a_reduced + main + (theta_corrections(t) - corr_a);
}

inline double theta_shifted(double a, double theta_a_reduced, double delta) {
  return theta_shifted(a, theta_a_reduced, theta_corrections(a), delta);
}

/// Upper end of each run of constant main-sum length floor(sqrt(t/2pi)).
inline std::vector<double> rs_breakpoints(double lo, double hi) {
  std::vector<double> cuts{lo};
  for (std::uint64_t n = rs_term_count(lo) + 1;; ++n) {
    const double b = 2.0 * M_PI * static_cast<double>(n) * static_cast<double>(n);
    if (b >= hi) break;
    if (b > lo) cuts.push_back(b);
  }
  cuts.push_back(hi);
  return cuts;
}

/// One contiguous run of equally sized panels with a fixed main-sum length.
struct panel_segment {
  double lo = 0.0;
  double h = 0.0;
  std::size_t panels = 0;
  std::uint64_t n_terms = 0;
};

/// A block of consecutive panels inside one segment.
struct panel_block {
  std::size_t segment = 0;
  std::size_t first_panel = 0;
  std::size_t panels = 0;
};

inline std::vector<panel_block> split_blocks(std::span<const panel_segment> segments, std::size_t block_panels) {
  std::vector<panel_block> blocks;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    for (std::size_t p = 0; p < segments[s].panels; p += block_panels) {
      blocks.push_back({s, p, std::min(block_panels, segments[s].panels - p)});
    }
  }
  return blocks;
}

inline unsigned resolve_workers(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Run fn(worker_state, index) over [0, count) on contiguous index ranges,
/// one range per worker. Results must be written to caller-owned slots by
/// index so the outcome does not depend on the worker count.
template <class State, class Fn>
void parallel_for_blocks(std::size_t count, unsigned workers, Fn fn) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  auto run = [&](std::size_t begin, std::size_t end) {
    State state;
    for (std::size_t i = begin; i < end; ++i) fn(state, i);
  };
  if (workers == 1) {
    run(0, count);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = count * w / workers;
    const std::size_t end = count * (w + 1) / workers;
    pool.emplace_back([&, w, begin, end] {
      try {
        run(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Per-worker scratch for Z and R evaluation over panel blocks.
struct z_block_state {
  phasor_kernel z_kernel;
  phasor_kernel r_kernel;
  std::size_t prepared_segment = static_cast<std::size_t>(-1);
  std::vector<std::complex<double>> z_sums;
  std::vector<std::complex<double>> r_sums;
};

struct node_values {
  std::vector<double> t;
  std::vector<double> z;       // Z(t), main sum with corrections
  std::vector<double> theta;   // theta(t), reduced
  std::vector<double> abs_r2;  // |R(t)|^2, or 1 without a resonator
};

/// Evaluate Z (and |R|^2) at every node of one block. `z_terms` must cover
/// the segment's main-sum length; `r_terms` may be null.
inline void evaluate_block_nodes(z_block_state& st, std::span<const panel_segment> segments, const panel_block& blk,
                                 std::span<const double> offsets, const term_set& z_terms, const term_set* r_terms,
                                 bool need_z, correction_level level, node_values& out) {
  const panel_segment& seg = segments[blk.segment];
  const std::size_t k = offsets.size();
  if (st.prepared_segment != blk.segment) {
    if (need_z) st.z_kernel.prepare(z_terms, seg.n_terms, seg.h, offsets);
    if (r_terms) st.r_kernel.prepare(*r_terms, r_terms->size(), seg.h, offsets);
    st.prepared_segment = blk.segment;
  }
  const double a = seg.lo + static_cast<double>(blk.first_panel) * seg.h;
  const std::size_t nodes = blk.panels * k;
  out.t.resize(nodes);
  out.z.assign(nodes, 0.0);
  out.theta.assign(nodes, 0.0);
  out.abs_r2.assign(nodes, 1.0);

  if (need_z) {
    st.z_sums.resize(nodes);
    st.z_kernel.evaluate(a, blk.panels, st.z_sums);
  }
  if (r_terms) {
    st.r_sums.resize(nodes);
    st.r_kernel.evaluate(a, blk.panels, st.r_sums);
  }
  const double theta_a = need_z ? theta_reduced(a) : 0.0;
  const double corr_a = need_z ? theta_corrections(a) : 0.0;
  for (std::size_t p = 0; p < blk.panels; ++p) {
    for (std::size_t q = 0; q < k; ++q) {
      const std::size_t idx = p * k + q;
      const double delta = (static_cast<double>(p) + offsets[q]) * seg.h;
      const double t = a + delta;
      out.t[idx] = t;
      if (need_z) {
        const double th = theta_shifted(a, theta_a, corr_a, delta);
        const std::complex<double> s = st.z_sums[idx];
        double z = 2.0 * (std::cos(th) * s.real() - std::sin(th) * s.imag());
        if (level == correction_level::first) z += rs_correction(t, seg.n_terms);
        out.z[idx] = z;
        out.theta[idx] = th;
      }
      if (r_terms) out.abs_r2[idx] = std::norm(st.r_sums[idx]);
    }
  }
}

}  // namespace hardyz
