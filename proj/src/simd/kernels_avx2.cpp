#include "osmosis/simd/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)

#include <immintrin.h>

#include <cfloat>
#include <cmath>

// AVX2 variants of the data-parallel kernels. Multiplies and adds are kept
// separate (no FMA) and in the same order as the scalar reference, so the
// apply/factor/solve kernels are bit-identical to it per element; only the
// reductions differ, by lane association.
//
// The blocked Thomas factor/solve stay on the scalar code path: the
// recurrence is sequential inside each contiguous block, which leaves
// nothing to vectorise. Their interleaved twins carry the SIMD work.

namespace osmosis::kernels {
namespace {

__attribute__((target("avx2"))) inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s2 = _mm_add_pd(lo, hi);
  const __m128d s1 = _mm_add_sd(s2, _mm_unpackhi_pd(s2, s2));
  return _mm_cvtsd_f64(s1);
}

__attribute__((target("avx2"))) double sum_avx2(const double* x,
                                                std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double r = hsum(acc);
  for (; i < n; ++i) r += x[i];
  return r;
}

__attribute__((target("avx2"))) double dot_avx2(const double* x,
                                                const double* y,
                                                std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_add_pd(
        acc, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  double r = hsum(acc);
  for (; i < n; ++i) r += x[i] * y[i];
  return r;
}

__attribute__((target("avx2"))) double sum_sq_diff_avx2(const double* x,
                                                        const double* y,
                                                        std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d =
        _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  double r = hsum(acc);
  for (; i < n; ++i) {
    const double d = x[i] - y[i];
    r += d * d;
  }
  return r;
}

__attribute__((target("avx2"))) double min_value_avx2(const double* x,
                                                      std::size_t n) {
  if (n < 8) {
    double m = x[0];
    for (std::size_t i = 1; i < n; ++i) m = x[i] < m ? x[i] : m;
    return m;
  }
  __m256d acc = _mm256_loadu_pd(x);
  std::size_t i = 4;
  for (; i + 4 <= n; i += 4) acc = _mm256_min_pd(acc, _mm256_loadu_pd(x + i));
  const __m128d lo = _mm256_castpd256_pd128(acc);
  const __m128d hi = _mm256_extractf128_pd(acc, 1);
  const __m128d m2 = _mm_min_pd(lo, hi);
  double m = _mm_cvtsd_f64(_mm_min_sd(m2, _mm_unpackhi_pd(m2, m2)));
  for (; i < n; ++i) m = x[i] < m ? x[i] : m;
  return m;
}

__attribute__((target("avx2"))) bool all_finite_avx2(const double* x,
                                                     std::size_t n) {
  const __m256d abs_mask = _mm256_set1_pd(-0.0);
  const __m256d dbl_max = _mm256_set1_pd(DBL_MAX);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_andnot_pd(abs_mask, _mm256_loadu_pd(x + i));
    const __m256d ok = _mm256_cmp_pd(a, dbl_max, _CMP_LE_OQ);
    if (_mm256_movemask_pd(ok) != 0xF) return false;
  }
  for (; i < n; ++i)
    if (!std::isfinite(x[i])) return false;
  return true;
}

__attribute__((target("avx2"))) void axpy_avx2(double a, const double* x,
                                               double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(
        y + i, _mm256_add_pd(_mm256_loadu_pd(y + i),
                             _mm256_mul_pd(va, _mm256_loadu_pd(x + i))));
  for (; i < n; ++i) y[i] += a * x[i];
}

__attribute__((target("avx2"))) void add_scaled_avx2(const double* x, double a,
                                                     const double* w,
                                                     double* out,
                                                     std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(
        out + i, _mm256_add_pd(_mm256_loadu_pd(x + i),
                               _mm256_mul_pd(va, _mm256_loadu_pd(w + i))));
  for (; i < n; ++i) out[i] = x[i] + a * w[i];
}

__attribute__((target("avx2"))) void add_scaled_sum_avx2(
    const double* x, double a, const double* w1, const double* w2, double* out,
    std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d w =
        _mm256_add_pd(_mm256_loadu_pd(w1 + i), _mm256_loadu_pd(w2 + i));
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(x + i),
                                            _mm256_mul_pd(va, w)));
  }
  for (; i < n; ++i) out[i] = x[i] + a * (w1[i] + w2[i]);
}

// (lo*xm + di*xc) + hi*xp, matching scalar associativity.
__attribute__((target("avx2"))) inline __m256d stencil3(__m256d lo, __m256d di,
                                                        __m256d hi, __m256d xm,
                                                        __m256d xc,
                                                        __m256d xp) {
  return _mm256_add_pd(
      _mm256_add_pd(_mm256_mul_pd(lo, xm), _mm256_mul_pd(di, xc)),
      _mm256_mul_pd(hi, xp));
}

__attribute__((target("avx2"))) void tridiag_apply_blocked_avx2(
    std::size_t blocks, std::size_t m, const double* lo, const double* di,
    const double* hi, const double* x, double* y) {
  const std::size_t n = blocks * m;
  if (n == 0) return;
  if (n == 1) {
    y[0] = di[0] * x[0];
    return;
  }
  y[0] = di[0] * x[0] + hi[0] * x[1];
  std::size_t i = 1;
  for (; i + 4 < n; i += 4) {
    const __m256d r = stencil3(_mm256_loadu_pd(lo + i), _mm256_loadu_pd(di + i),
                               _mm256_loadu_pd(hi + i), _mm256_loadu_pd(x + i - 1),
                               _mm256_loadu_pd(x + i), _mm256_loadu_pd(x + i + 1));
    _mm256_storeu_pd(y + i, r);
  }
  for (; i + 1 < n; ++i)
    y[i] = (lo[i] * x[i - 1] + di[i] * x[i]) + hi[i] * x[i + 1];
  y[n - 1] = lo[n - 1] * x[n - 2] + di[n - 1] * x[n - 1];
}

__attribute__((target("avx2"))) void tridiag_apply_interleaved_avx2(
    std::size_t systems, std::size_t m, const double* lo, const double* di,
    const double* hi, const double* x, double* y) {
  if (systems == 0 || m == 0) return;
  if (m == 1) {
    for (std::size_t s = 0; s < systems; ++s) y[s] = di[s] * x[s];
    return;
  }
  std::size_t s = 0;
  for (; s + 4 <= systems; s += 4) {
    const __m256d r = _mm256_add_pd(
        _mm256_mul_pd(_mm256_loadu_pd(di + s), _mm256_loadu_pd(x + s)),
        _mm256_mul_pd(_mm256_loadu_pd(hi + s),
                      _mm256_loadu_pd(x + systems + s)));
    _mm256_storeu_pd(y + s, r);
  }
  for (; s < systems; ++s) y[s] = di[s] * x[s] + hi[s] * x[systems + s];
  for (std::size_t r = 1; r + 1 < m; ++r) {
    const std::size_t o = r * systems;
    s = 0;
    for (; s + 4 <= systems; s += 4) {
      const std::size_t i = o + s;
      const __m256d v = stencil3(
          _mm256_loadu_pd(lo + i), _mm256_loadu_pd(di + i),
          _mm256_loadu_pd(hi + i), _mm256_loadu_pd(x + i - systems),
          _mm256_loadu_pd(x + i), _mm256_loadu_pd(x + i + systems));
      _mm256_storeu_pd(y + i, v);
    }
    for (; s < systems; ++s) {
      const std::size_t i = o + s;
      y[i] = (lo[i] * x[i - systems] + di[i] * x[i]) + hi[i] * x[i + systems];
    }
  }
  const std::size_t o = (m - 1) * systems;
  s = 0;
  for (; s + 4 <= systems; s += 4) {
    const std::size_t i = o + s;
    const __m256d r = _mm256_add_pd(
        _mm256_mul_pd(_mm256_loadu_pd(lo + i),
                      _mm256_loadu_pd(x + i - systems)),
        _mm256_mul_pd(_mm256_loadu_pd(di + i), _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(y + i, r);
  }
  for (; s < systems; ++s) {
    const std::size_t i = o + s;
    y[i] = lo[i] * x[i - systems] + di[i] * x[i];
  }
}

__attribute__((target("avx2"))) void thomas_factor_interleaved_avx2(
    std::size_t systems, std::size_t m, double c, const double* lo,
    const double* di, const double* hi, double* lower, double* diag,
    double* inv_diag, double* upper) {
  const __m256d vc = _mm256_set1_pd(c);
  const __m256d vnc = _mm256_set1_pd(-c);
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t s = 0;
  for (; s + 4 <= systems; s += 4) {
    _mm256_storeu_pd(lower + s, _mm256_setzero_pd());
    const __m256d d =
        _mm256_sub_pd(one, _mm256_mul_pd(vc, _mm256_loadu_pd(di + s)));
    _mm256_storeu_pd(diag + s, d);
    _mm256_storeu_pd(inv_diag + s, _mm256_div_pd(one, d));
    _mm256_storeu_pd(upper + s, _mm256_mul_pd(vnc, _mm256_loadu_pd(hi + s)));
  }
  for (; s < systems; ++s) {
    lower[s] = 0.0;
    diag[s] = 1.0 - c * di[s];
    inv_diag[s] = 1.0 / diag[s];
    upper[s] = -c * hi[s];
  }
  for (std::size_t r = 1; r < m; ++r) {
    const std::size_t o = r * systems;
    s = 0;
    for (; s + 4 <= systems; s += 4) {
      const std::size_t i = o + s;
      const __m256d l =
          _mm256_mul_pd(_mm256_mul_pd(vnc, _mm256_loadu_pd(lo + i)),
                        _mm256_loadu_pd(inv_diag + i - systems));
      _mm256_storeu_pd(lower + i, l);
      const __m256d d = _mm256_sub_pd(
          _mm256_sub_pd(one, _mm256_mul_pd(vc, _mm256_loadu_pd(di + i))),
          _mm256_mul_pd(l, _mm256_loadu_pd(upper + i - systems)));
      _mm256_storeu_pd(diag + i, d);
      _mm256_storeu_pd(inv_diag + i, _mm256_div_pd(one, d));
      _mm256_storeu_pd(upper + i, _mm256_mul_pd(vnc, _mm256_loadu_pd(hi + i)));
    }
    for (; s < systems; ++s) {
      const std::size_t i = o + s;
      const double l = (-c * lo[i]) * inv_diag[i - systems];
      lower[i] = l;
      diag[i] = (1.0 - c * di[i]) - l * upper[i - systems];
      inv_diag[i] = 1.0 / diag[i];
      upper[i] = -c * hi[i];
    }
  }
}

__attribute__((target("avx2"))) void thomas_solve_interleaved_avx2(
    std::size_t systems, std::size_t m, const double* lower,
    const double* inv_diag, const double* upper, double* x) {
  for (std::size_t r = 1; r < m; ++r) {
    const std::size_t o = r * systems;
    std::size_t s = 0;
    for (; s + 4 <= systems; s += 4) {
      const std::size_t i = o + s;
      const __m256d v =
          _mm256_sub_pd(_mm256_loadu_pd(x + i),
                        _mm256_mul_pd(_mm256_loadu_pd(lower + i),
                                      _mm256_loadu_pd(x + i - systems)));
      _mm256_storeu_pd(x + i, v);
    }
    for (; s < systems; ++s)
      x[o + s] = x[o + s] - lower[o + s] * x[o - systems + s];
  }
  {
    const std::size_t o = (m - 1) * systems;
    std::size_t s = 0;
    for (; s + 4 <= systems; s += 4) {
      const std::size_t i = o + s;
      _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i),
                                            _mm256_loadu_pd(inv_diag + i)));
    }
    for (; s < systems; ++s) x[o + s] = x[o + s] * inv_diag[o + s];
  }
  for (std::size_t r = m - 1; r-- > 0;) {
    const std::size_t o = r * systems;
    std::size_t s = 0;
    for (; s + 4 <= systems; s += 4) {
      const std::size_t i = o + s;
      const __m256d v = _mm256_mul_pd(
          _mm256_sub_pd(_mm256_loadu_pd(x + i),
                        _mm256_mul_pd(_mm256_loadu_pd(upper + i),
                                      _mm256_loadu_pd(x + i + systems))),
          _mm256_loadu_pd(inv_diag + i));
      _mm256_storeu_pd(x + i, v);
    }
    for (; s < systems; ++s)
      x[o + s] =
          (x[o + s] - upper[o + s] * x[o + systems + s]) * inv_diag[o + s];
  }
}

}  // namespace

const Ops* avx2_ops() {
  if (!__builtin_cpu_supports("avx2")) return nullptr;
  static const Ops table = [] {
    Ops t = scalar_ops();  // blocked Thomas factor/solve stay sequential
    t.name = "avx2";
    t.sum = sum_avx2;
    t.dot = dot_avx2;
    t.sum_sq_diff = sum_sq_diff_avx2;
    t.min_value = min_value_avx2;
    t.all_finite = all_finite_avx2;
    t.axpy = axpy_avx2;
    t.add_scaled = add_scaled_avx2;
    t.add_scaled_sum = add_scaled_sum_avx2;
    t.tridiag_apply_blocked = tridiag_apply_blocked_avx2;
    t.tridiag_apply_interleaved = tridiag_apply_interleaved_avx2;
    t.thomas_factor_interleaved = thomas_factor_interleaved_avx2;
    t.thomas_solve_interleaved = thomas_solve_interleaved_avx2;
    return t;
  }();
  return &table;
}

}  // namespace osmosis::kernels

#else

namespace osmosis::kernels {
const Ops* avx2_ops() { return nullptr; }
}  // namespace osmosis::kernels

#endif
