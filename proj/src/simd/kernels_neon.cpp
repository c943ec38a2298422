#include "osmosis/simd/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cfloat>
#include <cmath>

// NEON variants, two lanes of f64. Same operation order as the scalar
// reference (separate multiply and add), so apply/factor/solve results are
// bit-identical to it; reductions differ by lane association. NEON is part
// of the aarch64 baseline, so no runtime capability check is needed.

namespace osmosis::kernels {
namespace {

inline double hsum2(float64x2_t v) {
  return vgetq_lane_f64(v, 0) + vgetq_lane_f64(v, 1);
}

double sum_neon(const double* x, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(x + i));
  double r = hsum2(acc);
  for (; i < n; ++i) r += x[i];
  return r;
}

double dot_neon(const double* x, const double* y, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    acc = vaddq_f64(acc, vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
  double r = hsum2(acc);
  for (; i < n; ++i) r += x[i] * y[i];
  return r;
}

double sum_sq_diff_neon(const double* x, const double* y, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(x + i), vld1q_f64(y + i));
    acc = vaddq_f64(acc, vmulq_f64(d, d));
  }
  double r = hsum2(acc);
  for (; i < n; ++i) {
    const double d = x[i] - y[i];
    r += d * d;
  }
  return r;
}

double min_value_neon(const double* x, std::size_t n) {
  if (n < 4) {
    double m = x[0];
    for (std::size_t i = 1; i < n; ++i) m = x[i] < m ? x[i] : m;
    return m;
  }
  float64x2_t acc = vld1q_f64(x);
  std::size_t i = 2;
  for (; i + 2 <= n; i += 2) acc = vminq_f64(acc, vld1q_f64(x + i));
  const double a = vgetq_lane_f64(acc, 0);
  const double b = vgetq_lane_f64(acc, 1);
  double m = b < a ? b : a;
  for (; i < n; ++i) m = x[i] < m ? x[i] : m;
  return m;
}

bool all_finite_neon(const double* x, std::size_t n) {
  const float64x2_t dbl_max = vdupq_n_f64(DBL_MAX);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const uint64x2_t ok = vcleq_f64(vabsq_f64(vld1q_f64(x + i)), dbl_max);
    if (vgetq_lane_u64(ok, 0) == 0 || vgetq_lane_u64(ok, 1) == 0) return false;
  }
  for (; i < n; ++i)
    if (!std::isfinite(x[i])) return false;
  return true;
}

void axpy_neon(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(y + i,
              vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
  for (; i < n; ++i) y[i] += a * x[i];
}

void add_scaled_neon(const double* x, double a, const double* w, double* out,
                     std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(out + i,
              vaddq_f64(vld1q_f64(x + i), vmulq_f64(va, vld1q_f64(w + i))));
  for (; i < n; ++i) out[i] = x[i] + a * w[i];
}

void add_scaled_sum_neon(const double* x, double a, const double* w1,
                         const double* w2, double* out, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t w = vaddq_f64(vld1q_f64(w1 + i), vld1q_f64(w2 + i));
    vst1q_f64(out + i, vaddq_f64(vld1q_f64(x + i), vmulq_f64(va, w)));
  }
  for (; i < n; ++i) out[i] = x[i] + a * (w1[i] + w2[i]);
}

inline float64x2_t stencil3(float64x2_t lo, float64x2_t di, float64x2_t hi,
                            float64x2_t xm, float64x2_t xc, float64x2_t xp) {
  return vaddq_f64(vaddq_f64(vmulq_f64(lo, xm), vmulq_f64(di, xc)),
                   vmulq_f64(hi, xp));
}

void tridiag_apply_blocked_neon(std::size_t blocks, std::size_t m,
                                const double* lo, const double* di,
                                const double* hi, const double* x, double* y) {
  const std::size_t n = blocks * m;
  if (n == 0) return;
  if (n == 1) {
    y[0] = di[0] * x[0];
    return;
  }
  y[0] = di[0] * x[0] + hi[0] * x[1];
  std::size_t i = 1;
  for (; i + 2 < n; i += 2) {
    const float64x2_t r =
        stencil3(vld1q_f64(lo + i), vld1q_f64(di + i), vld1q_f64(hi + i),
                 vld1q_f64(x + i - 1), vld1q_f64(x + i), vld1q_f64(x + i + 1));
    vst1q_f64(y + i, r);
  }
  for (; i + 1 < n; ++i)
    y[i] = (lo[i] * x[i - 1] + di[i] * x[i]) + hi[i] * x[i + 1];
  y[n - 1] = lo[n - 1] * x[n - 2] + di[n - 1] * x[n - 1];
}

void tridiag_apply_interleaved_neon(std::size_t systems, std::size_t m,
                                    const double* lo, const double* di,
                                    const double* hi, const double* x,
                                    double* y) {
  if (systems == 0 || m == 0) return;
  if (m == 1) {
    for (std::size_t s = 0; s < systems; ++s) y[s] = di[s] * x[s];
    return;
  }
  std::size_t s = 0;
  for (; s + 2 <= systems; s += 2) {
    const float64x2_t r =
        vaddq_f64(vmulq_f64(vld1q_f64(di + s), vld1q_f64(x + s)),
                  vmulq_f64(vld1q_f64(hi + s), vld1q_f64(x + systems + s)));
    vst1q_f64(y + s, r);
  }
  for (; s < systems; ++s) y[s] = di[s] * x[s] + hi[s] * x[systems + s];
  for (std::size_t r = 1; r + 1 < m; ++r) {
    const std::size_t o = r * systems;
    s = 0;
    for (; s + 2 <= systems; s += 2) {
      const std::size_t i = o + s;
      const float64x2_t v =
          stencil3(vld1q_f64(lo + i), vld1q_f64(di + i), vld1q_f64(hi + i),
                   vld1q_f64(x + i - systems), vld1q_f64(x + i),
                   vld1q_f64(x + i + systems));
      vst1q_f64(y + i, v);
    }
    for (; s < systems; ++s) {
      const std::size_t i = o + s;
      y[i] = (lo[i] * x[i - systems] + di[i] * x[i]) + hi[i] * x[i + systems];
    }
  }
  const std::size_t o = (m - 1) * systems;
  s = 0;
  for (; s + 2 <= systems; s += 2) {
    const std::size_t i = o + s;
    const float64x2_t r =
        vaddq_f64(vmulq_f64(vld1q_f64(lo + i), vld1q_f64(x + i - systems)),
                  vmulq_f64(vld1q_f64(di + i), vld1q_f64(x + i)));
    vst1q_f64(y + i, r);
  }
  for (; s < systems; ++s) {
    const std::size_t i = o + s;
    y[i] = lo[i] * x[i - systems] + di[i] * x[i];
  }
}

void thomas_factor_interleaved_neon(std::size_t systems, std::size_t m,
                                    double c, const double* lo,
                                    const double* di, const double* hi,
                                    double* lower, double* diag,
                                    double* inv_diag, double* upper) {
  const float64x2_t vc = vdupq_n_f64(c);
  const float64x2_t vnc = vdupq_n_f64(-c);
  const float64x2_t one = vdupq_n_f64(1.0);
  std::size_t s = 0;
  for (; s + 2 <= systems; s += 2) {
    vst1q_f64(lower + s, vdupq_n_f64(0.0));
    const float64x2_t d = vsubq_f64(one, vmulq_f64(vc, vld1q_f64(di + s)));
    vst1q_f64(diag + s, d);
    vst1q_f64(inv_diag + s, vdivq_f64(one, d));
    vst1q_f64(upper + s, vmulq_f64(vnc, vld1q_f64(hi + s)));
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
    for (; s + 2 <= systems; s += 2) {
      const std::size_t i = o + s;
      const float64x2_t l = vmulq_f64(vmulq_f64(vnc, vld1q_f64(lo + i)),
                                      vld1q_f64(inv_diag + i - systems));
      vst1q_f64(lower + i, l);
      const float64x2_t d =
          vsubq_f64(vsubq_f64(one, vmulq_f64(vc, vld1q_f64(di + i))),
                    vmulq_f64(l, vld1q_f64(upper + i - systems)));
      vst1q_f64(diag + i, d);
      vst1q_f64(inv_diag + i, vdivq_f64(one, d));
      vst1q_f64(upper + i, vmulq_f64(vnc, vld1q_f64(hi + i)));
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

void thomas_solve_interleaved_neon(std::size_t systems, std::size_t m,
                                   const double* lower, const double* inv_diag,
                                   const double* upper, double* x) {
  for (std::size_t r = 1; r < m; ++r) {
    const std::size_t o = r * systems;
    std::size_t s = 0;
    for (; s + 2 <= systems; s += 2) {
      const std::size_t i = o + s;
      const float64x2_t v =
          vsubq_f64(vld1q_f64(x + i), vmulq_f64(vld1q_f64(lower + i),
                                                vld1q_f64(x + i - systems)));
      vst1q_f64(x + i, v);
    }
    for (; s < systems; ++s)
      x[o + s] = x[o + s] - lower[o + s] * x[o - systems + s];
  }
  {
    const std::size_t o = (m - 1) * systems;
    std::size_t s = 0;
    for (; s + 2 <= systems; s += 2) {
      const std::size_t i = o + s;
      vst1q_f64(x + i, vmulq_f64(vld1q_f64(x + i), vld1q_f64(inv_diag + i)));
    }
    for (; s < systems; ++s) x[o + s] = x[o + s] * inv_diag[o + s];
  }
  for (std::size_t r = m - 1; r-- > 0;) {
    const std::size_t o = r * systems;
    std::size_t s = 0;
    for (; s + 2 <= systems; s += 2) {
      const std::size_t i = o + s;
      const float64x2_t v =
          vmulq_f64(vsubq_f64(vld1q_f64(x + i),
                              vmulq_f64(vld1q_f64(upper + i),
                                        vld1q_f64(x + i + systems))),
                    vld1q_f64(inv_diag + i));
      vst1q_f64(x + i, v);
    }
    for (; s < systems; ++s)
      x[o + s] =
          (x[o + s] - upper[o + s] * x[o + systems + s]) * inv_diag[o + s];
  }
}

}  // namespace

const Ops* neon_ops() {
  static const Ops table = [] {
    Ops t = scalar_ops();  // blocked Thomas factor/solve stay sequential
    t.name = "neon";
    t.sum = sum_neon;
    t.dot = dot_neon;
    t.sum_sq_diff = sum_sq_diff_neon;
    t.min_value = min_value_neon;
    t.all_finite = all_finite_neon;
    t.axpy = axpy_neon;
    t.add_scaled = add_scaled_neon;
    t.add_scaled_sum = add_scaled_sum_neon;
    t.tridiag_apply_blocked = tridiag_apply_blocked_neon;
    t.tridiag_apply_interleaved = tridiag_apply_interleaved_neon;
    t.thomas_factor_interleaved = thomas_factor_interleaved_neon;
    t.thomas_solve_interleaved = thomas_solve_interleaved_neon;
    return t;
  }();
  return &table;
}

}  // namespace osmosis::kernels

#else

namespace osmosis::kernels {
const Ops* neon_ops() { return nullptr; }
}  // namespace osmosis::kernels

#endif
