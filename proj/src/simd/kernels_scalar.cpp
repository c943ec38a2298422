#include "osmosis/simd/kernels.hpp"

#include <cmath>

// Reference kernels. Plain loops, no FMA (the library is built with
// -ffp-contract=off), so every element follows the exact same operation
// chain as the SIMD variants.

namespace osmosis::kernels {
namespace {

double sum_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double sum_sq_diff_scalar(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - y[i];
    acc += d * d;
  }
  return acc;
}

double min_value_scalar(const double* x, std::size_t n) {
  double m = x[0];
  for (std::size_t i = 1; i < n; ++i) m = x[i] < m ? x[i] : m;
  return m;
}

bool all_finite_scalar(const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(x[i])) return false;
  return true;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void add_scaled_scalar(const double* x, double a, const double* w, double* out,
                       std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + a * w[i];
}

void add_scaled_sum_scalar(const double* x, double a, const double* w1,
                           const double* w2, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + a * (w1[i] + w2[i]);
}

// First and last element of the whole array are the only places where a
// neighbour load would leave the buffer; interior system boundaries read an
// in-bounds neighbour and multiply it by a stored zero coefficient.
void tridiag_apply_blocked_scalar(std::size_t blocks, std::size_t m,
                                  const double* lo, const double* di,
                                  const double* hi, const double* x,
                                  double* y) {
  const std::size_t n = blocks * m;
  if (n == 0) return;
  if (n == 1) {
    y[0] = di[0] * x[0];
    return;
  }
  y[0] = di[0] * x[0] + hi[0] * x[1];
  for (std::size_t i = 1; i + 1 < n; ++i)
    y[i] = (lo[i] * x[i - 1] + di[i] * x[i]) + hi[i] * x[i + 1];
  y[n - 1] = lo[n - 1] * x[n - 2] + di[n - 1] * x[n - 1];
}

void tridiag_apply_interleaved_scalar(std::size_t systems, std::size_t m,
                                      const double* lo, const double* di,
                                      const double* hi, const double* x,
                                      double* y) {
  if (systems == 0 || m == 0) return;
  if (m == 1) {
    for (std::size_t s = 0; s < systems; ++s) y[s] = di[s] * x[s];
    return;
  }
  for (std::size_t s = 0; s < systems; ++s)
    y[s] = di[s] * x[s] + hi[s] * x[systems + s];
  for (std::size_t r = 1; r + 1 < m; ++r) {
    const std::size_t o = r * systems;
    for (std::size_t s = 0; s < systems; ++s)
      y[o + s] = (lo[o + s] * x[o - systems + s] + di[o + s] * x[o + s]) +
                 hi[o + s] * x[o + systems + s];
  }
  const std::size_t o = (m - 1) * systems;
  for (std::size_t s = 0; s < systems; ++s)
    y[o + s] = lo[o + s] * x[o - systems + s] + di[o + s] * x[o + s];
}

void thomas_factor_blocked_scalar(std::size_t blocks, std::size_t m, double c,
                                  const double* lo, const double* di,
                                  const double* hi, double* lower,
                                  double* diag, double* inv_diag,
                                  double* upper) {
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t o = b * m;
    lower[o] = 0.0;
    diag[o] = 1.0 - c * di[o];
    inv_diag[o] = 1.0 / diag[o];
    upper[o] = -c * hi[o];
    for (std::size_t r = 1; r < m; ++r) {
      const std::size_t i = o + r;
      const double l = (-c * lo[i]) * inv_diag[i - 1];
      lower[i] = l;
      diag[i] = (1.0 - c * di[i]) - l * upper[i - 1];
      inv_diag[i] = 1.0 / diag[i];
      upper[i] = -c * hi[i];
    }
  }
}

void thomas_factor_interleaved_scalar(std::size_t systems, std::size_t m,
                                      double c, const double* lo,
                                      const double* di, const double* hi,
                                      double* lower, double* diag,
                                      double* inv_diag, double* upper) {
  for (std::size_t s = 0; s < systems; ++s) {
    lower[s] = 0.0;
    diag[s] = 1.0 - c * di[s];
    inv_diag[s] = 1.0 / diag[s];
    upper[s] = -c * hi[s];
  }
  for (std::size_t r = 1; r < m; ++r) {
    const std::size_t o = r * systems;
    for (std::size_t s = 0; s < systems; ++s) {
      const std::size_t i = o + s;
      const double l = (-c * lo[i]) * inv_diag[i - systems];
      lower[i] = l;
      diag[i] = (1.0 - c * di[i]) - l * upper[i - systems];
      inv_diag[i] = 1.0 / diag[i];
      upper[i] = -c * hi[i];
    }
  }
}

void thomas_solve_blocked_scalar(std::size_t blocks, std::size_t m,
                                 const double* lower, const double* inv_diag,
                                 const double* upper, double* x) {
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t o = b * m;
    for (std::size_t r = 1; r < m; ++r)
      x[o + r] = x[o + r] - lower[o + r] * x[o + r - 1];
    x[o + m - 1] = x[o + m - 1] * inv_diag[o + m - 1];
    for (std::size_t r = m - 1; r-- > 0;)
      x[o + r] = (x[o + r] - upper[o + r] * x[o + r + 1]) * inv_diag[o + r];
  }
}

void thomas_solve_interleaved_scalar(std::size_t systems, std::size_t m,
                                     const double* lower,
                                     const double* inv_diag,
                                     const double* upper, double* x) {
  for (std::size_t r = 1; r < m; ++r) {
    const std::size_t o = r * systems;
    for (std::size_t s = 0; s < systems; ++s)
      x[o + s] = x[o + s] - lower[o + s] * x[o - systems + s];
  }
  {
    const std::size_t o = (m - 1) * systems;
    for (std::size_t s = 0; s < systems; ++s)
      x[o + s] = x[o + s] * inv_diag[o + s];
  }
  for (std::size_t r = m - 1; r-- > 0;) {
    const std::size_t o = r * systems;
    for (std::size_t s = 0; s < systems; ++s)
      x[o + s] =
          (x[o + s] - upper[o + s] * x[o + systems + s]) * inv_diag[o + s];
  }
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops table = {
      "scalar",
      sum_scalar,
      dot_scalar,
      sum_sq_diff_scalar,
      min_value_scalar,
      all_finite_scalar,
      axpy_scalar,
      add_scaled_scalar,
      add_scaled_sum_scalar,
      tridiag_apply_blocked_scalar,
      tridiag_apply_interleaved_scalar,
      thomas_factor_blocked_scalar,
      thomas_factor_interleaved_scalar,
      thomas_solve_blocked_scalar,
      thomas_solve_interleaved_scalar,
  };
  return table;
}

}  // namespace osmosis::kernels
