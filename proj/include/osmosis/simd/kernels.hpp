#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace osmosis::kernels {

/// Dispatch table of the vectorisable inner loops. One table per instruction
/// set; the active table is chosen once at runtime from CPU capabilities and
/// can be overridden for testing or benchmarking.
///
/// Tridiagonal coefficient layout is uniform-length: every array holds one
/// value per element, with `lo` zero at the first row of each system and `hi`
/// zero at the last. Two memory layouts appear:
///   blocked      systems are contiguous; element (b, r) lives at b*m + r.
///   interleaved  systems are interleaved; element (s, r) lives at r*systems + s.
/// The interleaved layout carries no loop dependency across adjacent memory,
/// so the sequential Thomas recurrences vectorise across systems. Both
/// layouts use the same arithmetic per element, which keeps their results
/// bit-identical; equivalence tests rely on that.
struct Ops {
  const char* name;

  double (*sum)(const double* x, std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);
  double (*sum_sq_diff)(const double* x, const double* y, std::size_t n);
  double (*min_value)(const double* x, std::size_t n);
  bool (*all_finite)(const double* x, std::size_t n);

  /// y += a*x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  /// out = x + a*w; aliasing out == x or out == w is allowed
  void (*add_scaled)(const double* x, double a, const double* w,
                     double* out, std::size_t n);
  /// out = x + a*(w1 + w2)
  void (*add_scaled_sum)(const double* x, double a, const double* w1,
                         const double* w2, double* out, std::size_t n);

  /// y = T x for the block-tridiagonal stencil (lo, di, hi); x and y must not
  /// alias. Blocked: `blocks` systems of size m, system-major.
  void (*tridiag_apply_blocked)(std::size_t blocks, std::size_t m,
                                const double* lo, const double* di,
                                const double* hi, const double* x, double* y);
  /// Same stencil with `systems` interleaved systems of size m.
  void (*tridiag_apply_interleaved)(std::size_t systems, std::size_t m,
                                    const double* lo, const double* di,
                                    const double* hi, const double* x,
                                    double* y);

  /// LU of I - c*T without pivoting, per system. Outputs: unit-lower
  /// multipliers `lower` (zero on first rows), pivots `diag`, their
  /// reciprocals `inv_diag`, and the unchanged superdiagonal `upper` of
  /// I - c*T (zero on last rows). Pivots of the assembled operators stay
  /// >= 1 by column diagonal dominance; callers check.
  void (*thomas_factor_blocked)(std::size_t blocks, std::size_t m, double c,
                                const double* lo, const double* di,
                                const double* hi, double* lower, double* diag,
                                double* inv_diag, double* upper);
  void (*thomas_factor_interleaved)(std::size_t systems, std::size_t m,
                                    double c, const double* lo,
                                    const double* di, const double* hi,
                                    double* lower, double* diag,
                                    double* inv_diag, double* upper);

  /// In-place forward/back substitution on x using factors from the matching
  /// thomas_factor_* layout.
  void (*thomas_solve_blocked)(std::size_t blocks, std::size_t m,
                               const double* lower, const double* inv_diag,
                               const double* upper, double* x);
  void (*thomas_solve_interleaved)(std::size_t systems, std::size_t m,
                                   const double* lower, const double* inv_diag,
                                   const double* upper, double* x);
};

/// Portable reference implementation; always available.
const Ops& scalar_ops();

/// AVX2 table, or nullptr when the build target or the running CPU lacks it.
const Ops* avx2_ops();

/// NEON table, or nullptr off aarch64.
const Ops* neon_ops();

/// The table in current use. Defaults to the widest supported set.
const Ops& active();

/// Select a table by name: "auto", "scalar", "avx2", "neon".
/// Returns false (and leaves the selection unchanged) if unavailable.
bool select(std::string_view name);

/// Names of the tables usable on this machine, widest first.
std::vector<std::string> available();

}  // namespace osmosis::kernels
