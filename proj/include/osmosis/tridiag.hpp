#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "osmosis/operators.hpp"
#include "osmosis/permutation.hpp"

namespace osmosis {

/// Pivot-free LU factors of I - c*A for one directional operator, computed
/// once and reused across the whole time loop. Arrays live in x-fastest grid
/// order like the operator; Y-direction factors additionally keep a
/// y-fastest copy so the permuted solve route of the reference algorithm can
/// run on contiguous blocks. Both routes execute the same per-element
/// arithmetic and return identical results.
///
/// I - c*A is strictly column diagonally dominant with excess exactly one,
/// so elimination needs no pivoting and every pivot stays >= 1; the
/// factorization verifies this and keeps the pivots for audits.
struct TridiagonalFactors {
  Direction dir = Direction::X;
  std::size_t nx = 0;
  std::size_t ny = 0;
  double shift = 0.0;  // the c in I - c*A
  std::vector<double> lower, diag, inv_diag, upper;        // grid order
  std::vector<double> lower_p, inv_diag_p, upper_p;        // y-fastest (Y only)
  double min_pivot = 0.0;

  std::size_t size() const { return nx * ny; }
};

/// Factors I - c*A, c > 0. O(N); throws std::logic_error on a non-positive
/// pivot (impossible for assembled operators; internal-consistency check).
TridiagonalFactors factor_shifted(const DirectionalOperator& op, double c);

/// In-place forward/back substitution in grid order: blocked sweep for X,
/// interleaved sweep across the independent column systems for Y.
void solve_factored_inplace(const TridiagonalFactors& f, std::span<double> rhs);

std::vector<double> solve_factored(const TridiagonalFactors& f,
                                   std::span<const double> rhs);

/// Reference route for Y-direction factors: permute to y-fastest order,
/// solve contiguous blocks, permute back. `scratch` needs f.size() entries.
/// Agrees with solve_factored_inplace bit-for-bit.
void solve_factored_permuted(const TridiagonalFactors& f,
                             const GridPermutation& p, std::span<double> rhs,
                             std::span<double> scratch);

}  // namespace osmosis
