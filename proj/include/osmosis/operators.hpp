#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "osmosis/drift.hpp"

namespace osmosis {

enum class Direction { X, Y };

/// One directional part of the drift-diffusion operator, A1 (x) or A2 (y):
/// independent tridiagonal systems along its direction. Coefficients are
/// stored per pixel in x-fastest grid order (lo: toward the previous
/// neighbour along the direction, hi: toward the next), zero where the
/// neighbour does not exist. For X this is block layout (ny blocks of nx);
/// for Y it is interleaved layout (nx systems of ny) - the same arrays feed
/// either kernel family without copying.
///
/// Diagonals are written as negated column-partner sums, so every column of
/// every block sums to zero exactly, the discrete conservation backbone.
/// Off-diagonals are non-negative whenever |d| <= 2/h.
struct DirectionalOperator {
  Direction dir = Direction::X;
  std::size_t nx = 0;
  std::size_t ny = 0;
  double h = 1.0;
  std::vector<double> lo, di, hi;

  std::size_t size() const { return nx * ny; }
  std::size_t blocks() const { return dir == Direction::X ? ny : nx; }
  std::size_t block_size() const { return dir == Direction::X ? nx : ny; }

  /// Largest |a_ii|; feeds the FE and PR time-step bounds.
  double max_abs_diag() const;
};

DirectionalOperator assemble_directional(const DriftField& d, Direction dir,
                                         std::size_t channel = 0);

/// y = A u in grid order. Length must equal op.size(); u and y must not
/// alias.
void apply_operator(const DirectionalOperator& op, std::span<const double> u,
                    std::span<double> y);

/// y = A1 u + A2 u using `scratch` (same length) for the second product.
void apply_operator_pair(const DirectionalOperator& a1,
                         const DirectionalOperator& a2,
                         std::span<const double> u, std::span<double> y,
                         std::span<double> scratch);

/// Coordinate-format dump (row col value per line, zero-based) for
/// cross-checking against external tools.
void export_coo(const DirectionalOperator& op, std::ostream& out);

}  // namespace osmosis
