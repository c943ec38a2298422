#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "osmosis/image.hpp"

namespace osmosis {

/// Drift samples on the staggered edge grids. d1 lives on vertical cell
/// edges: entry (i, j), i in [0, nx], j in [0, ny), at index j*(nx+1) + i,
/// is the sample between pixels (i-1, j) and (i, j). d2 mirrors this on
/// horizontal edges with index j*nx + i, j in [0, ny]. Boundary edges
/// (i = 0, i = nx; j = 0, j = ny) always carry zero: boundary fluxes are
/// dropped, which realizes the no-flux condition.
struct DriftField {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::size_t channels = 1;
  double h = 1.0;
  std::vector<std::vector<double>> d1;  // per channel, (nx+1)*ny entries
  std::vector<std::vector<double>> d2;  // per channel, nx*(ny+1) entries

  DriftField() = default;
  DriftField(std::size_t nx_, std::size_t ny_, std::size_t channels_,
             double h_);
};

/// Per-edge boolean grids matching DriftField's edge indexing, shared by all
/// channels.
struct EdgeMask {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::vector<std::uint8_t> m1;  // (nx+1)*ny
  std::vector<std::uint8_t> m2;  // nx*(ny+1)

  EdgeMask() = default;
  EdgeMask(std::size_t nx_, std::size_t ny_);
};

/// Midpoint drift for which v is an exact discrete steady state:
/// d = 2(v_next - v_prev) / (h (v_next + v_prev)) on interior edges, zero on
/// boundary edges. Requires v > 0 everywhere; |d| <= 2/h follows.
DriftField canonical_drift(const Image& v, double h = 1.0);

/// Copy of d with both components zeroed on masked edges.
DriftField mask_drift(const DriftField& d, const EdgeMask& mask);

}  // namespace osmosis
