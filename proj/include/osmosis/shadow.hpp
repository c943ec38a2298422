#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "osmosis/drift.hpp"
#include "osmosis/image.hpp"
#include "osmosis/steppers.hpp"

namespace osmosis {

/// Pixel set marking a shadow boundary. The drift is zeroed on every edge
/// touching a marked pixel, so the evolution diffuses freely across the
/// boundary and flattens the illumination jump.
struct ShadowMask {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::vector<std::uint8_t> pixels;  // 1 = boundary pixel, x-fastest

  ShadowMask() = default;
  ShadowMask(std::size_t nx_, std::size_t ny_);

  bool any() const;
  std::size_t marked_count() const;

  /// Derived per-edge mask: an edge is masked iff either endpoint pixel is
  /// marked.
  EdgeMask edge_mask() const;
};

/// Marks every pixel within Chebyshev distance `radius` of a marked pixel
/// (a square structuring element, clipped at the borders).
ShadowMask dilate(const ShadowMask& mask, std::size_t radius);

/// Reads a PGM mask: pixels brighter than 127/255 are boundary. Dimensions
/// must match (nx, ny) or std::invalid_argument is thrown. The dilation
/// radius is applied before returning.
ShadowMask load_mask(const std::string& path, std::size_t nx, std::size_t ny,
                     std::size_t dilation_radius = 1);

/// Shadow removal: builds canonical_drift(f, config.h), zeroes it on the
/// mask's edges, and evolves f to config.T. Channels are processed
/// independently. The mean gray value of every channel is conserved.
/// Requires f positive everywhere (apply ensure_positive first).
Image remove_shadow(const Image& f, const ShadowMask& mask,
                    const SchemeConfig& config);

/// Same pipeline, returning the full evolution report.
EvolutionReport remove_shadow_report(const Image& f, const ShadowMask& mask,
                                     const SchemeConfig& config);

}  // namespace osmosis
