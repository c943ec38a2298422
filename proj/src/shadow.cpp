#include "osmosis/shadow.hpp"

#include <algorithm>
#include <stdexcept>

namespace osmosis {

ShadowMask::ShadowMask(std::size_t nx_, std::size_t ny_)
    : nx(nx_), ny(ny_), pixels(nx_ * ny_, 0) {
  if (nx == 0 || ny == 0)
    throw std::invalid_argument("mask dimensions must be positive");
}

bool ShadowMask::any() const {
  return std::find(pixels.begin(), pixels.end(), std::uint8_t{1}) !=
         pixels.end();
}

std::size_t ShadowMask::marked_count() const {
  return static_cast<std::size_t>(
      std::count(pixels.begin(), pixels.end(), std::uint8_t{1}));
}

EdgeMask ShadowMask::edge_mask() const {
  EdgeMask e(nx, ny);
  const auto marked = [&](std::size_t i, std::size_t j) {
    return pixels[j * nx + i] != 0;
  };
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i <= nx; ++i) {
      const bool left = i > 0 && marked(i - 1, j);
      const bool right = i < nx && marked(i, j);
      e.m1[j * (nx + 1) + i] = (left || right) ? 1 : 0;
    }
  for (std::size_t j = 0; j <= ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      const bool below = j > 0 && marked(i, j - 1);
      const bool above = j < ny && marked(i, j);
      e.m2[j * nx + i] = (below || above) ? 1 : 0;
    }
  return e;
}

ShadowMask dilate(const ShadowMask& mask, std::size_t radius) {
  if (radius == 0) return mask;
  ShadowMask out(mask.nx, mask.ny);
  const auto r = static_cast<std::ptrdiff_t>(radius);
  const auto w = static_cast<std::ptrdiff_t>(mask.nx);
  const auto h = static_cast<std::ptrdiff_t>(mask.ny);
  for (std::ptrdiff_t j = 0; j < h; ++j)
    for (std::ptrdiff_t i = 0; i < w; ++i) {
      if (!mask.pixels[static_cast<std::size_t>(j * w + i)]) continue;
      const std::ptrdiff_t i0 = std::max<std::ptrdiff_t>(0, i - r);
      const std::ptrdiff_t i1 = std::min<std::ptrdiff_t>(w - 1, i + r);
      const std::ptrdiff_t j0 = std::max<std::ptrdiff_t>(0, j - r);
      const std::ptrdiff_t j1 = std::min<std::ptrdiff_t>(h - 1, j + r);
      for (std::ptrdiff_t jj = j0; jj <= j1; ++jj)
        for (std::ptrdiff_t ii = i0; ii <= i1; ++ii)
          out.pixels[static_cast<std::size_t>(jj * w + ii)] = 1;
    }
  return out;
}

ShadowMask load_mask(const std::string& path, std::size_t nx, std::size_t ny,
                     std::size_t dilation_radius) {
  const Image img = load_image(path);
  if (img.channels != 1)
    throw std::invalid_argument("mask must be a single-channel PGM: " + path);
  if (img.nx != nx || img.ny != ny)
    throw std::invalid_argument(
        "mask dimensions " + std::to_string(img.nx) + "x" +
        std::to_string(img.ny) + " do not match the image " +
        std::to_string(nx) + "x" + std::to_string(ny));
  ShadowMask mask(nx, ny);
  const double threshold = 127.0 / 255.0;
  for (std::size_t l = 0; l < mask.pixels.size(); ++l)
    mask.pixels[l] = img.planes[0][l] > threshold ? 1 : 0;
  return dilate(mask, dilation_radius);
}

Image remove_shadow(const Image& f, const ShadowMask& mask,
                    const SchemeConfig& config) {
  return remove_shadow_report(f, mask, config).final_image;
}

EvolutionReport remove_shadow_report(const Image& f, const ShadowMask& mask,
                                     const SchemeConfig& config) {
  if (f.nx != mask.nx || f.ny != mask.ny)
    throw std::invalid_argument("image and mask dimensions differ");
  const DriftField drift =
      mask_drift(canonical_drift(f, config.h), mask.edge_mask());
  return evolve(f, drift, config);
}

}  // namespace osmosis
