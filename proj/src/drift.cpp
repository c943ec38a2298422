#include "osmosis/drift.hpp"

#include <stdexcept>

namespace osmosis {

DriftField::DriftField(std::size_t nx_, std::size_t ny_, std::size_t channels_,
                       double h_)
    : nx(nx_), ny(ny_), channels(channels_), h(h_) {
  if (nx == 0 || ny == 0)
    throw std::invalid_argument("drift field dimensions must be positive");
  if (!(h > 0.0)) throw std::invalid_argument("grid spacing must be positive");
  d1.assign(channels, std::vector<double>((nx + 1) * ny, 0.0));
  d2.assign(channels, std::vector<double>(nx * (ny + 1), 0.0));
}

EdgeMask::EdgeMask(std::size_t nx_, std::size_t ny_)
    : nx(nx_),
      ny(ny_),
      m1((nx + 1) * ny, 0),
      m2(nx * (ny + 1), 0) {}

DriftField canonical_drift(const Image& v, double h) {
  DriftField d(v.nx, v.ny, v.channels, h);
  for (std::size_t c = 0; c < v.channels; ++c) {
    const auto& p = v.planes[c];
    for (const double x : p)
      if (!(x > 0.0))
        throw std::invalid_argument(
            "canonical_drift: reference image must be strictly positive");
    // Interior vertical edges; boundary columns i=0 and i=nx stay zero.
    for (std::size_t j = 0; j < v.ny; ++j)
      for (std::size_t i = 1; i < v.nx; ++i) {
        const double a = p[j * v.nx + (i - 1)];
        const double b = p[j * v.nx + i];
        d.d1[c][j * (v.nx + 1) + i] = 2.0 * (b - a) / (h * (b + a));
      }
    for (std::size_t j = 1; j < v.ny; ++j)
      for (std::size_t i = 0; i < v.nx; ++i) {
        const double a = p[(j - 1) * v.nx + i];
        const double b = p[j * v.nx + i];
        d.d2[c][j * v.nx + i] = 2.0 * (b - a) / (h * (b + a));
      }
  }
  return d;
}

DriftField mask_drift(const DriftField& d, const EdgeMask& mask) {
  if (mask.nx != d.nx || mask.ny != d.ny)
    throw std::invalid_argument("mask_drift: mask dimensions do not match");
  DriftField out = d;
  for (std::size_t c = 0; c < d.channels; ++c) {
    for (std::size_t e = 0; e < mask.m1.size(); ++e)
      if (mask.m1[e]) out.d1[c][e] = 0.0;
    for (std::size_t e = 0; e < mask.m2.size(); ++e)
      if (mask.m2[e]) out.d2[c][e] = 0.0;
  }
  return out;
}

}  // namespace osmosis
