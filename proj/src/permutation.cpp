#include "osmosis/permutation.hpp"

#include <stdexcept>

namespace osmosis {

GridPermutation transpose_permutation(std::size_t nx, std::size_t ny) {
  if (nx == 0 || ny == 0)
    throw std::invalid_argument("transpose_permutation: dimensions positive");
  GridPermutation p;
  p.nx = nx;
  p.ny = ny;
  p.forward.resize(nx * ny);
  p.inverse.resize(nx * ny);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t l = j * nx + i;
      const std::size_t lp = i * ny + j;
      p.forward[l] = lp;
      p.inverse[lp] = l;
    }
  return p;
}

void permute_forward(const GridPermutation& p, std::span<const double> in,
                     std::span<double> out) {
  if (in.size() != p.forward.size() || out.size() != p.forward.size())
    throw std::invalid_argument("permute_forward: length mismatch");
  for (std::size_t l = 0; l < in.size(); ++l) out[p.forward[l]] = in[l];
}

void permute_inverse(const GridPermutation& p, std::span<const double> in,
                     std::span<double> out) {
  if (in.size() != p.forward.size() || out.size() != p.forward.size())
    throw std::invalid_argument("permute_inverse: length mismatch");
  for (std::size_t l = 0; l < in.size(); ++l) out[l] = in[p.forward[l]];
}

std::vector<double> permuted_forward_copy(const GridPermutation& p,
                                          std::span<const double> in) {
  std::vector<double> out(in.size());
  permute_forward(p, in, out);
  return out;
}

}  // namespace osmosis
