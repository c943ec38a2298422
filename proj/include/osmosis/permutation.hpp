#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace osmosis {

/// Index maps between x-fastest and y-fastest orderings of the nx*ny grid.
/// Under the forward map the y-directional operator becomes tridiagonal with
/// bandwidth one, the role reverse Cuthill-McKee plays on this regular grid,
/// realized deterministically as the grid transpose.
struct GridPermutation {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::vector<std::size_t> forward;  // forward[l] = l'
  std::vector<std::size_t> inverse;  // inverse[l'] = l
};

GridPermutation transpose_permutation(std::size_t nx, std::size_t ny);

/// out[forward[l]] = in[l] (x-fastest to y-fastest); no aliasing.
void permute_forward(const GridPermutation& p, std::span<const double> in,
                     std::span<double> out);

/// out[l] = in[forward[l]] (y-fastest back to x-fastest); no aliasing.
void permute_inverse(const GridPermutation& p, std::span<const double> in,
                     std::span<double> out);

std::vector<double> permuted_forward_copy(const GridPermutation& p,
                                          std::span<const double> in);

}  // namespace osmosis
