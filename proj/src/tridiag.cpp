#include "osmosis/tridiag.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "osmosis/simd/kernels.hpp"

namespace osmosis {

TridiagonalFactors factor_shifted(const DirectionalOperator& op, double c) {
  if (!(c > 0.0))
    throw std::invalid_argument("factor_shifted: shift must be positive");
  const std::size_t n = op.size();
  TridiagonalFactors f;
  f.dir = op.dir;
  f.nx = op.nx;
  f.ny = op.ny;
  f.shift = c;
  f.lower.resize(n);
  f.diag.resize(n);
  f.inv_diag.resize(n);
  f.upper.resize(n);

  const auto& k = kernels::active();
  if (op.dir == Direction::X) {
    k.thomas_factor_blocked(op.ny, op.nx, c, op.lo.data(), op.di.data(),
                            op.hi.data(), f.lower.data(), f.diag.data(),
                            f.inv_diag.data(), f.upper.data());
  } else {
    k.thomas_factor_interleaved(op.nx, op.ny, c, op.lo.data(), op.di.data(),
                                op.hi.data(), f.lower.data(), f.diag.data(),
                                f.inv_diag.data(), f.upper.data());
    // y-fastest copy for the permuted blocked route; the factor values are
    // per-element, so re-laying them out changes nothing numerically.
    const GridPermutation p = transpose_permutation(op.nx, op.ny);
    f.lower_p = permuted_forward_copy(p, f.lower);
    f.inv_diag_p = permuted_forward_copy(p, f.inv_diag);
    f.upper_p = permuted_forward_copy(p, f.upper);
  }

  f.min_pivot = *std::min_element(f.diag.begin(), f.diag.end());
  if (!(f.min_pivot > 0.0))
    throw std::logic_error(
        "factor_shifted: non-positive pivot " + std::to_string(f.min_pivot) +
        "; column diagonal dominance violated (internal inconsistency)");
  return f;
}

void solve_factored_inplace(const TridiagonalFactors& f,
                            std::span<double> rhs) {
  if (rhs.size() != f.size())
    throw std::invalid_argument("solve_factored: length mismatch");
  const auto& k = kernels::active();
  if (f.dir == Direction::X)
    k.thomas_solve_blocked(f.ny, f.nx, f.lower.data(), f.inv_diag.data(),
                           f.upper.data(), rhs.data());
  else
    k.thomas_solve_interleaved(f.nx, f.ny, f.lower.data(), f.inv_diag.data(),
                               f.upper.data(), rhs.data());
}

std::vector<double> solve_factored(const TridiagonalFactors& f,
                                   std::span<const double> rhs) {
  std::vector<double> x(rhs.begin(), rhs.end());
  solve_factored_inplace(f, x);
  return x;
}

void solve_factored_permuted(const TridiagonalFactors& f,
                             const GridPermutation& p, std::span<double> rhs,
                             std::span<double> scratch) {
  if (f.dir != Direction::Y)
    throw std::invalid_argument(
        "solve_factored_permuted: only the y-direction solve has a permuted "
        "route");
  if (rhs.size() != f.size() || scratch.size() != f.size())
    throw std::invalid_argument("solve_factored_permuted: length mismatch");
  permute_forward(p, rhs, scratch);
  kernels::active().thomas_solve_blocked(f.nx, f.ny, f.lower_p.data(),
                                         f.inv_diag_p.data(), f.upper_p.data(),
                                         scratch.data());
  permute_inverse(p, scratch, rhs);
}

}  // namespace osmosis
