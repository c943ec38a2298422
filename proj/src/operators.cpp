#include "osmosis/operators.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "osmosis/simd/kernels.hpp"

namespace osmosis {

double DirectionalOperator::max_abs_diag() const {
  double m = 0.0;
  for (const double d : di) m = std::max(m, std::fabs(d));
  return m;
}

DirectionalOperator assemble_directional(const DriftField& d, Direction dir,
                                         std::size_t channel) {
  if (channel >= d.channels)
    throw std::invalid_argument("assemble_directional: channel out of range");
  const std::size_t nx = d.nx, ny = d.ny, n = nx * ny;
  DirectionalOperator op;
  op.dir = dir;
  op.nx = nx;
  op.ny = ny;
  op.h = d.h;
  op.lo.assign(n, 0.0);
  op.di.assign(n, 0.0);
  op.hi.assign(n, 0.0);

  const double ih2 = 1.0 / (d.h * d.h);
  const double ih2h = 1.0 / (2.0 * d.h);

  if (dir == Direction::X) {
    const auto& d1 = d.d1[channel];
    for (std::size_t j = 0; j < ny; ++j)
      for (std::size_t i = 0; i < nx; ++i) {
        const std::size_t l = j * nx + i;
        // Edge index i is the vertical edge between pixels (i-1, j), (i, j).
        if (i > 0) op.lo[l] = ih2 + d1[j * (nx + 1) + i] * ih2h;
        if (i + 1 < nx) op.hi[l] = ih2 - d1[j * (nx + 1) + i + 1] * ih2h;
      }
    // Diagonal = negated sum of the column partners; exact zero column sums.
    for (std::size_t j = 0; j < ny; ++j)
      for (std::size_t i = 0; i < nx; ++i) {
        const std::size_t l = j * nx + i;
        const double above = i > 0 ? op.hi[l - 1] : 0.0;
        const double below = i + 1 < nx ? op.lo[l + 1] : 0.0;
        op.di[l] = -(above + below);
      }
  } else {
    const auto& d2 = d.d2[channel];
    for (std::size_t j = 0; j < ny; ++j)
      for (std::size_t i = 0; i < nx; ++i) {
        const std::size_t l = j * nx + i;
        if (j > 0) op.lo[l] = ih2 + d2[j * nx + i] * ih2h;
        if (j + 1 < ny) op.hi[l] = ih2 - d2[(j + 1) * nx + i] * ih2h;
      }
    for (std::size_t j = 0; j < ny; ++j)
      for (std::size_t i = 0; i < nx; ++i) {
        const std::size_t l = j * nx + i;
        const double above = j > 0 ? op.hi[l - nx] : 0.0;
        const double below = j + 1 < ny ? op.lo[l + nx] : 0.0;
        op.di[l] = -(above + below);
      }
  }
  return op;
}

void apply_operator(const DirectionalOperator& op, std::span<const double> u,
                    std::span<double> y) {
  if (u.size() != op.size() || y.size() != op.size())
    throw std::invalid_argument("apply_operator: length mismatch");
  const auto& k = kernels::active();
  if (op.dir == Direction::X)
    k.tridiag_apply_blocked(op.ny, op.nx, op.lo.data(), op.di.data(),
                            op.hi.data(), u.data(), y.data());
  else
    k.tridiag_apply_interleaved(op.nx, op.ny, op.lo.data(), op.di.data(),
                                op.hi.data(), u.data(), y.data());
}

void apply_operator_pair(const DirectionalOperator& a1,
                         const DirectionalOperator& a2,
                         std::span<const double> u, std::span<double> y,
                         std::span<double> scratch) {
  if (a1.size() != a2.size())
    throw std::invalid_argument("apply_operator_pair: operator size mismatch");
  apply_operator(a1, u, y);
  apply_operator(a2, u, scratch);
  kernels::active().add_scaled(y.data(), 1.0, scratch.data(), y.data(),
                               y.size());
}

void export_coo(const DirectionalOperator& op, std::ostream& out) {
  const std::size_t step = op.dir == Direction::X ? 1 : op.nx;
  const auto precision = out.precision(17);
  for (std::size_t l = 0; l < op.size(); ++l) {
    if (op.lo[l] != 0.0)
      out << l << " " << l - step << " " << op.lo[l] << "\n";
    out << l << " " << l << " " << op.di[l] << "\n";
    if (op.hi[l] != 0.0)
      out << l << " " << l + step << " " << op.hi[l] << "\n";
  }
  out.precision(precision);
}

}  // namespace osmosis
