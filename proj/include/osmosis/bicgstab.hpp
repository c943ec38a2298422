#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace osmosis {

/// y = M x for the system being solved; y and x never alias.
using LinearMap =
    std::function<void(std::span<const double>, std::span<double>)>;

enum class KrylovStatus { Converged, MaxIterations, Breakdown };

struct BicgstabResult {
  std::vector<double> x;
  std::size_t iterations = 0;
  double relative_residual = 0.0;
  KrylovStatus status = KrylovStatus::Converged;
  std::vector<double> residual_history;  // filled when requested
};

/// Unpreconditioned BiCGStab on the map `apply`. Terminates when
/// ||b - Mx||/||b|| <= tol or after maxiter iterations, returning the best
/// iterate seen. Breakdown (vanishing rho or curvature) is reported
/// distinctly from plain non-convergence.
BicgstabResult bicgstab(const LinearMap& apply, std::span<const double> b,
                        double tol = 1e-07, std::size_t maxiter = 300000,
                        std::span<const double> x0 = {},
                        bool record_history = false);

}  // namespace osmosis
