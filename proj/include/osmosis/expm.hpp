#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

#include "osmosis/operators.hpp"

namespace osmosis {

inline constexpr std::size_t kDenseOracleCap = 4096;

/// Materializes A1 + A2 as a dense matrix (rows are equations), for the
/// exact-in-time oracle and the small-grid dense baselines.
Eigen::MatrixXd dense_operator(const DirectionalOperator& a1,
                               const DirectionalOperator& a2);

/// exp(T*A) applied to f, via scaling-and-squaring with diagonal Pade
/// approximants (degree cascade 3/5/7/9/13). Exact in time up to roundoff;
/// this is the benchmark every scheme is measured against. Oracle only:
/// refuses N beyond `cap`.
std::vector<double> dense_expm_apply(const Eigen::MatrixXd& a,
                                     std::span<const double> f, double T,
                                     std::size_t cap = kDenseOracleCap);

/// exp(A) itself; exposed for tests.
Eigen::MatrixXd dense_expm(const Eigen::MatrixXd& a);

}  // namespace osmosis
