#include "osmosis/bicgstab.hpp"

#include <cmath>
#include <stdexcept>

#include "osmosis/simd/kernels.hpp"

namespace osmosis {

BicgstabResult bicgstab(const LinearMap& apply, std::span<const double> b,
                        double tol, std::size_t maxiter,
                        std::span<const double> x0, bool record_history) {
  if (!(tol > 0.0)) throw std::invalid_argument("bicgstab: tol must be > 0");
  if (maxiter < 1) throw std::invalid_argument("bicgstab: maxiter must be >= 1");
  if (!x0.empty() && x0.size() != b.size())
    throw std::invalid_argument("bicgstab: x0 length mismatch");

  const std::size_t n = b.size();
  const auto& k = kernels::active();
  constexpr double kBreakdownFloor = 1e-300;

  BicgstabResult res;
  res.x.assign(n, 0.0);

  const double b_norm = std::sqrt(k.dot(b.data(), b.data(), n));
  if (b_norm == 0.0) {
    res.status = KrylovStatus::Converged;  // x = 0 solves exactly
    return res;
  }

  std::vector<double> r(n), r_hat(n), p(n, 0.0), v(n, 0.0), s(n), t(n);
  if (x0.empty()) {
    std::copy(b.begin(), b.end(), r.begin());
  } else {
    std::copy(x0.begin(), x0.end(), res.x.begin());
    apply(res.x, r);                                      // r = A x0
    k.add_scaled(b.data(), -1.0, r.data(), r.data(), n);  // r = b - A x0
  }
  r_hat = r;

  double rho = 1.0, alpha = 1.0, omega = 1.0;
  double best_res = std::sqrt(k.dot(r.data(), r.data(), n)) / b_norm;
  std::vector<double> best_x = res.x;
  res.status = KrylovStatus::MaxIterations;

  auto note = [&](double rel) {
    if (record_history) res.residual_history.push_back(rel);
    if (rel < best_res) {
      best_res = rel;
      best_x = res.x;
    }
  };

  if (best_res <= tol) {
    res.status = KrylovStatus::Converged;
    res.relative_residual = best_res;
    return res;
  }

  for (std::size_t it = 1; it <= maxiter; ++it) {
    res.iterations = it;
    const double rho_new = k.dot(r_hat.data(), r.data(), n);
    if (std::fabs(rho_new) < kBreakdownFloor) {
      res.status = KrylovStatus::Breakdown;
      break;
    }
    const double beta = (rho_new / rho) * (alpha / omega);
    rho = rho_new;
    k.add_scaled(p.data(), -omega, v.data(), p.data(), n);  // p -= omega v
    k.add_scaled(r.data(), beta, p.data(), p.data(), n);    // p = r + beta p
    apply(p, v);
    const double denom = k.dot(r_hat.data(), v.data(), n);
    if (std::fabs(denom) < kBreakdownFloor) {
      res.status = KrylovStatus::Breakdown;
      break;
    }
    alpha = rho_new / denom;
    k.add_scaled(r.data(), -alpha, v.data(), s.data(), n);  // s = r - alpha v

    const double s_rel = std::sqrt(k.dot(s.data(), s.data(), n)) / b_norm;
    if (s_rel <= tol) {
      k.axpy(alpha, p.data(), res.x.data(), n);
      note(s_rel);
      res.status = KrylovStatus::Converged;
      break;
    }

    apply(s, t);
    const double tt = k.dot(t.data(), t.data(), n);
    if (tt < kBreakdownFloor) {
      res.status = KrylovStatus::Breakdown;
      break;
    }
    omega = k.dot(t.data(), s.data(), n) / tt;
    k.axpy(alpha, p.data(), res.x.data(), n);
    k.axpy(omega, s.data(), res.x.data(), n);
    k.add_scaled(s.data(), -omega, t.data(), r.data(), n);  // r = s - omega t

    const double rel = std::sqrt(k.dot(r.data(), r.data(), n)) / b_norm;
    note(rel);
    if (rel <= tol) {
      res.status = KrylovStatus::Converged;
      break;
    }
    if (std::fabs(omega) < kBreakdownFloor) {
      res.status = KrylovStatus::Breakdown;
      break;
    }
  }

  if (res.status != KrylovStatus::Converged) res.x = best_x;

  // Report the true residual of whatever is returned; the recursion can
  // drift from it over long runs.
  apply(res.x, t);
  k.add_scaled(b.data(), -1.0, t.data(), t.data(), n);
  res.relative_residual = std::sqrt(k.dot(t.data(), t.data(), n)) / b_norm;
  return res;
}

}  // namespace osmosis
