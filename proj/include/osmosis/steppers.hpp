#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "osmosis/drift.hpp"
#include "osmosis/image.hpp"
#include "osmosis/operators.hpp"
#include "osmosis/permutation.hpp"
#include "osmosis/tridiag.hpp"

namespace osmosis {

/// Time integration families. BE is the theta-weighted unsplit stepper
/// (I - theta*tau*A) u+ = (I + (1-theta)*tau*A) u over the full operator:
/// theta = 1 is implicit Euler, theta = 1/2 is Crank-Nicolson. PR and
/// Douglas split by direction and solve tridiagonal systems only.
enum class Scheme { FE, BE, PR, Douglas };

enum class BaselineSolver { BiCGStab, DenseLU };

/// Solver choice for the unsplit baseline. BiCGStab runs matrix-free on the
/// pentadiagonal map; DenseLU factors the full matrix once (small grids).
struct BaselineOptions {
  BaselineSolver solver = BaselineSolver::BiCGStab;
  double krylov_tol = 1e-7;
  std::size_t krylov_maxiter = 300000;
};

/// Everything one evolution run needs beyond the image and drift.
///
/// theta weights the implicit stages: the Douglas corrector weight, or the
/// implicitness of the unsplit BE stepper. FE and PR ignore it. h is
/// consumed where a drift field is built from an image (shadow pipeline,
/// CLI); evolve itself takes the drift prebuilt, which carries its own h.
struct SchemeConfig {
  Scheme scheme = Scheme::Douglas;
  double tau = 10.0;
  double T = 5000.0;
  double theta = 0.5;
  double h = 1.0;
  BaselineOptions baseline;
  bool diagnostics = false;
  unsigned threads = 1;

  /// round(T/tau). Throws std::invalid_argument unless tau > 0 and T >= tau.
  std::size_t steps() const;
};

/// Scheme token as accepted by the CLI and the study harnesses:
/// "fe", "be", "cn", "full:<theta>", "pr", "douglas", "douglas:<theta>".
/// "be" fixes theta = 1 and "cn" theta = 1/2; bare "douglas" leaves theta
/// to the caller's default.
struct SchemeSpec {
  Scheme scheme = Scheme::Douglas;
  std::optional<double> theta;
  std::string label;  // the token, normalized
};

SchemeSpec parse_scheme_token(std::string_view token);

/// Applies a SchemeSpec on top of a base configuration.
SchemeConfig with_scheme(const SchemeConfig& base, const SchemeSpec& spec);

/// The operator I + c*A of one direction, premultiplied into per-pixel
/// stencil coefficients so each application is a single fused pass.
struct ExplicitStencil {
  Direction dir = Direction::X;
  std::size_t nx = 0;
  std::size_t ny = 0;
  double c = 0.0;
  std::vector<double> lo, di, hi;

  std::size_t size() const { return nx * ny; }
};

ExplicitStencil explicit_stencil(const DirectionalOperator& op, double c);

/// y = (I + c*A) u; u and y must not alias.
void apply_stencil(const ExplicitStencil& e, std::span<const double> u,
                   std::span<double> y);

// ---------------------------------------------------------------------------
// Single-step operations. Each returns the advanced vector and leaves u
// untouched. The factor-taking variants validate the factor shifts against
// the step they are asked to take and throw std::invalid_argument on
// mismatch. The reusable stepper classes below compute the same values.
// ---------------------------------------------------------------------------

/// Explicit Euler: u + tau*(A1 u + A2 u). Throws std::domain_error when tau
/// misses the stability bound tau < 1/max|a_ii| of the full operator; the
/// message carries the bound.
std::vector<double> step_fe(std::span<const double> u,
                            const DirectionalOperator& a1,
                            const DirectionalOperator& a2, double tau);

/// Implicit Euler: solves (I - tau*A) u+ = u with the chosen baseline
/// solver. Stable for any tau > 0. Krylov non-convergence throws
/// std::runtime_error carrying the relative residual.
std::vector<double> step_be(std::span<const double> u,
                            const DirectionalOperator& a1,
                            const DirectionalOperator& a2, double tau,
                            const BaselineOptions& options = {});

/// One Peaceman-Rachford step from prebuilt pieces, all at c = tau/2:
///   z1 = E1 u;  y1 = F2 \ z1;  z2 = E2 y1;  u+ = F1 \ z2.
/// The A2 solve runs in the permuted (y-fastest) ordering given by p; the
/// result is bit-identical to the in-place interleaved route the stepper
/// class uses.
std::vector<double> step_pr(std::span<const double> u,
                            const TridiagonalFactors& f1,
                            const TridiagonalFactors& f2,
                            const ExplicitStencil& e1,
                            const ExplicitStencil& e2,
                            const GridPermutation& p);

/// One Douglas step with corrector weight theta in [0,1] and factors built
/// at c = theta*tau:
///   y0 = u + tau*(A1 u + A2 u)
///   (I - theta*tau*A1) y1 = y0 - theta*tau*A1 u
///   (I - theta*tau*A2) y2 = y1 - theta*tau*A2 u
/// theta = 0 skips both solves and reduces bitwise to step_fe (without its
/// stability guard). The A2 solve runs in the permuted ordering given by p.
std::vector<double> step_douglas(std::span<const double> u,
                                 const DirectionalOperator& a1,
                                 const DirectionalOperator& a2,
                                 const TridiagonalFactors& f1,
                                 const TridiagonalFactors& f2, double theta,
                                 double tau, const GridPermutation& p);

// ---------------------------------------------------------------------------
// Reusable steppers: factor once, step many times. step() advances u in
// place. All steppers copy the operator coefficients they keep.
// ---------------------------------------------------------------------------

class ForwardEulerStepper {
 public:
  /// Throws std::domain_error when tau >= the stability bound.
  ForwardEulerStepper(const DirectionalOperator& a1,
                      const DirectionalOperator& a2, double tau);

  void step(std::span<double> u);

  /// 1/max|a_ii| of the full operator; +inf when the operator is zero.
  double bound() const { return bound_; }

 private:
  DirectionalOperator a1_, a2_;
  double tau_;
  double bound_;
  std::vector<double> du_, scratch_;
};

class FullSystemStepper {
 public:
  FullSystemStepper(const DirectionalOperator& a1,
                    const DirectionalOperator& a2, double tau, double theta,
                    const BaselineOptions& options = {});
  ~FullSystemStepper();
  FullSystemStepper(FullSystemStepper&&) noexcept;
  FullSystemStepper& operator=(FullSystemStepper&&) noexcept;

  void step(std::span<double> u);

  /// Krylov effort of the most recent step; zero on the dense route.
  std::size_t last_iterations() const { return last_iterations_; }
  double last_residual() const { return last_residual_; }

 private:
  struct Dense;

  DirectionalOperator a1_, a2_;
  double tau_;
  double theta_;
  BaselineOptions options_;
  std::unique_ptr<Dense> dense_;
  std::vector<double> rhs_, au_, scratch_;
  std::size_t last_iterations_ = 0;
  double last_residual_ = 0.0;
};

class PeacemanRachfordStepper {
 public:
  PeacemanRachfordStepper(const DirectionalOperator& a1,
                          const DirectionalOperator& a2, double tau);

  void step(std::span<double> u);

  /// Positivity holds for tau < positivity_bound(); exceeding it is legal
  /// (the scheme stays stable and conservative) but forfeits the guarantee.
  double positivity_bound() const { return bound_; }
  bool bound_satisfied() const { return tau_ < bound_; }

 private:
  TridiagonalFactors f1_, f2_;
  ExplicitStencil e1_, e2_;
  double tau_;
  double bound_;
  std::vector<double> z_;
};

class DouglasStepper {
 public:
  DouglasStepper(const DirectionalOperator& a1, const DirectionalOperator& a2,
                 double tau, double theta);

  void step(std::span<double> u);

 private:
  DirectionalOperator a1_, a2_;
  TridiagonalFactors f1_, f2_;  // untouched when theta == 0
  double tau_;
  double theta_;
  std::vector<double> a1u_, a2u_, y_;
};

// ---------------------------------------------------------------------------
// Trajectory evolution.
// ---------------------------------------------------------------------------

struct EvolutionReport {
  Image final_image;
  std::size_t steps = 0;
  double factorization_seconds = 0.0;  // stepper setup, summed over channels
  double stepping_seconds = 0.0;       // time loop, summed over channels
  /// Per-channel trajectories indexed by step (k = 1..steps); filled only
  /// when SchemeConfig::diagnostics is set.
  std::vector<std::vector<double>> step_means;
  std::vector<std::vector<double>> step_mins;
  /// First step (1-based) at which any channel dipped below zero; requires
  /// diagnostics.
  std::optional<std::size_t> first_positivity_violation;
  std::vector<std::string> warnings;
};

/// Assembles the operators per channel, factors once, and advances f by
/// round(T/tau) steps of the configured scheme. drift must carry either one
/// channel (shared) or one per image channel. Channels evolve independently;
/// config.threads > 1 runs them concurrently. A non-finite value aborts with
/// std::runtime_error naming the step.
EvolutionReport evolve(const Image& f, const DriftField& drift,
                       const SchemeConfig& config);

}  // namespace osmosis
