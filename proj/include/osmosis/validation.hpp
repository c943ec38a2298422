#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "osmosis/drift.hpp"
#include "osmosis/image.hpp"
#include "osmosis/steppers.hpp"

namespace osmosis {

/// Smooth positive synthetic reference: 0.5 plus an off-center Gaussian
/// bump of height 0.45. Deterministic; values lie in (0.5, 0.95].
Image synthetic_bump(std::size_t nx, std::size_t ny);

/// Constant image of the given value.
Image constant_image(std::size_t nx, std::size_t ny, double value);

/// Uniform random image with values in [lo, hi]; deterministic for a fixed
/// seed across platforms (no library distribution involved).
Image random_positive_image(std::size_t nx, std::size_t ny, std::uint64_t seed,
                            double lo = 0.1, double hi = 1.0);

struct ConservationReport {
  std::size_t steps = 0;
  double initial_mean = 0.0;  // smallest channel mean of f
  /// max over channels and steps of |mean(u^k) - mean(f)|, absolute and
  /// relative to the channel's initial mean.
  double max_mean_drift = 0.0;
  double max_relative_mean_drift = 0.0;
  /// Smallest value seen anywhere in the trajectory, initial state included.
  double min_value = 0.0;
  std::optional<std::size_t> first_positivity_violation;
  std::vector<std::string> warnings;
};

/// Runs evolve with diagnostics forced on and condenses the per-step
/// records into conservation figures.
ConservationReport conservation_audit(const Image& f, const DriftField& drift,
                                      const SchemeConfig& config);

struct OrderStudyRow {
  std::string scheme;  // normalized token
  double theta = 0.0;  // resolved weight; 0 when the scheme carries none
  /// Effective step actually used: the largest step <= the requested one
  /// whose uniform trajectory lands exactly on T, so the error measures the
  /// scheme instead of a horizon mismatch.
  double tau = 0.0;
  double rrmse = 0.0;
  double wall_seconds = 0.0;
};

struct OrderStudyResult {
  std::vector<double> taus;
  std::vector<OrderStudyRow> rows;
  /// Fitted loglog slope of rrmse vs tau per scheme token, least squares
  /// over the points above the saturation floor; absent with fewer than
  /// two usable points.
  std::vector<std::pair<std::string, std::optional<double>>> slopes;
  double saturation_floor = 1e-12;
};

/// Evolves f under canonical_drift(v) to time T for every (scheme, tau)
/// pair, measures rrmse against the dense matrix-exponential benchmark,
/// and fits the error-vs-tau slopes. Grayscale instances only; the grid
/// must fit the dense-oracle cap (std::runtime_error otherwise).
OrderStudyResult order_study(const Image& f, const Image& v,
                             const std::vector<double>& taus, double T,
                             const std::vector<SchemeSpec>& schemes,
                             const SchemeConfig& base = {});

void write_order_csv(const OrderStudyResult& result, std::ostream& out);

struct BenchRow {
  std::string method;
  double theta = 0.0;
  double tau = 0.0;           // effective step, landing exactly on T
  double wall_seconds = 0.0;  // best over repeats; factor + stepping
  double rrmse = 0.0;         // NaN when the grid exceeds the oracle cap
  std::string status = "ok";  // "ok" or the per-cell failure reason
};

/// Method tokens: "bicgstab-full", "lu-full", "douglas-adi", "pr-adi".
std::vector<std::string> default_bench_methods();

/// Times every method over every tau, evolving f under canonical_drift(v)
/// to time T. Per-cell failures are recorded in the row status and the
/// grid continues. Cells run serially by default so wall clocks stay
/// honest; parallel = true runs them concurrently (timings then overlap).
std::vector<BenchRow> bench_grid(const Image& f, const Image& v,
                                 const std::vector<double>& taus, double T,
                                 const std::vector<std::string>& methods,
                                 const SchemeConfig& base = {},
                                 std::size_t repeat = 1,
                                 bool parallel = false);

void write_bench_csv(const std::vector<BenchRow>& rows, std::ostream& out);

}  // namespace osmosis
