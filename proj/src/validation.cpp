#include "osmosis/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>
#include <thread>

#include "osmosis/expm.hpp"
#include "osmosis/operators.hpp"
#include "osmosis/simd/kernels.hpp"

namespace osmosis {
namespace {

using Clock = std::chrono::steady_clock;

double vector_rrmse(std::span<const double> u, std::span<const double> ref) {
  if (u.size() != ref.size())
    throw std::invalid_argument("rrmse: length mismatch");
  const auto& k = kernels::active();
  const double den = k.dot(ref.data(), ref.data(), ref.size());
  if (den == 0.0)
    throw std::invalid_argument("rrmse: reference is identically zero");
  return std::sqrt(k.sum_sq_diff(u.data(), ref.data(), u.size()) / den);
}

void require_study_pair(const Image& f, const Image& v) {
  if (f.channels != 1 || v.channels != 1)
    throw std::invalid_argument("study harnesses take grayscale images");
  if (f.nx != v.nx || f.ny != v.ny)
    throw std::invalid_argument("study image pair dimensions differ");
}

double resolved_theta(const SchemeConfig& cfg) {
  return (cfg.scheme == Scheme::BE || cfg.scheme == Scheme::Douglas)
             ? cfg.theta
             : 0.0;
}

/// Largest step <= tau (up to rounding) whose uniform trajectory lands
/// exactly on T. Without this, any tau that does not divide T measures the
/// horizon mismatch instead of the scheme error.
double effective_tau(double tau, double T) {
  if (!(tau > 0.0) || !(T >= tau)) return tau;  // let evolve() report it
  const auto steps = std::max<long long>(1, std::llround(T / tau));
  return T / static_cast<double>(steps);
}

std::optional<double> fit_slope(const std::vector<std::pair<double, double>>&
                                    points /* (log tau, log err) */) {
  const double n = static_cast<double>(points.size());
  if (points.size() < 2) return std::nullopt;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : points) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) return std::nullopt;
  return (n * sxy - sx * sy) / denom;
}

}  // namespace

Image synthetic_bump(std::size_t nx, std::size_t ny) {
  Image img(nx, ny, 1);
  const double cx = 0.4, cy = 0.55, sigma = 0.18;
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      const double x = (static_cast<double>(i) + 0.5) / static_cast<double>(nx);
      const double y = (static_cast<double>(j) + 0.5) / static_cast<double>(ny);
      const double r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
      img.planes[0][j * nx + i] =
          0.5 + 0.45 * std::exp(-r2 / (2.0 * sigma * sigma));
    }
  return img;
}

Image constant_image(std::size_t nx, std::size_t ny, double value) {
  return Image(nx, ny, 1, value);
}

Image random_positive_image(std::size_t nx, std::size_t ny, std::uint64_t seed,
                            double lo, double hi) {
  if (!(lo > 0.0) || !(hi > lo))
    throw std::invalid_argument("need 0 < lo < hi");
  Image img(nx, ny, 1);
  std::mt19937_64 rng(seed);
  for (double& p : img.planes[0]) {
    // Top 53 bits to a double in [0,1); bypasses the library distribution,
    // whose output is implementation-defined.
    const double u =
        static_cast<double>(rng() >> 11) * 0x1.0p-53;
    p = lo + (hi - lo) * u;
  }
  return img;
}

ConservationReport conservation_audit(const Image& f, const DriftField& drift,
                                      const SchemeConfig& config) {
  SchemeConfig cfg = config;
  cfg.diagnostics = true;
  const EvolutionReport rep = evolve(f, drift, cfg);

  ConservationReport out;
  out.steps = rep.steps;
  out.warnings = rep.warnings;
  out.first_positivity_violation = rep.first_positivity_violation;
  out.initial_mean = std::numeric_limits<double>::infinity();
  out.min_value = std::numeric_limits<double>::infinity();

  const auto& k = kernels::active();
  for (std::size_t c = 0; c < f.channels; ++c) {
    const double m0 = mean_value(f, c);
    out.initial_mean = std::min(out.initial_mean, m0);
    out.min_value = std::min(
        out.min_value, k.min_value(f.planes[c].data(), f.planes[c].size()));
    for (const double mk : rep.step_means[c]) {
      const double drift_abs = std::abs(mk - m0);
      out.max_mean_drift = std::max(out.max_mean_drift, drift_abs);
      if (m0 != 0.0)
        out.max_relative_mean_drift =
            std::max(out.max_relative_mean_drift, drift_abs / std::abs(m0));
    }
    for (const double mn : rep.step_mins[c])
      out.min_value = std::min(out.min_value, mn);
  }
  return out;
}

OrderStudyResult order_study(const Image& f, const Image& v,
                             const std::vector<double>& taus, double T,
                             const std::vector<SchemeSpec>& schemes,
                             const SchemeConfig& base) {
  require_study_pair(f, v);
  if (taus.empty()) throw std::invalid_argument("order_study: empty tau list");
  if (schemes.empty())
    throw std::invalid_argument("order_study: empty scheme list");

  const DriftField drift = canonical_drift(v, base.h);
  const auto a1 = assemble_directional(drift, Direction::X);
  const auto a2 = assemble_directional(drift, Direction::Y);
  const std::vector<double> benchmark =
      dense_expm_apply(dense_operator(a1, a2), f.planes[0], T);

  OrderStudyResult result;
  result.taus = taus;
  for (const SchemeSpec& spec : schemes) {
    std::vector<std::pair<double, double>> points;
    for (const double tau : taus) {
      SchemeConfig cfg = with_scheme(base, spec);
      cfg.tau = effective_tau(tau, T);
      cfg.T = T;
      cfg.diagnostics = false;
      const EvolutionReport rep = evolve(f, drift, cfg);
      OrderStudyRow row;
      row.scheme = spec.label;
      row.theta = resolved_theta(cfg);
      row.tau = cfg.tau;
      row.rrmse = vector_rrmse(rep.final_image.planes[0], benchmark);
      row.wall_seconds = rep.factorization_seconds + rep.stepping_seconds;
      result.rows.push_back(row);
      if (row.rrmse >= result.saturation_floor)
        points.emplace_back(std::log(cfg.tau), std::log(row.rrmse));
    }
    result.slopes.emplace_back(spec.label, fit_slope(points));
  }
  return result;
}

void write_order_csv(const OrderStudyResult& result, std::ostream& out) {
  out.precision(17);
  out << "scheme,theta,tau,rrmse,wall_seconds\n";
  for (const auto& r : result.rows)
    out << r.scheme << ',' << r.theta << ',' << r.tau << ',' << r.rrmse << ','
        << r.wall_seconds << '\n';
  for (const auto& [scheme, slope] : result.slopes) {
    out << "# slope," << scheme << ',';
    if (slope)
      out << *slope;
    else
      out << "absent";
    out << '\n';
  }
}

std::vector<std::string> default_bench_methods() {
  return {"bicgstab-full", "lu-full", "douglas-adi", "pr-adi"};
}

namespace {

SchemeConfig bench_config(const std::string& method, const SchemeConfig& base) {
  SchemeConfig cfg = base;
  if (method == "bicgstab-full") {
    cfg.scheme = Scheme::BE;
    cfg.theta = 1.0;
    cfg.baseline.solver = BaselineSolver::BiCGStab;
  } else if (method == "lu-full") {
    cfg.scheme = Scheme::BE;
    cfg.theta = 1.0;
    cfg.baseline.solver = BaselineSolver::DenseLU;
  } else if (method == "douglas-adi") {
    cfg.scheme = Scheme::Douglas;
  } else if (method == "pr-adi") {
    cfg.scheme = Scheme::PR;
  } else {
    throw std::invalid_argument("unknown bench method '" + method +
                                "' (expected bicgstab-full, lu-full, "
                                "douglas-adi, pr-adi)");
  }
  return cfg;
}

}  // namespace

std::vector<BenchRow> bench_grid(const Image& f, const Image& v,
                                 const std::vector<double>& taus, double T,
                                 const std::vector<std::string>& methods,
                                 const SchemeConfig& base, std::size_t repeat,
                                 bool parallel) {
  require_study_pair(f, v);
  if (taus.empty()) throw std::invalid_argument("bench_grid: empty tau list");
  if (methods.empty())
    throw std::invalid_argument("bench_grid: empty method list");
  if (repeat == 0) throw std::invalid_argument("bench_grid: repeat must be >= 1");
  for (const auto& m : methods) bench_config(m, base);  // reject bad tokens early

  const DriftField drift = canonical_drift(v, base.h);
  std::vector<double> benchmark;
  if (f.nx * f.ny <= kDenseOracleCap) {
    const auto a1 = assemble_directional(drift, Direction::X);
    const auto a2 = assemble_directional(drift, Direction::Y);
    benchmark = dense_expm_apply(dense_operator(a1, a2), f.planes[0], T);
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<BenchRow> rows(methods.size() * taus.size());
  const auto run_cell = [&](std::size_t index) {
    const std::string& method = methods[index / taus.size()];
    const double tau = taus[index % taus.size()];
    BenchRow& row = rows[index];
    row.method = method;
    row.tau = tau;
    row.wall_seconds = nan;
    row.rrmse = nan;
    try {
      SchemeConfig cfg = bench_config(method, base);
      cfg.tau = effective_tau(tau, T);
      cfg.T = T;
      cfg.diagnostics = false;
      row.tau = cfg.tau;
      row.theta = resolved_theta(cfg);
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < repeat; ++r) {
        const EvolutionReport rep = evolve(f, drift, cfg);
        best = std::min(best,
                        rep.factorization_seconds + rep.stepping_seconds);
        if (r + 1 == repeat && !benchmark.empty())
          row.rrmse =
              vector_rrmse(rep.final_image.planes[0], benchmark);
      }
      row.wall_seconds = best;
    } catch (const std::exception& e) {
      row.status = e.what();
    }
  };

  if (parallel) {
    std::vector<std::thread> pool;
    pool.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) pool.emplace_back(run_cell, i);
    for (auto& t : pool) t.join();
  } else {
    for (std::size_t i = 0; i < rows.size(); ++i) run_cell(i);
  }
  return rows;
}

void write_bench_csv(const std::vector<BenchRow>& rows, std::ostream& out) {
  out.precision(17);
  out << "method,theta,tau,wall_seconds,rrmse,status\n";
  for (const auto& r : rows)
    out << r.method << ',' << r.theta << ',' << r.tau << ',' << r.wall_seconds
        << ',' << r.rrmse << ',' << r.status << '\n';
}

}  // namespace osmosis
