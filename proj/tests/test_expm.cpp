#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <vector>

#include "osmosis/drift.hpp"
#include "osmosis/expm.hpp"
#include "osmosis/image.hpp"
#include "osmosis/operators.hpp"

using osmosis::assemble_directional;
using osmosis::canonical_drift;
using osmosis::dense_expm;
using osmosis::dense_expm_apply;
using osmosis::dense_operator;
using osmosis::Direction;
using osmosis::DriftField;
using osmosis::Image;

namespace {

Image random_positive(std::size_t nx, std::size_t ny, std::uint64_t seed) {
  Image v(nx, ny);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.1, 1.0);
  for (double& x : v.planes[0]) x = dist(rng);
  return v;
}

// exp(A) by scaling, long-double Taylor summation, and repeated squaring.
// Slow and simple on purpose: an oracle that shares nothing with the Pade
// evaluation it checks.
std::vector<long double> taylor_expm(const Eigen::MatrixXd& a) {
  const std::size_t n = static_cast<std::size_t>(a.rows());
  double norm = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < n; ++r) s += std::abs(a(r, c));
    norm = std::max(norm, s);
  }
  int squarings = 0;
  while (norm > 0.25) {
    norm /= 2.0;
    ++squarings;
  }
  const long double scale = std::pow(2.0L, -squarings);
  std::vector<long double> b(n * n), term(n * n, 0.0L), e(n * n, 0.0L);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c)
      b[r * n + c] = static_cast<long double>(a(r, c)) * scale;
  for (std::size_t i = 0; i < n; ++i) term[i * n + i] = 1.0L;
  e = term;
  std::vector<long double> next(n * n);
  for (int k = 1; k <= 40; ++k) {
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) {
        long double s = 0.0L;
        for (std::size_t j = 0; j < n; ++j) s += term[r * n + j] * b[j * n + c];
        next[r * n + c] = s / k;
      }
    term.swap(next);
    for (std::size_t i = 0; i < n * n; ++i) e[i] += term[i];
  }
  for (int sq = 0; sq < squarings; ++sq) {
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) {
        long double s = 0.0L;
        for (std::size_t j = 0; j < n; ++j) s += e[r * n + j] * e[j * n + c];
        next[r * n + c] = s;
      }
    e.swap(next);
  }
  return e;
}

}  // namespace

TEST_CASE("zero generator leaves the state unchanged") {
  const Eigen::MatrixXd a = Eigen::MatrixXd::Zero(5, 5);
  const std::vector<double> f{1.0, -2.0, 0.25, 3.5, 0.0};
  const std::vector<double> u = dense_expm_apply(a, f, 123.0);
  for (std::size_t i = 0; i < f.size(); ++i)
    CHECK(std::abs(u[i] - f[i]) <= 1e-15);
}

TEST_CASE("diagonal generator produces scalar exponentials") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 2);
  a(0, 0) = -1.0;
  a(1, 1) = -2.0;
  const std::vector<double> f{1.0, 1.0};
  const std::vector<double> u = dense_expm_apply(a, f, 1.0);
  CHECK(u[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(u[1] == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
}

TEST_CASE("semigroup property holds across the degree cascade") {
  // exp(A) = exp(A/2)^2 exercises two different Pade branches on the same
  // generator.
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::MatrixXd a(6, 6);
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 6; ++c) a(r, c) = dist(rng);
  const Eigen::MatrixXd whole = dense_expm(a);
  const Eigen::MatrixXd half = dense_expm(0.5 * a);
  const Eigen::MatrixXd squared = half * half;
  CHECK((whole - squared).norm() <= 1e-13 * whole.norm());
}

TEST_CASE("Pade evaluation matches a long-double Taylor oracle") {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> dist(-0.5, 0.5);
  for (const double scale : {1.0, 40.0}) {
    Eigen::MatrixXd a(6, 6);
    for (int r = 0; r < 6; ++r)
      for (int c = 0; c < 6; ++c) a(r, c) = scale * dist(rng);
    const Eigen::MatrixXd e = dense_expm(a);
    const std::vector<long double> oracle = taylor_expm(a);
    long double err = 0.0L, ref = 0.0L;
    for (int r = 0; r < 6; ++r)
      for (int c = 0; c < 6; ++c) {
        err = std::max(err, std::abs(e(r, c) - oracle[r * 6 + c]));
        ref = std::max(ref, std::abs(oracle[r * 6 + c]));
      }
    CHECK(static_cast<double>(err) < 2e-13 * static_cast<double>(ref));
  }
}

TEST_CASE("dense operator materializes both directional stencils") {
  const Image v = random_positive(3, 4, 41);
  const DriftField d = canonical_drift(v);
  const auto a1 = assemble_directional(d, Direction::X);
  const auto a2 = assemble_directional(d, Direction::Y);
  const Eigen::MatrixXd a = dense_operator(a1, a2);
  const std::size_t n = v.pixels();
  REQUIRE(a.rows() == static_cast<Eigen::Index>(n));

  std::vector<double> u(n), y(n), scratch(n);
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (double& x : u) x = dist(rng);
  apply_operator_pair(a1, a2, u, y, scratch);
  const Eigen::VectorXd yd =
      a * Eigen::Map<const Eigen::VectorXd>(u.data(), n);
  for (std::size_t l = 0; l < n; ++l)
    CHECK(std::abs(y[l] - yd(static_cast<Eigen::Index>(l))) < 1e-13);
}

TEST_CASE("long horizons converge to the rescaled reference image") {
  const Image v = random_positive(4, 4, 47);
  const Image f = random_positive(4, 4, 53);
  const DriftField d = canonical_drift(v);
  const auto a1 = assemble_directional(d, Direction::X);
  const auto a2 = assemble_directional(d, Direction::Y);
  const Eigen::MatrixXd a = dense_operator(a1, a2);
  const std::vector<double> u = dense_expm_apply(a, f.planes[0], 500.0);

  double sum_f = 0.0, sum_v = 0.0;
  for (const double x : f.planes[0]) sum_f += x;
  for (const double x : v.planes[0]) sum_v += x;
  const double ratio = sum_f / sum_v;
  double num = 0.0, den = 0.0;
  for (std::size_t l = 0; l < u.size(); ++l) {
    const double diff = u[l] - ratio * v.planes[0][l];
    num += diff * diff;
    den += ratio * v.planes[0][l] * ratio * v.planes[0][l];
  }
  CHECK(std::sqrt(num / den) < 1e-8);
}

TEST_CASE("the oracle refuses systems beyond its cap") {
  const Eigen::MatrixXd a = Eigen::MatrixXd::Zero(9, 9);
  const std::vector<double> f(9, 1.0);
  CHECK_THROWS_AS(dense_expm_apply(a, f, 1.0, 4), std::runtime_error);
  CHECK_NOTHROW(dense_expm_apply(a, f, 1.0, 9));
}

TEST_CASE("mismatched state length is rejected") {
  const Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 4);
  const std::vector<double> f(5, 1.0);
  CHECK_THROWS_AS(dense_expm_apply(a, f, 1.0), std::invalid_argument);
}
