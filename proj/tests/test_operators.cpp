#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "osmosis/drift.hpp"
#include "osmosis/image.hpp"
#include "osmosis/operators.hpp"

using osmosis::assemble_directional;
using osmosis::apply_operator;
using osmosis::apply_operator_pair;
using osmosis::canonical_drift;
using osmosis::Direction;
using osmosis::DirectionalOperator;
using osmosis::DriftField;
using osmosis::EdgeMask;
using osmosis::Image;
using osmosis::mask_drift;

namespace {

Image random_positive(std::size_t nx, std::size_t ny, std::uint64_t seed) {
  Image v(nx, ny);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.1, 1.0);
  for (double& x : v.planes[0]) x = dist(rng);
  return v;
}

double max_abs(std::span<const double> x) {
  double m = 0.0;
  for (const double v : x) m = std::max(m, std::abs(v));
  return m;
}

// Dense (A1 + A2) built independently, edge by edge, from the discrete flux
// (u_next - u_prev)/h - d (u_prev + u_next)/2: each interior edge moves
// flux/h from its prev pixel to its next pixel.
std::vector<double> dense_from_fluxes(const DriftField& d) {
  const std::size_t nx = d.nx, ny = d.ny, n = nx * ny;
  const double ih2 = 1.0 / (d.h * d.h);
  const double i2h = 1.0 / (2.0 * d.h);
  std::vector<double> m(n * n, 0.0);
  auto edge = [&](std::size_t p, std::size_t q, double dv) {
    m[p * n + p] += -ih2 - dv * i2h;
    m[p * n + q] += ih2 - dv * i2h;
    m[q * n + p] += ih2 + dv * i2h;
    m[q * n + q] += -ih2 + dv * i2h;
  };
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 1; i < nx; ++i)
      edge(j * nx + i - 1, j * nx + i, d.d1[0][j * (nx + 1) + i]);
  for (std::size_t j = 1; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i)
      edge((j - 1) * nx + i, j * nx + i, d.d2[0][j * nx + i]);
  return m;
}

}  // namespace

TEST_CASE("constant reference image yields identically zero drift") {
  Image v(4, 3);
  for (double& x : v.planes[0]) x = 0.7;
  const DriftField d = canonical_drift(v);
  for (const double x : d.d1[0]) CHECK(x == 0.0);
  for (const double x : d.d2[0]) CHECK(x == 0.0);
}

TEST_CASE("drift midpoint value matches direct arithmetic") {
  // Row {1, 3}, h = 1: d = 2 (3 - 1) / (1 * (1 + 3)) = 1.
  Image v(2, 1);
  v.planes[0] = {1.0, 3.0};
  const DriftField d = canonical_drift(v, 1.0);
  CHECK(d.d1[0][0] == 0.0);
  CHECK(d.d1[0][1] == 1.0);
  CHECK(d.d1[0][2] == 0.0);
  for (const double x : d.d2[0]) CHECK(x == 0.0);
}

TEST_CASE("boundary edges carry zero drift and |d| <= 2/h holds") {
  const double h = 0.5;
  const Image v = random_positive(6, 5, 11);
  const DriftField d = canonical_drift(v, h);
  const std::size_t nx = v.nx, ny = v.ny;
  for (std::size_t j = 0; j < ny; ++j) {
    CHECK(d.d1[0][j * (nx + 1) + 0] == 0.0);
    CHECK(d.d1[0][j * (nx + 1) + nx] == 0.0);
  }
  for (std::size_t i = 0; i < nx; ++i) {
    CHECK(d.d2[0][0 * nx + i] == 0.0);
    CHECK(d.d2[0][ny * nx + i] == 0.0);
  }
  const double cap = 2.0 / h;
  for (const double x : d.d1[0]) CHECK(std::abs(x) <= cap);
  for (const double x : d.d2[0]) CHECK(std::abs(x) <= cap);
}

TEST_CASE("canonical drift rejects non-positive reference values") {
  Image v(3, 2, 1, 1.0);
  v.planes[0][4] = 0.0;
  CHECK_THROWS_AS(canonical_drift(v), std::invalid_argument);
  v.planes[0][4] = -0.25;
  CHECK_THROWS_AS(canonical_drift(v), std::invalid_argument);
}

TEST_CASE("zero drift assembles the 1-D Neumann Laplacian") {
  DriftField d(3, 1, 1, 1.0);
  const DirectionalOperator a = assemble_directional(d, Direction::X);
  CHECK(a.lo == std::vector<double>{0.0, 1.0, 1.0});
  CHECK(a.di == std::vector<double>{-1.0, -2.0, -1.0});
  CHECK(a.hi == std::vector<double>{1.0, 1.0, 0.0});
}

TEST_CASE("degenerate direction assembles the zero operator") {
  const Image v = random_positive(1, 4, 3);
  const DriftField d = canonical_drift(v);
  const DirectionalOperator a1 = assemble_directional(d, Direction::X);
  for (const double x : a1.lo) CHECK(x == 0.0);
  for (const double x : a1.di) CHECK(x == 0.0);
  for (const double x : a1.hi) CHECK(x == 0.0);
  const std::vector<double> u{1.0, 2.0, 3.0, 4.0};
  std::vector<double> y(4, 1.0);
  apply_operator(a1, u, y);
  for (const double x : y) CHECK(x == 0.0);
}

TEST_CASE("column sums vanish and off-diagonals are non-negative") {
  const Image v = random_positive(4, 5, 17);
  const DriftField d = canonical_drift(v);
  for (const Direction dir : {Direction::X, Direction::Y}) {
    const DirectionalOperator a = assemble_directional(d, dir);
    const std::size_t step = dir == Direction::X ? 1 : a.nx;
    for (std::size_t l = 0; l < a.size(); ++l) {
      CHECK(a.lo[l] >= 0.0);
      CHECK(a.hi[l] >= 0.0);
      // Column l collects hi of the previous pixel and lo of the next one
      // along the direction; the diagonal is their negated sum, so the
      // total is exactly zero, not merely small.
      const double prev_hi = l >= step ? a.hi[l - step] : 0.0;
      const double next_lo = l + step < a.size() ? a.lo[l + step] : 0.0;
      CHECK((prev_hi + next_lo) + a.di[l] == 0.0);
    }
  }
}

TEST_CASE("reference image is a steady state of the assembled operator") {
  const Image v = random_positive(9, 7, 29);
  const DriftField d = canonical_drift(v, 1.0);
  const DirectionalOperator a1 = assemble_directional(d, Direction::X);
  const DirectionalOperator a2 = assemble_directional(d, Direction::Y);
  std::vector<double> y(v.pixels()), scratch(v.pixels());
  apply_operator_pair(a1, a2, v.planes[0], y, scratch);
  CHECK(max_abs(y) < 1e-12 * max_abs(v.planes[0]));
}

TEST_CASE("zero-drift operator annihilates constant vectors") {
  // Pure diffusion has zero row sums as well as zero column sums; with
  // drift only the column sums vanish, so constants are not special there.
  DriftField d(5, 6, 1, 0.5);
  const std::vector<double> u(d.nx * d.ny, 3.25);
  std::vector<double> y(u.size()), scratch(u.size());
  const DirectionalOperator a1 = assemble_directional(d, Direction::X);
  const DirectionalOperator a2 = assemble_directional(d, Direction::Y);
  apply_operator_pair(a1, a2, u, y, scratch);
  CHECK(max_abs(y) == 0.0);
}

TEST_CASE("mass is conserved by the semigroup generator for any drift") {
  // Zero column sums: sum(A u) = 0 for every u, the conservation backbone.
  const Image v = random_positive(5, 6, 41);
  const DriftField d = canonical_drift(v);
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> u(v.pixels()), y(u.size()), scratch(u.size());
  for (double& x : u) x = dist(rng);
  const DirectionalOperator a1 = assemble_directional(d, Direction::X);
  const DirectionalOperator a2 = assemble_directional(d, Direction::Y);
  apply_operator_pair(a1, a2, u, y, scratch);
  double sum = 0.0;
  for (const double x : y) sum += x;
  CHECK(std::abs(sum) < 1e-13 * static_cast<double>(u.size()));
}

TEST_CASE("assembled operator matches a dense per-edge flux assembly") {
  const Image v = random_positive(3, 3, 53);
  const DriftField d = canonical_drift(v);
  const DirectionalOperator a1 = assemble_directional(d, Direction::X);
  const DirectionalOperator a2 = assemble_directional(d, Direction::Y);
  const std::vector<double> m = dense_from_fluxes(d);
  const std::size_t n = v.pixels();

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> u(n), y(n), scratch(n), yd(n, 0.0);
  for (double& x : u) x = dist(rng);
  apply_operator_pair(a1, a2, u, y, scratch);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) yd[r] += m[r * n + c] * u[c];
  for (std::size_t l = 0; l < n; ++l)
    CHECK(std::abs(y[l] - yd[l]) < 1e-13);

  // Entry-wise agreement too: both assemblies write each coefficient as one
  // rounded expression, so they coincide bitwise.
  for (std::size_t j = 0; j < v.ny; ++j)
    for (std::size_t i = 0; i < v.nx; ++i) {
      const std::size_t l = j * v.nx + i;
      if (i > 0) CHECK(a1.lo[l] == m[l * n + (l - 1)]);
      if (i + 1 < v.nx) CHECK(a1.hi[l] == m[l * n + (l + 1)]);
      if (j > 0) CHECK(a2.lo[l] == m[l * n + (l - v.nx)]);
      if (j + 1 < v.ny) CHECK(a2.hi[l] == m[l * n + (l + v.nx)]);
    }
}

TEST_CASE("apply_operator rejects mismatched vector lengths") {
  DriftField d(3, 2, 1, 1.0);
  const DirectionalOperator a = assemble_directional(d, Direction::X);
  std::vector<double> u(5, 0.0), y(6, 0.0);
  CHECK_THROWS_AS(apply_operator(a, u, y), std::invalid_argument);
}

TEST_CASE("empty mask leaves the drift bit-identical") {
  const Image v = random_positive(4, 4, 61);
  const DriftField d = canonical_drift(v);
  const EdgeMask mask(4, 4);
  const DriftField masked = mask_drift(d, mask);
  CHECK(masked.d1[0] == d.d1[0]);
  CHECK(masked.d2[0] == d.d2[0]);
}

TEST_CASE("full mask degenerates the drift to pure diffusion") {
  const Image v = random_positive(4, 3, 67);
  const DriftField d = canonical_drift(v);
  EdgeMask mask(4, 3);
  for (auto& b : mask.m1) b = 1;
  for (auto& b : mask.m2) b = 1;
  const DriftField masked = mask_drift(d, mask);
  for (const double x : masked.d1[0]) CHECK(x == 0.0);
  for (const double x : masked.d2[0]) CHECK(x == 0.0);
}

TEST_CASE("single masked edge zeroes exactly one entry") {
  const Image v = random_positive(5, 4, 71);
  const DriftField d = canonical_drift(v);
  EdgeMask mask(5, 4);
  const std::size_t hit = 1 * (5 + 1) + 2;  // interior vertical edge
  mask.m1[hit] = 1;
  const DriftField masked = mask_drift(d, mask);
  REQUIRE(d.d1[0][hit] != 0.0);
  CHECK(masked.d1[0][hit] == 0.0);
  for (std::size_t k = 0; k < d.d1[0].size(); ++k)
    if (k != hit) CHECK(masked.d1[0][k] == d.d1[0][k]);
  CHECK(masked.d2[0] == d.d2[0]);
}

TEST_CASE("mask_drift rejects mismatched mask dimensions") {
  DriftField d(4, 3, 1, 1.0);
  CHECK_THROWS_AS(mask_drift(d, EdgeMask(3, 4)), std::invalid_argument);
}

TEST_CASE("coordinate export round-trips the assembled entries") {
  const Image v = random_positive(3, 2, 73);
  const DriftField d = canonical_drift(v);
  const DirectionalOperator a = assemble_directional(d, Direction::X);
  std::ostringstream out;
  export_coo(a, out);

  const std::size_t n = a.size();
  std::vector<double> m(n * n, 0.0);
  std::istringstream in(out.str());
  std::size_t r, c;
  double val;
  std::size_t entries = 0;
  while (in >> r >> c >> val) {
    REQUIRE(r < n);
    REQUIRE(c < n);
    m[r * n + c] = val;
    ++entries;
  }
  // One diagonal per pixel plus two interior-edge couplings per row block.
  CHECK(entries == n + 2 * 2 * a.ny);
  for (std::size_t l = 0; l < n; ++l) {
    CHECK(m[l * n + l] == a.di[l]);
    if (l % a.nx != 0) CHECK(m[l * n + (l - 1)] == a.lo[l]);
    if (l % a.nx != a.nx - 1) CHECK(m[l * n + (l + 1)] == a.hi[l]);
  }
}

TEST_CASE("max_abs_diag reports the largest diagonal magnitude") {
  const Image v = random_positive(6, 4, 79);
  const DriftField d = canonical_drift(v);
  const DirectionalOperator a = assemble_directional(d, Direction::Y);
  double expect = 0.0;
  for (const double x : a.di) expect = std::max(expect, std::abs(x));
  CHECK(a.max_abs_diag() == expect);
}
