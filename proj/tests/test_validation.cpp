#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "osmosis/drift.hpp"
#include "osmosis/image.hpp"
#include "osmosis/operators.hpp"
#include "osmosis/steppers.hpp"
#include "osmosis/validation.hpp"

using namespace osmosis;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::vector<std::string> fields_of(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream in(line);
  std::string field;
  while (std::getline(in, field, ',')) fields.push_back(field);
  return fields;
}

const OrderStudyRow* find_row(const OrderStudyResult& r,
                              const std::string& scheme, double tau) {
  for (const auto& row : r.rows)
    if (row.scheme == scheme && row.tau == tau) return &row;
  return nullptr;
}

std::optional<double> slope_of(const OrderStudyResult& r,
                               const std::string& scheme) {
  for (const auto& [name, slope] : r.slopes)
    if (name == scheme) return slope;
  return std::nullopt;
}

}  // namespace

TEST_CASE("synthetic images are deterministic and in range") {
  const Image b1 = synthetic_bump(16, 12);
  const Image b2 = synthetic_bump(16, 12);
  CHECK(b1.planes[0] == b2.planes[0]);
  for (const double x : b1.planes[0]) {
    CHECK(x > 0.5);
    CHECK(x <= 0.95);
  }

  const Image c = constant_image(5, 4, 0.25);
  for (const double x : c.planes[0]) CHECK(x == 0.25);

  const Image r1 = random_positive_image(10, 10, 99, 0.2, 0.9);
  const Image r2 = random_positive_image(10, 10, 99, 0.2, 0.9);
  const Image r3 = random_positive_image(10, 10, 100, 0.2, 0.9);
  CHECK(r1.planes[0] == r2.planes[0]);
  CHECK(r1.planes[0] != r3.planes[0]);
  for (const double x : r1.planes[0]) {
    CHECK(x >= 0.2);
    CHECK(x <= 0.9);
  }
  CHECK_THROWS_AS(random_positive_image(4, 4, 1, 0.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(random_positive_image(4, 4, 1, 0.5, 0.5),
                  std::invalid_argument);
}

TEST_CASE("conservation audit confirms mean and positivity for ADI") {
  const Image v = random_positive_image(12, 10, 501);
  const Image f = random_positive_image(12, 10, 503, 0.2, 1.0);
  const DriftField drift = canonical_drift(v);

  const auto a1 = assemble_directional(drift, Direction::X);
  const auto a2 = assemble_directional(drift, Direction::Y);
  PeacemanRachfordStepper probe(a1, a2, 1e-9);
  const double tau = 0.9 * probe.positivity_bound();

  SchemeConfig cfg;
  cfg.scheme = Scheme::PR;
  cfg.tau = tau;
  cfg.T = 50 * tau;
  const ConservationReport rep = conservation_audit(f, drift, cfg);
  CHECK(rep.steps == 50);
  CHECK(rep.max_relative_mean_drift < 1e-12);
  CHECK(rep.min_value >= 0.0);
  CHECK(!rep.first_positivity_violation.has_value());
  CHECK(rep.warnings.empty());

  double mean = 0.0;
  for (const double x : f.planes[0]) mean += x;
  mean /= static_cast<double>(f.pixels());
  CHECK(rep.initial_mean == doctest::Approx(mean).epsilon(1e-14));
}

TEST_CASE("conservation audit holds for Douglas at very large tau") {
  const Image v = random_positive_image(10, 10, 509);
  const Image f = random_positive_image(10, 10, 521, 0.2, 1.0);
  const DriftField drift = canonical_drift(v);
  SchemeConfig cfg;
  cfg.scheme = Scheme::Douglas;
  cfg.theta = 0.5;
  cfg.tau = 100.0;
  cfg.T = 2000.0;
  const ConservationReport rep = conservation_audit(f, drift, cfg);
  CHECK(rep.steps == 20);
  CHECK(rep.max_relative_mean_drift < 1e-12);
  CHECK(rep.warnings.empty());
}

TEST_CASE("conservation audit propagates the explicit stability rejection") {
  const Image v = random_positive_image(8, 8, 523);
  const Image f = random_positive_image(8, 8, 527, 0.2, 1.0);
  const DriftField drift = canonical_drift(v);
  SchemeConfig cfg;
  cfg.scheme = Scheme::FE;
  cfg.tau = 10.0;  // far beyond 1/max|a_ii|
  cfg.T = 100.0;
  CHECK_THROWS_AS(conservation_audit(f, drift, cfg), std::domain_error);
}

TEST_CASE("conservation audit tracks the weakest channel of color input") {
  Image f(8, 8, 3, 0.5);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t l = 0; l < f.pixels(); ++l)
      f.planes[c][l] = 0.2 + 0.1 * static_cast<double>(c) +
                       0.001 * static_cast<double>(l % 7);
  const Image v = random_positive_image(8, 8, 541);
  const DriftField drift = canonical_drift(v);
  SchemeConfig cfg;
  cfg.scheme = Scheme::Douglas;
  cfg.theta = 1.0;
  cfg.tau = 10.0;
  cfg.T = 100.0;
  const ConservationReport rep = conservation_audit(f, drift, cfg);
  double smallest = std::numeric_limits<double>::infinity();
  for (const auto& plane : f.planes) {
    double m = 0.0;
    for (const double x : plane) m += x;
    smallest = std::min(smallest, m / static_cast<double>(f.pixels()));
  }
  CHECK(rep.initial_mean == doctest::Approx(smallest).epsilon(1e-14));
  CHECK(rep.max_relative_mean_drift < 1e-12);
}

TEST_CASE("order study recovers the classical convergence rates") {
  // The canonical setup: constant start, smooth positive reference.
  const Image v = synthetic_bump(16, 14);
  const Image f = constant_image(16, 14, 0.75);
  const std::vector<double> taus{0.8, 0.4, 0.2, 0.1, 0.05};
  const std::vector<SchemeSpec> schemes{parse_scheme_token("pr"),
                                        parse_scheme_token("douglas:1"),
                                        parse_scheme_token("be")};
  const OrderStudyResult r = order_study(f, v, taus, 10.0, schemes);
  CHECK(r.rows.size() == schemes.size() * taus.size());

  const std::optional<double> pr = slope_of(r, "pr");
  REQUIRE(pr.has_value());
  CHECK(*pr == doctest::Approx(2.0).epsilon(0.15));

  const std::optional<double> dg = slope_of(r, "douglas:1");
  REQUIRE(dg.has_value());
  CHECK(*dg == doctest::Approx(1.0).epsilon(0.3));

  const std::optional<double> be = slope_of(r, "be");
  REQUIRE(be.has_value());
  CHECK(*be == doctest::Approx(1.0).epsilon(0.3));

  // The requested 0.8 cannot land on T = 10, so the row records the
  // effective step 10/13 that does.
  const OrderStudyRow* coarse = nullptr;
  for (const auto& row : r.rows)
    if (row.scheme == "douglas:1" && (!coarse || row.tau > coarse->tau))
      coarse = &row;
  REQUIRE(coarse != nullptr);
  CHECK(coarse->tau == 10.0 / 13.0);
  CHECK(coarse->theta == 1.0);
  CHECK(coarse->wall_seconds >= 0.0);
  CHECK(find_row(r, "douglas:1", 0.4) != nullptr);
  for (const auto& row : r.rows) CHECK(row.rrmse > 0.0);
}

TEST_CASE("a single tau yields rows but no slope") {
  const Image v = synthetic_bump(10, 9);
  const Image f = random_positive_image(10, 9, 557, 0.3, 0.9);
  const OrderStudyResult r =
      order_study(f, v, {0.5}, 5.0, {parse_scheme_token("pr")});
  CHECK(r.rows.size() == 1);
  REQUIRE(r.slopes.size() == 1);
  CHECK(!r.slopes[0].second.has_value());
}

TEST_CASE("order study validates its inputs") {
  const Image v = synthetic_bump(8, 8);
  const Image f = random_positive_image(8, 8, 563, 0.3, 0.9);
  const std::vector<SchemeSpec> schemes{parse_scheme_token("pr")};
  CHECK_THROWS_AS(order_study(f, synthetic_bump(9, 8), {0.5}, 5.0, schemes),
                  std::invalid_argument);
  CHECK_THROWS_AS(order_study(f, v, {}, 5.0, schemes), std::invalid_argument);
  CHECK_THROWS_AS(order_study(f, v, {0.5}, 5.0, {}), std::invalid_argument);
  CHECK_THROWS_AS(order_study(Image(8, 8, 3, 0.5), v, {0.5}, 5.0, schemes),
                  std::invalid_argument);
}

TEST_CASE("order CSV carries one row per cell and slope footers") {
  const Image v = synthetic_bump(10, 9);
  const Image f = random_positive_image(10, 9, 569, 0.3, 0.9);
  const OrderStudyResult r = order_study(
      f, v, {0.4, 0.2}, 4.0,
      {parse_scheme_token("pr"), parse_scheme_token("douglas:1")});
  std::ostringstream out;
  write_order_csv(r, out);
  const std::vector<std::string> lines = lines_of(out.str());
  REQUIRE(lines.size() == 1 + 4 + 2);
  CHECK(lines[0] == "scheme,theta,tau,rrmse,wall_seconds");
  for (int i = 1; i <= 4; ++i) {
    const auto fields = fields_of(lines[i]);
    REQUIRE(fields.size() == 5);
    CHECK((fields[0] == "pr" || fields[0] == "douglas:1"));
    CHECK(std::stod(fields[3]) > 0.0);
  }
  for (int i = 5; i <= 6; ++i) {
    const auto fields = fields_of(lines[i]);
    REQUIRE(fields.size() == 3);
    CHECK(fields[0] == "# slope");
    CHECK(fields[2] != "absent");
  }

  const OrderStudyResult single =
      order_study(f, v, {0.4}, 4.0, {parse_scheme_token("pr")});
  std::ostringstream out2;
  write_order_csv(single, out2);
  const std::vector<std::string> lines2 = lines_of(out2.str());
  CHECK(lines2.back() == "# slope,pr,absent");
}

TEST_CASE("bench grid runs every method and stays pairwise consistent") {
  const Image v = synthetic_bump(12, 12);
  const Image f = random_positive_image(12, 12, 571, 0.3, 0.9);
  const std::vector<BenchRow> rows =
      bench_grid(f, v, {10.0}, 100.0, default_bench_methods());
  REQUIRE(rows.size() == 4);
  double be_krylov = -1.0, be_lu = -1.0;
  for (const auto& row : rows) {
    CHECK(row.status == "ok");
    CHECK(row.wall_seconds >= 0.0);
    CHECK(std::isfinite(row.rrmse));
    CHECK(row.rrmse < 0.5);
    if (row.method == "bicgstab-full") be_krylov = row.rrmse;
    if (row.method == "lu-full") be_lu = row.rrmse;
    if (row.method == "bicgstab-full" || row.method == "lu-full")
      CHECK(row.theta == 1.0);
  }
  // Same scheme, two solvers: only the linear-solver tolerance separates
  // them.
  CHECK(std::abs(be_krylov - be_lu) < 1e-5);
}

TEST_CASE("bench grid rejects unknown methods before running") {
  const Image v = synthetic_bump(8, 8);
  const Image f = random_positive_image(8, 8, 577, 0.3, 0.9);
  CHECK_THROWS_AS(bench_grid(f, v, {1.0}, 10.0, {"pr-adi", "sor"}),
                  std::invalid_argument);
  CHECK_THROWS_AS(bench_grid(f, v, {}, 10.0, {"pr-adi"}),
                  std::invalid_argument);
  CHECK_THROWS_AS(bench_grid(f, v, {1.0}, 10.0, {"pr-adi"}, {}, 0),
                  std::invalid_argument);
}

TEST_CASE("a failing cell is recorded and the grid continues") {
  const Image v = synthetic_bump(12, 12);
  const Image f = random_positive_image(12, 12, 587, 0.3, 0.9);
  SchemeConfig base;
  base.baseline.krylov_maxiter = 1;
  base.baseline.krylov_tol = 1e-13;
  const std::vector<BenchRow> rows = bench_grid(
      f, v, {50.0}, 100.0, {"bicgstab-full", "lu-full"}, base);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].method == "bicgstab-full");
  CHECK(rows[0].status.find("did not converge") != std::string::npos);
  CHECK(std::isnan(rows[0].rrmse));
  CHECK(rows[1].status == "ok");
  CHECK(std::isfinite(rows[1].rrmse));
}

TEST_CASE("grids beyond the oracle cap run with an absent error measure") {
  const Image v = random_positive_image(65, 64, 593);  // 4160 > 4096
  const Image f = random_positive_image(65, 64, 599, 0.3, 0.9);
  const std::vector<BenchRow> rows =
      bench_grid(f, v, {50.0}, 100.0, {"douglas-adi"});
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].status == "ok");
  CHECK(rows[0].wall_seconds >= 0.0);
  CHECK(std::isnan(rows[0].rrmse));
}

TEST_CASE("bench CSV writes the schema with nan for absent measures") {
  BenchRow ok;
  ok.method = "pr-adi";
  ok.theta = 0.0;
  ok.tau = 2.0;
  ok.wall_seconds = 0.125;
  ok.rrmse = 1e-3;
  BenchRow failed;
  failed.method = "bicgstab-full";
  failed.theta = 1.0;
  failed.tau = 4.0;
  failed.wall_seconds = std::numeric_limits<double>::quiet_NaN();
  failed.rrmse = std::numeric_limits<double>::quiet_NaN();
  failed.status = "solver gave up";
  std::ostringstream out;
  write_bench_csv({ok, failed}, out);
  const std::vector<std::string> lines = lines_of(out.str());
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "method,theta,tau,wall_seconds,rrmse,status");
  const auto okf = fields_of(lines[1]);
  REQUIRE(okf.size() == 6);
  CHECK(okf[0] == "pr-adi");
  CHECK(okf[5] == "ok");
  const auto badf = fields_of(lines[2]);
  REQUIRE(badf.size() == 6);
  CHECK(badf[3] == "nan");
  CHECK(badf[4] == "nan");
  CHECK(badf[5] == "solver gave up");
}
