#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "osmosis/drift.hpp"
#include "osmosis/image.hpp"
#include "osmosis/shadow.hpp"
#include "osmosis/simd/kernels.hpp"
#include "osmosis/steppers.hpp"
#include "osmosis/validation.hpp"

#ifndef OSMOSIS_VERSION
#define OSMOSIS_VERSION "0.0.0"
#endif

namespace {

using namespace osmosis;

struct GlobalFlags {
  std::string kernels = "auto";
  unsigned threads = 1;
};

struct EvolveFlags {
  std::string scheme = "douglas";
  double tau = 10.0;
  double T = 5000.0;
  double theta = 0.5;
  double epsilon = 1.0 / 255.0;
  double h = 1.0;
  std::string solver = "bicgstab";
  double krylov_tol = 1e-7;
  std::size_t krylov_maxiter = 300000;
};

struct SolveFlags {
  std::string input, reference, out, diagnostics_csv;
};

struct StudyFlags {
  std::vector<double> taus{0.05, 0.1, 0.2, 0.4, 0.8};
  double T = 10.0;
  std::vector<std::string> schemes{"pr", "douglas:0.5", "douglas:1", "be"};
  std::string grid = "32x40";
  std::string out_csv;
};

struct BenchFlags {
  std::vector<double> taus{0.1, 1.0, 10.0, 100.0};
  double T = 1000.0;
  std::vector<std::string> methods = default_bench_methods();
  std::string grid = "64x64";
  std::string input;
  std::size_t repeat = 1;
  bool parallel = false;
  std::string out_csv;
};

struct ShadowFlags {
  std::string input, mask, out;
  std::size_t dilate = 1;
};

void add_time_flags(CLI::App* cmd, EvolveFlags& fl) {
  cmd->add_option("--scheme", fl.scheme,
                  "fe | be | cn | full:<theta> | pr | douglas | "
                  "douglas:<theta>")
      ->capture_default_str();
  cmd->add_option("--tau", fl.tau, "time step")->capture_default_str();
  cmd->add_option("--T", fl.T, "final time")->capture_default_str();
  cmd->add_option("--theta", fl.theta,
                  "implicit weight for douglas/full schemes; a token with "
                  "an explicit :<theta> wins")
      ->capture_default_str();
}

void add_space_flags(CLI::App* cmd, EvolveFlags& fl) {
  cmd->add_option("--epsilon", fl.epsilon,
                  "positivity offset added to inputs and removed from "
                  "outputs")
      // full-precision 1/255; the 6-digit capture would not round-trip
      ->default_str("0.00392156862745098");
  cmd->add_option("--h", fl.h, "grid spacing")->capture_default_str();
}

void add_solver_flags(CLI::App* cmd, EvolveFlags& fl) {
  cmd->add_option("--solver", fl.solver,
                  "unsplit baseline solver: bicgstab | lu")
      ->check(CLI::IsMember({"bicgstab", "lu"}))
      ->capture_default_str();
  cmd->add_option("--krylov-tol", fl.krylov_tol,
                  "relative residual target of the bicgstab baseline")
      ->capture_default_str();
  cmd->add_option("--krylov-maxiter", fl.krylov_maxiter,
                  "iteration cap of the bicgstab baseline")
      ->capture_default_str();
}

SchemeConfig base_config(const EvolveFlags& fl, const GlobalFlags& g) {
  SchemeConfig cfg;
  cfg.tau = fl.tau;
  cfg.T = fl.T;
  cfg.theta = fl.theta;
  cfg.h = fl.h;
  cfg.baseline.solver = fl.solver == "lu" ? BaselineSolver::DenseLU
                                          : BaselineSolver::BiCGStab;
  cfg.baseline.krylov_tol = fl.krylov_tol;
  cfg.baseline.krylov_maxiter = fl.krylov_maxiter;
  cfg.threads = g.threads;
  return cfg;
}

std::pair<std::size_t, std::size_t> parse_grid(const std::string& text) {
  const auto pos = text.find_first_of("xX");
  std::size_t nx = 0, ny = 0;
  if (pos != std::string::npos && pos > 0 && pos + 1 < text.size()) {
    try {
      std::size_t ax = 0, ay = 0;
      nx = std::stoul(text.substr(0, pos), &ax);
      ny = std::stoul(text.substr(pos + 1), &ay);
      if (ax != pos || ay != text.size() - pos - 1) nx = 0;
    } catch (const std::exception&) {
      nx = 0;
    }
  }
  if (nx == 0 || ny == 0)
    throw std::invalid_argument("grid must look like 64x64, got '" + text +
                                "'");
  return {nx, ny};
}

void write_manifest(const std::string& path, const GlobalFlags& g,
                    const CLI::App* sub) {
  std::ofstream m(path);
  if (!m) throw std::runtime_error("cannot write manifest: " + path);
  m << "# osmosis " << OSMOSIS_VERSION << "\n";
  m << "kernels=" << g.kernels << "\n";
  m << "threads=" << g.threads << "\n\n";
  m << "[" << sub->get_name() << "]\n";
  m << sub->config_to_str(true, false);
  if (!m.good()) throw std::runtime_error("failed writing manifest: " + path);
}

void write_diagnostics_csv(const std::string& path,
                           const EvolutionReport& rep) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write diagnostics: " + path);
  os.precision(17);
  os << "step,channel,mean,min\n";
  for (std::size_t ch = 0; ch < rep.step_means.size(); ++ch)
    for (std::size_t k = 0; k < rep.step_means[ch].size(); ++k)
      os << (k + 1) << ',' << ch << ',' << rep.step_means[ch][k] << ','
         << rep.step_mins[ch][k] << '\n';
}

void report_warnings(const EvolutionReport& rep) {
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
}

int run_solve(const SolveFlags& s, const EvolveFlags& fl,
              const GlobalFlags& g, const CLI::App* sub) {
  const Image f = ensure_positive(load_image(s.input), fl.epsilon);
  const Image v = s.reference.empty()
                      ? f
                      : ensure_positive(load_image(s.reference), fl.epsilon);
  if (v.nx != f.nx || v.ny != f.ny)
    throw std::invalid_argument("reference dimensions differ from input");

  SchemeConfig cfg = with_scheme(base_config(fl, g), parse_scheme_token(fl.scheme));
  cfg.diagnostics = !s.diagnostics_csv.empty();

  const EvolutionReport rep = evolve(f, canonical_drift(v, fl.h), cfg);
  report_warnings(rep);
  save_image(remove_offset(rep.final_image), s.out);
  if (cfg.diagnostics) write_diagnostics_csv(s.diagnostics_csv, rep);
  write_manifest(s.out + ".manifest", g, sub);

  std::cout << "wrote " << s.out << ": " << rep.steps
            << " steps, factorization " << rep.factorization_seconds
            << " s, stepping " << rep.stepping_seconds << " s\n";
  if (rep.first_positivity_violation)
    std::cout << "first positivity violation at step "
              << *rep.first_positivity_violation << "\n";
  return 0;
}

int run_order_study(const StudyFlags& s, const EvolveFlags& fl,
                    const GlobalFlags& g, const CLI::App* sub) {
  const auto [nx, ny] = parse_grid(s.grid);
  const Image v = synthetic_bump(nx, ny);
  const Image f = constant_image(nx, ny, 1.2 * mean_value(v, 0));

  std::vector<SchemeSpec> specs;
  specs.reserve(s.schemes.size());
  for (const auto& token : s.schemes) specs.push_back(parse_scheme_token(token));

  const OrderStudyResult result =
      order_study(f, v, s.taus, s.T, specs, base_config(fl, g));

  std::ofstream csv(s.out_csv);
  if (!csv) throw std::runtime_error("cannot write CSV: " + s.out_csv);
  write_order_csv(result, csv);
  write_manifest(s.out_csv + ".manifest", g, sub);

  std::cout.precision(6);
  for (const auto& [scheme, slope] : result.slopes) {
    std::cout << "slope " << scheme << ": ";
    if (slope)
      std::cout << *slope << "\n";
    else
      std::cout << "absent (fewer than two usable points)\n";
  }
  std::cout << "wrote " << s.out_csv << "\n";
  return 0;
}

int run_bench(const BenchFlags& b, const EvolveFlags& fl,
              const GlobalFlags& g, const CLI::App* sub) {
  Image v;
  if (!b.input.empty()) {
    Image loaded = ensure_positive(load_image(b.input), fl.epsilon);
    if (loaded.channels != 1)
      throw std::invalid_argument("bench expects a grayscale input image");
    v = std::move(loaded);
  } else {
    const auto [nx, ny] = parse_grid(b.grid);
    v = synthetic_bump(nx, ny);
  }
  const Image f = constant_image(v.nx, v.ny, 1.2 * mean_value(v, 0));

  const std::vector<BenchRow> rows = bench_grid(
      f, v, b.taus, b.T, b.methods, base_config(fl, g), b.repeat, b.parallel);

  std::ofstream csv(b.out_csv);
  if (!csv) throw std::runtime_error("cannot write CSV: " + b.out_csv);
  write_bench_csv(rows, csv);
  write_manifest(b.out_csv + ".manifest", g, sub);

  const auto ok = static_cast<std::size_t>(std::count_if(
      rows.begin(), rows.end(),
      [](const BenchRow& r) { return r.status == "ok"; }));
  for (const auto& r : rows)
    if (r.status != "ok")
      std::cerr << "cell " << r.method << " tau=" << r.tau
                << " failed: " << r.status << "\n";
  std::cout << "wrote " << b.out_csv << " (" << ok << "/" << rows.size()
            << " cells ok)\n";
  if (ok == 0) {
    std::cerr << "error: every bench cell failed\n";
    return 1;
  }
  return 0;
}

int run_shadow(const ShadowFlags& s, const EvolveFlags& fl,
               const GlobalFlags& g, const CLI::App* sub) {
  const Image original = load_image(s.input);
  const Image f = ensure_positive(original, fl.epsilon);
  const ShadowMask mask = load_mask(s.mask, f.nx, f.ny, s.dilate);

  SchemeConfig cfg = with_scheme(base_config(fl, g), parse_scheme_token(fl.scheme));
  cfg.diagnostics = true;

  const EvolutionReport rep = remove_shadow_report(f, mask, cfg);
  report_warnings(rep);
  const Image out = remove_offset(rep.final_image);
  save_image(out, s.out);

  const std::string sidecar = s.out + ".diagnostics.txt";
  {
    std::ofstream os(sidecar);
    if (!os) throw std::runtime_error("cannot write diagnostics: " + sidecar);
    os.precision(17);
    os << "steps: " << rep.steps << "\n";
    os << "masked pixels: " << mask.marked_count() << "\n";
    for (std::size_t c = 0; c < out.channels; ++c) {
      const double mi = mean_value(original, c);
      const double mo = mean_value(out, c);
      os << "channel " << c << ": mean in " << mi << ", mean out " << mo
         << ", relative drift "
         << (mi != 0.0 ? std::abs(mo - mi) / std::abs(mi) : 0.0) << "\n";
    }
    double traj_min = std::numeric_limits<double>::infinity();
    for (const auto& mins : rep.step_mins)
      for (const double m : mins) traj_min = std::min(traj_min, m);
    os << "trajectory min (offset domain): " << traj_min << "\n";
    if (rep.first_positivity_violation)
      os << "first positivity violation: step "
         << *rep.first_positivity_violation << "\n";
    else
      os << "first positivity violation: none\n";
    for (const auto& w : rep.warnings) os << "warning: " << w << "\n";
    os << "factorization seconds: " << rep.factorization_seconds << "\n";
    os << "stepping seconds: " << rep.stepping_seconds << "\n";
  }
  write_manifest(s.out + ".manifest", g, sub);

  std::cout << "wrote " << s.out << " and " << sidecar << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Drift-diffusion (osmosis) image filtering: ADI evolution, "
               "order studies, benchmarks, shadow removal"};
  // --h (grid spacing) needs the short -h slot free.
  app.set_help_flag("--help", "print help");
  app.set_version_flag("--version", std::string("osmosis ") + OSMOSIS_VERSION);
  app.set_config("--config",
                 "")->description("re-run from a manifest written by a "
                                  "previous invocation");

  GlobalFlags global;
  app.add_option("--kernels", global.kernels,
                 "kernel table: auto | scalar | avx2 | neon")
      ->check(CLI::IsMember({"auto", "scalar", "avx2", "neon"}))
      ->capture_default_str();
  app.add_option("--threads", global.threads,
                 "channels evolved concurrently (1 = serial)")
      ->capture_default_str();

  SolveFlags solve_flags;
  EvolveFlags solve_evolve;
  CLI::App* solve = app.add_subcommand("solve", "evolve an image toward the "
                                                "steady state of a reference");
  solve->configurable();
  solve->set_help_flag("--help", "print help");
  solve->add_option("--input", solve_flags.input, "initial image (PGM/PPM)")
      ->required();
  solve->add_option("--reference", solve_flags.reference,
                    "reference image whose drift steers the evolution "
                    "(default: the input itself)");
  solve->add_option("--out", solve_flags.out, "output image path")->required();
  solve->add_option("--diagnostics", solve_flags.diagnostics_csv,
                    "write per-step mean/min CSV to this path");
  add_time_flags(solve, solve_evolve);
  add_space_flags(solve, solve_evolve);
  add_solver_flags(solve, solve_evolve);

  StudyFlags study_flags;
  EvolveFlags study_evolve;
  CLI::App* study = app.add_subcommand(
      "order-study", "convergence order vs the dense matrix-exponential "
                     "benchmark on a synthetic instance");
  study->configurable();
  study->set_help_flag("--help", "print help");
  study->add_option("--taus", study_flags.taus, "time steps to sweep")
      ->delimiter(',')
      ->capture_default_str();
  study->add_option("--T", study_flags.T, "final time")->capture_default_str();
  study->add_option("--schemes", study_flags.schemes,
                    "scheme tokens to compare")
      ->delimiter(',')
      ->capture_default_str();
  study->add_option("--grid", study_flags.grid, "synthetic grid size NXxNY")
      ->capture_default_str();
  study->add_option("--out-csv", study_flags.out_csv, "CSV output path")
      ->required();
  add_space_flags(study, study_evolve);
  add_solver_flags(study, study_evolve);

  BenchFlags bench_flags;
  EvolveFlags bench_evolve;
  CLI::App* bench = app.add_subcommand(
      "bench", "wall-time and accuracy grid: ADI schemes vs unsplit "
               "baselines");
  bench->configurable();
  bench->set_help_flag("--help", "print help");
  bench->add_option("--taus", bench_flags.taus, "time steps to sweep")
      ->delimiter(',')
      ->capture_default_str();
  bench->add_option("--T", bench_flags.T, "final time")->capture_default_str();
  bench->add_option("--methods", bench_flags.methods,
                    "bicgstab-full | lu-full | douglas-adi | pr-adi")
      ->delimiter(',')
      ->capture_default_str();
  bench->add_option("--grid", bench_flags.grid, "synthetic grid size NXxNY")
      ->capture_default_str();
  bench->add_option("--input", bench_flags.input,
                    "grayscale reference image (overrides --grid)");
  bench->add_option("--repeat", bench_flags.repeat,
                    "timing repeats per cell; best run wins")
      ->capture_default_str();
  bench->add_flag("--parallel", bench_flags.parallel,
                  "run cells concurrently (overlapping wall clocks)");
  bench->add_option("--out-csv", bench_flags.out_csv, "CSV output path")
      ->required();
  add_space_flags(bench, bench_evolve);
  add_solver_flags(bench, bench_evolve);

  ShadowFlags shadow_flags;
  EvolveFlags shadow_evolve;
  CLI::App* shadow = app.add_subcommand(
      "shadow", "remove a shadow given a boundary mask");
  shadow->configurable();
  shadow->set_help_flag("--help", "print help");
  shadow->add_option("--input", shadow_flags.input, "image (PGM/PPM)")
      ->required();
  shadow->add_option("--mask", shadow_flags.mask,
                     "PGM mask, boundary pixels brighter than 127/255")
      ->required();
  shadow->add_option("--dilate", shadow_flags.dilate,
                     "mask dilation radius in pixels")
      ->capture_default_str();
  shadow->add_option("--out", shadow_flags.out, "output image path")
      ->required();
  add_time_flags(shadow, shadow_evolve);
  add_space_flags(shadow, shadow_evolve);
  add_solver_flags(shadow, shadow_evolve);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints help/version or the error
    return code == 0 ? 0 : 2;
  }

  try {
    if (!osmosis::kernels::select(global.kernels)) {
      std::string names;
      for (const auto& n : osmosis::kernels::available())
        names += (names.empty() ? "" : ", ") + n;
      throw std::invalid_argument("kernel table '" + global.kernels +
                                  "' unavailable on this machine (have: " +
                                  names + ")");
    }
    if (*solve) return run_solve(solve_flags, solve_evolve, global, solve);
    if (*study) return run_order_study(study_flags, study_evolve, global, study);
    if (*bench) return run_bench(bench_flags, bench_evolve, global, bench);
    if (*shadow) return run_shadow(shadow_flags, shadow_evolve, global, shadow);
    std::cerr << app.help();
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
