// Command line front door: parameter sweeps, the helium table, sampling
// runs, spectral probes, and the quick validation suite. Every subcommand
// writes CSV/JSON tables plus a manifest with the fully resolved
// configuration; deterministic subcommands rewrite byte-identical files on
// rerun, the sampler is reproducible under a fixed seed.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cyclelab/bounds.hpp"
#include "cyclelab/idealgas.hpp"
#include "cyclelab/io.hpp"
#include "cyclelab/kernels.hpp"
#include "cyclelab/latticegas.hpp"
#include "cyclelab/pimc.hpp"
#include "emit.hpp"

using namespace cyclelab;
using cycletool::RunContext;
using cycletool::Table;

namespace {

std::vector<double> parse_list_double(const std::string& text,
                                      const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      double v = std::stod(item, &used);
      while (used < item.size() && std::isspace(item[used])) ++used;
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw std::invalid_argument("config key '" + key +
                                  "': cannot parse list entry '" + item + "'");
    }
  }
  if (out.empty())
    throw std::invalid_argument("config key '" + key + "': empty list");
  return out;
}

std::vector<int> parse_list_int(const std::string& text,
                                const std::string& key) {
  std::vector<int> out;
  for (double v : parse_list_double(text, key)) {
    if (v != std::floor(v))
      throw std::invalid_argument("config key '" + key +
                                  "': expected integers");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

// Resolve every key a subcommand uses (writing defaults back) so the
// manifest records the complete effective configuration.
std::string resolve(io::Config& cfg, const std::string& key,
                    const std::string& fallback) {
  std::string v = cfg.get_or(key, fallback);
  cfg.set(key, v);
  return v;
}

double resolve_double(io::Config& cfg, const std::string& key,
                      double fallback) {
  double v = cfg.get_double_or(key, fallback);
  cfg.set(key, io::format_double(v));
  return v;
}

long long resolve_int(io::Config& cfg, const std::string& key,
                      long long fallback) {
  long long v = cfg.get_int_or(key, fallback);
  cfg.set(key, io::format_int(v));
  return v;
}

kernels::PotentialSpec resolve_potential(io::Config& cfg) {
  std::string kind = resolve(cfg, "potential", "zero");
  if (kind == "zero") return kernels::PotentialSpec::zero();
  if (kind == "gaussian")
    return kernels::PotentialSpec::gaussian(
        resolve_double(cfg, "amplitude", 1.0),
        resolve_double(cfg, "width", 0.5));
  if (kind == "soft-sphere")
    return kernels::PotentialSpec::soft_sphere(
        resolve_double(cfg, "amplitude", 1.0),
        resolve_double(cfg, "range", 0.5));
  if (kind == "lennard-jones")
    return kernels::PotentialSpec::lennard_jones(
        resolve_double(cfg, "epsilon", 1.0), resolve_double(cfg, "d0", 0.5));
  throw std::invalid_argument("config key 'potential': unknown kind '" +
                              kind + "'");
}

int reject_unused(const io::Config& cfg) {
  auto unused = cfg.unused_keys();
  if (unused.empty()) return 0;
  std::fprintf(stderr, "usage error: unknown config key '%s'\n",
               unused.front().c_str());
  return 2;
}

struct Check {
  std::string name;
  bool pass;
  std::string detail;
};

void print_checks(const std::vector<Check>& checks) {
  for (const auto& c : checks)
    std::printf("[%s] %-42s %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                c.detail.c_str());
}

int finish_checks(const RunContext& ctx, const std::string& table_name,
                  const std::vector<Check>& checks) {
  Table t;
  t.name = table_name;
  t.csv.header = {"check", "status", "detail"};
  for (const auto& c : checks)
    t.csv.add_row({c.name, c.pass ? "pass" : "fail", c.detail});
  cycletool::emit_tables(ctx, {t});
  print_checks(checks);
  int failures = 0;
  for (const auto& c : checks) failures += c.pass ? 0 : 1;
  return failures ? 1 : 0;
}

// ---------------------------------------------------------------- helium

int run_helium_table(io::Config& cfg, RunContext& ctx) {
  double density_cm3 = resolve_double(cfg, "density_per_cm3", 2.2e22);
  if (int rc = reject_unused(cfg)) return rc;
  ctx.resolved = cfg;
  double rho = density_cm3 * 1e-24;  // per cubic angstrom

  double coeff = constants::he4_lambda_coefficient_printed;
  double coeff_codata = constants::lambda_coefficient_angstrom(
      constants::he4_mass_amu);
  double zeta32 = kernels::zeta(1.5);

  struct Row {
    std::string quantity;
    double computed, codata, reference;
  };
  auto lam = [](double c, double t) { return c / std::sqrt(t); };
  double tc = 2.17;
  std::vector<Row> rows = {
      {"lambda_angstrom_at_4.22K", lam(coeff, 4.22), lam(coeff_codata, 4.22),
       4.22},
      {"lambda_angstrom_at_2.17K", lam(coeff, 2.17), lam(coeff_codata, 2.17),
       5.89},
      {"lambda_angstrom_at_1.50K", lam(coeff, 1.50), lam(coeff_codata, 1.50),
       7.05},
      {"rho_lambda3_at_2.17K", rho * std::pow(lam(coeff, tc), 3),
       rho * std::pow(lam(coeff_codata, tc), 3), 4.49},
      {"tc0_kelvin", coeff * coeff * std::pow(rho / zeta32, 2.0 / 3.0),
       coeff_codata * coeff_codata * std::pow(rho / zeta32, 2.0 / 3.0), 3.12},
      {"mean_spacing_angstrom", std::pow(rho, -1.0 / 3.0),
       std::pow(rho, -1.0 / 3.0), 3.57},
  };

  Table t;
  t.name = "helium_table";
  t.csv.header = {"quantity",        "computed", "reference",
                  "rel_deviation",   "codata",   "codata_rel_deviation"};
  bool ok = true;
  std::printf("%-28s %12s %12s %10s\n", "quantity", "computed", "reference",
              "dev");
  for (const auto& r : rows) {
    double dev = r.computed / r.reference - 1.0;
    double dev_codata = r.codata / r.reference - 1.0;
    ok = ok && std::fabs(dev) < 0.01;
    t.csv.add_row({r.quantity, io::format_double(r.computed),
                   io::format_double(r.reference), io::format_double(dev),
                   io::format_double(r.codata),
                   io::format_double(dev_codata)});
    std::printf("%-28s %12.5g %12.5g %9.3f%%\n", r.quantity.c_str(),
                r.computed, r.reference, 100 * dev);
  }
  cycletool::emit_tables(ctx, {t});
  if (!ok) std::fprintf(stderr, "helium table outside the 1%% window\n");
  return ok ? 0 : 1;
}

// ------------------------------------------------------------- ideal gas

int run_ideal_scan(io::Config& cfg, RunContext& ctx) {
  int dim = static_cast<int>(resolve_int(cfg, "dim", 3));
  double critical = 2.0 * kernels::zeta(dim / 2.0);
  std::vector<double> grid = parse_list_double(
      resolve(cfg, "rho_lambda_d", io::format_double(critical)),
      "rho_lambda_d");
  std::vector<int> ladder = parse_list_int(
      resolve(cfg, "ladder", "64,216,512,1000"), "ladder");
  double eps = resolve_double(cfg, "tail_eps", 0.1);
  double exponent = resolve_double(cfg, "head_exponent", 0.5);
  int limit_terms = static_cast<int>(resolve_int(cfg, "limit_terms", 200000));
  if (int rc = reject_unused(cfg)) return rc;
  ctx.resolved = cfg;

  struct PointResult {
    double rho;
    double deficit;
    std::vector<idealgas::ScanPoint> scan;
  };
  std::vector<PointResult> results(grid.size());
  cycletool::parallel_for(
      static_cast<int>(grid.size()), ctx.jobs, [&](int g) {
        results[g].rho = grid[g];
        results[g].deficit =
            idealgas::limit_cycle_distribution(grid[g], dim, limit_terms)
                .deficit();
        results[g].scan =
            idealgas::finite_size_scan(grid[g], dim, ladder, eps, exponent);
      });

  Table t;
  t.name = "ideal_scan";
  t.csv.header = {"rho_lambda_d",  "n_particles",
                  "box_over_lambda", "tail_fraction",
                  "head_sqrt",     "condensate_fraction",
                  "limit_deficit"};
  bool ok = true;
  for (const auto& r : results) {
    for (const auto& p : r.scan) {
      ok = ok && p.tail_fraction >= 0 && p.tail_fraction <= 1 + 1e-12 &&
           p.condensate_fraction >= 0 && p.condensate_fraction <= 1 + 1e-12;
      t.csv.add_row({io::format_double(r.rho), io::format_int(p.n_particles),
                     io::format_double(p.box_over_lambda),
                     io::format_double(p.tail_fraction),
                     io::format_double(p.head_sqrt),
                     io::format_double(p.condensate_fraction),
                     io::format_double(r.deficit)});
    }
  }
  cycletool::emit_tables(ctx, {t});
  std::printf("ideal-scan: %zu grid point(s), ladder of %zu written to %s\n",
              grid.size(), ladder.size(), ctx.out_dir.c_str());
  return ok ? 0 : 1;
}

int run_cycle_dist(io::Config& cfg, RunContext& ctx) {
  int dim = static_cast<int>(resolve_int(cfg, "dim", 3));
  int n = static_cast<int>(resolve_int(cfg, "n_particles", 256));
  double critical = 2.0 * kernels::zeta(dim / 2.0);
  double rho = resolve_double(cfg, "rho_lambda_d", critical);
  if (int rc = reject_unused(cfg)) return rc;
  ctx.resolved = cfg;

  double box_over_lambda = std::pow(n / rho, 1.0 / dim);
  SystemParams params = SystemParams::natural(dim, box_over_lambda, 1.0);
  params.with_count(n);
  auto table = idealgas::recursion_table(params, n);
  auto exact = idealgas::cycle_distribution_exact(table);
  auto limit = idealgas::limit_cycle_distribution(rho, dim, n);

  Table t;
  t.name = "cycle_dist";
  t.csv.header = {"n", "exact_mass", "limit_mass", "exact_cumulative"};
  double cum = 0.0;
  for (int k = 0; k < n; ++k) {
    cum += exact.mass[k];
    t.csv.add_row({io::format_int(k + 1), io::format_double(exact.mass[k]),
                   io::format_double(limit.mass[k]), io::format_double(cum)});
  }
  cycletool::emit_tables(ctx, {t});

  double closure = std::fabs(exact.total() - 1.0);
  std::printf("cycle-dist: N=%d exact mass closes to 1 within %.3e; "
              "limit deficit %.6f\n",
              n, closure, limit.deficit());
  return closure < 1e-9 ? 0 : 1;
}

// --------------------------------------------------------------- lattice

int run_lattice_ed(io::Config& cfg, RunContext& ctx) {
  lattice::LatticeParams base;
  base.dim = static_cast<int>(resolve_int(cfg, "dim", 3));
  base.box = static_cast<int>(resolve_int(cfg, "box", 2));
  std::vector<double> cs = parse_list_double(
      resolve(cfg, "anisotropy", "-1,0,0.5,1,2"), "anisotropy");
  std::vector<double> betas =
      parse_list_double(resolve(cfg, "beta", "0.5,2"), "beta");
  long half = base.sites() / 2;
  int n = static_cast<int>(resolve_int(cfg, "n_particles", half));
  if (int rc = reject_unused(cfg)) return rc;
  ctx.resolved = cfg;

  struct Point {
    double c, beta;
    double ph, mu;
    lattice::CondensateReport cond;
  };
  std::vector<Point> points;
  for (double c : cs)
    for (double b : betas) points.push_back({c, b, 0, 0, {}});

  cycletool::parallel_for(
      static_cast<int>(points.size()), ctx.jobs, [&](int idx) {
        Point& p = points[idx];
        lattice::LatticeParams lp = base;
        lp.anisotropy = p.c;
        lp.beta = p.beta;
        p.ph = lattice::particle_hole_residual(lp);
        p.mu = lattice::half_filling_mu(lp);
        p.cond = lattice::condensate_observable(lp, n);
      });

  Table t;
  t.name = "lattice_ed";
  t.csv.header = {"anisotropy",        "beta",
                  "sites",             "n_particles",
                  "ph_residual",       "half_filling_mu",
                  "n0_direct",         "n0_planar",
                  "identity_residual", "spin_bound_slack"};
  bool ok = true;
  for (const auto& p : points) {
    ok = ok && p.ph < 1e-10 && std::fabs(p.mu) < 1e-10 &&
         p.cond.identity_residual < 1e-10 && p.cond.spin_bound_slack >= -1e-12;
    t.csv.add_row({io::format_double(p.c), io::format_double(p.beta),
                   io::format_int(base.sites()), io::format_int(n),
                   io::format_double(p.ph), io::format_double(p.mu),
                   io::format_double(p.cond.n0_direct),
                   io::format_double(p.cond.n0_planar),
                   io::format_double(p.cond.identity_residual),
                   io::format_double(p.cond.spin_bound_slack)});
  }
  cycletool::emit_tables(ctx, {t});
  std::printf("lattice-ed: %zu points on the %d^%d torus; %s\n", points.size(),
              base.box, base.dim,
              ok ? "all identities hold" : "IDENTITY VIOLATION");
  return ok ? 0 : 1;
}

// ------------------------------------------------------------------ pimc

int run_pimc(io::Config& cfg, RunContext& ctx) {
  pimc::PimcConfig pc;
  int dim = static_cast<int>(resolve_int(cfg, "dim", 3));
  double box = resolve_double(cfg, "box", 1.5);
  double lambda = resolve_double(cfg, "lambda", 1.0);
  pc.system = SystemParams::natural(dim, box, lambda);
  pc.n_particles = static_cast<int>(resolve_int(cfg, "n_particles", 4));
  pc.system.with_count(pc.n_particles);
  pc.slices = static_cast<int>(resolve_int(cfg, "slices", 32));
  pc.sweeps = resolve_int(cfg, "sweeps", 20000);
  pc.equilibration_fraction =
      resolve_double(cfg, "equilibration_fraction", 0.2);
  pc.batches = static_cast<int>(resolve_int(cfg, "batches", 32));
  pc.measure_every = static_cast<int>(resolve_int(cfg, "measure_every", 1));
  pc.winding_shells = static_cast<int>(resolve_int(cfg, "winding_shells", 6));
  pc.potential = resolve_potential(cfg);
  pc.action_cap = resolve_double(
      cfg, "action_cap", std::numeric_limits<double>::infinity());
  pc.seed = ctx.seed ? ctx.seed
                     : static_cast<std::uint64_t>(resolve_int(cfg, "seed", 1));
  cfg.set("seed", io::format_int(static_cast<long long>(pc.seed)));
  std::string resume_from = resolve(cfg, "resume_from", "");
  if (int rc = reject_unused(cfg)) return rc;
  ctx.resolved = cfg;
  ctx.seed = pc.seed;

  // Geometry digest: a checkpoint may only continue a chain whose state
  // space is identical.
  io::Config geometry;
  geometry.set("dim", io::format_int(dim));
  geometry.set("box", io::format_double(box));
  geometry.set("lambda", io::format_double(lambda));
  geometry.set("n_particles", io::format_int(pc.n_particles));
  geometry.set("slices", io::format_int(pc.slices));
  geometry.set("potential", pc.potential.name());
  std::string state_digest = cycletool::config_digest(geometry);

  pimc::PimcResult result;
  if (!resume_from.empty()) {
    // Continue the chain from the saved state; the new run keeps its own
    // sweep schedule and statistics.
    result = pimc::estimate_cycles(
        pc, pimc::load_worldlines(resume_from, state_digest));
  } else {
    result = pimc::estimate_cycles(pc);
  }

  pimc::save_worldlines(result.final_state, ctx.out_dir + "/worldlines.bin",
                        state_digest);

  Table cycles;
  cycles.name = "pimc_cycles";
  cycles.csv.header = {"n", "probability", "std_error", "count"};
  for (int k = 0; k < pc.n_particles; ++k)
    cycles.csv.add_row({io::format_int(k + 1),
                        io::format_double(result.stats.probability[k]),
                        io::format_double(result.stats.std_error[k]),
                        io::format_int(result.stats.histogram[k])});

  auto mu = pimc::estimate_mu_ratio(result, pc);
  Table summary;
  summary.name = "pimc_summary";
  summary.csv.header = {"measurements",    "swap_merge_rate",
                        "swap_split_rate", "redraw_rate",
                        "translate_rate",  "mean_action",
                        "mu_ratio",        "mu_ratio_error",
                        "winding_truncation", "action_cap"};
  summary.csv.add_row(
      {io::format_int(result.stats.measurements),
       io::format_double(result.stats.swap_merge.rate()),
       io::format_double(result.stats.swap_split.rate()),
       io::format_double(result.stats.redraw.rate()),
       io::format_double(result.stats.translate.rate()),
       io::format_double(result.stats.mean_action),
       io::format_double(mu.available ? mu.value : 0.0),
       io::format_double(mu.available ? mu.std_error : 0.0),
       io::format_double(pimc::winding_truncation_ratio(
           pc.system.box_over_lambda(), pc.winding_shells)),
       io::format_double(pc.action_cap)});

  cycletool::emit_tables(ctx, {cycles, summary});

  bool ok = result.final_state.continuity_ok() &&
            result.stats.total_draws() ==
                result.stats.measurements * pc.n_particles;
  std::printf("pimc: %ld measurements, swap rates %.3f/%.3f, "
              "P(1)=%.4f+-%.4f\n",
              result.stats.measurements, result.stats.swap_merge.rate(),
              result.stats.swap_split.rate(), result.stats.probability[0],
              result.stats.std_error[0]);
  if (!ok) std::fprintf(stderr, "pimc: state invariant violated\n");
  return ok ? 0 : 1;
}

// ---------------------------------------------------------------- bounds

int run_bounds(io::Config& cfg, RunContext& ctx) {
  int dim = static_cast<int>(resolve_int(cfg, "dim", 3));
  double box = resolve_double(cfg, "box", 8.0);
  double lambda_ref = resolve_double(cfg, "lambda_ref", 1.0);
  std::vector<double> rhos = parse_list_double(
      resolve(cfg, "rho", "0.05,0.3,1,3,6"), "rho");
  std::vector<double> betas = parse_list_double(
      resolve(cfg, "beta", "0.25,0.5,1,2,4"), "beta");
  kernels::PotentialSpec u = resolve_potential(cfg);
  if (u.kind == kernels::PotentialSpec::Kind::zero)
    u = kernels::PotentialSpec::gaussian(
        resolve_double(cfg, "amplitude", 2.0),
        resolve_double(cfg, "width", 0.5));
  if (int rc = reject_unused(cfg)) return rc;
  ctx.resolved = cfg;

  struct Point {
    double rho, beta;
    bounds::BoundReport report;
  };
  std::vector<Point> points;
  for (double rho : rhos)
    for (double beta : betas) points.push_back({rho, beta, {}});

  cycletool::parallel_for(
      static_cast<int>(points.size()), ctx.jobs, [&](int idx) {
        Point& p = points[idx];
        // lambda scales as sqrt(beta); lambda_ref is the beta = 1 value.
        SystemParams params = SystemParams::natural(
            dim, box, lambda_ref * std::sqrt(p.beta), p.beta);
        params.with_density(p.rho);
        p.report = bounds::f_upper(p.rho, params, u);
      });

  Table t;
  t.name = "bounds";
  t.csv.header = {"rho",        "beta",   "f_zero",
                  "saturated",  "mean_field", "coarse",
                  "kernel_tail_bound", "mean_field_tighter"};
  bool ok = true;
  for (const auto& p : points) {
    ok = ok && std::isfinite(p.report.mean_field) &&
         p.report.mean_field >= p.report.f_zero - 1e-12;
    t.csv.add_row({io::format_double(p.rho), io::format_double(p.beta),
                   io::format_double(p.report.f_zero),
                   p.report.saturated ? "1" : "0",
                   io::format_double(p.report.mean_field),
                   io::format_double(p.report.coarse),
                   io::format_double(p.report.kernel_tail_bound),
                   p.report.mean_field_tighter ? "1" : "0"});
  }
  cycletool::emit_tables(ctx, {t});
  std::printf("bounds: %zu grid points for %s potential; %s\n", points.size(),
              u.name().c_str(),
              ok ? "upper bounds dominate the ideal term"
                 : "BOUND ORDER VIOLATION");
  return ok ? 0 : 1;
}

// ----------------------------------------------------------------- probe

int run_probe(io::Config& cfg, RunContext& ctx) {
  int grid = static_cast<int>(resolve_int(cfg, "grid", 16));
  int dim = static_cast<int>(resolve_int(cfg, "dim", 2));
  int count = static_cast<int>(resolve_int(cfg, "scatterers", 12));
  double min_distance = resolve_double(cfg, "min_distance", 2.5);
  double amplitude = resolve_double(cfg, "amplitude", 5.0);
  double width = resolve_double(cfg, "width", 1.0);
  double beta = resolve_double(cfg, "beta", 1.0);
  int depth = static_cast<int>(resolve_int(cfg, "probe_depth", 16));
  std::uint64_t seed = ctx.seed
                           ? ctx.seed
                           : static_cast<std::uint64_t>(
                                 resolve_int(cfg, "seed", 1));
  cfg.set("seed", io::format_int(static_cast<long long>(seed)));
  if (int rc = reject_unused(cfg)) return rc;
  ctx.resolved = cfg;
  ctx.seed = seed;

  auto scatterers =
      lattice::sample_scatterers(grid, dim, count, min_distance, seed);
  auto u = kernels::PotentialSpec::gaussian(amplitude, width);
  auto result =
      lattice::one_body_spectrum(grid, dim, scatterers, u, beta, depth);

  Table spectrum;
  spectrum.name = "probe_spectrum";
  spectrum.csv.header = {"index", "eigenvalue", "zero_mode_overlap_sq"};
  for (std::size_t j = 0; j < result.eigenvalues.size(); ++j)
    spectrum.csv.add_row({io::format_int(static_cast<long long>(j)),
                          io::format_double(result.eigenvalues[j]),
                          io::format_double(result.zero_mode_overlap_sq[j])});

  Table curve;
  curve.name = "probe_curve";
  curve.csv.header = {"duration_multiple", "excited_weight"};
  for (std::size_t k = 0; k < result.probe_curve.size(); ++k)
    curve.csv.add_row({io::format_int(static_cast<long long>(k + 1)),
                       io::format_double(result.probe_curve[k])});

  Table pts;
  pts.name = "probe_scatterers";
  pts.csv.header = {"index"};
  for (int j = 0; j < dim; ++j)
    pts.csv.header.push_back("x" + std::to_string(j));
  for (std::size_t s = 0; s < scatterers.size(); ++s) {
    std::vector<std::string> row{io::format_int(static_cast<long long>(s))};
    for (double x : scatterers[s]) row.push_back(io::format_double(x));
    pts.csv.add_row(std::move(row));
  }

  cycletool::emit_tables(ctx, {spectrum, curve, pts});

  double overlap_total = std::accumulate(result.zero_mode_overlap_sq.begin(),
                                         result.zero_mode_overlap_sq.end(),
                                         0.0);
  bool decreasing = true;
  for (std::size_t k = 1; k < result.probe_curve.size(); ++k)
    decreasing = decreasing &&
                 result.probe_curve[k] <= result.probe_curve[k - 1] + 1e-15;
  bool ok = std::fabs(overlap_total - 1.0) < 1e-9 &&
            result.ground_norm1_sq > 0.0 &&
            result.ground_norm1_sq <= 1.0 + 1e-12 && decreasing;
  std::printf("probe: %zu modes, zero-mode completeness residual %.2e, "
              "ground-state support %.4f\n",
              result.eigenvalues.size(), std::fabs(overlap_total - 1.0),
              result.ground_norm1_sq);
  return ok ? 0 : 1;
}

// -------------------------------------------------------------- selftest

int run_selftest(io::Config& cfg, RunContext& ctx) {
  if (int rc = reject_unused(cfg)) return rc;
  ctx.resolved = cfg;
  std::vector<Check> checks;
  auto push = [&](const std::string& name, bool pass, double value) {
    checks.push_back({name, pass, io::format_double(value)});
  };

  {
    double worst = 0.0;
    for (double a : {0.05, 0.3, 1.0, 4.0, 20.0}) {
      double direct = kernels::theta_sum(a);
      double dual = kernels::theta_sum(1.0 / a) / std::sqrt(a);
      worst = std::max(worst, std::fabs(direct - dual) / direct);
    }
    push("theta duality residual", worst < 1e-12, worst);
  }
  {
    double z = kernels::zeta(1.5);
    push("zeta(3/2)", std::fabs(z - 2.6123753486854883) < 1e-12, z);
  }
  {
    SystemParams p = SystemParams::natural(3, 2.0, 1.0);
    p.with_count(6);
    double worst = 0.0;
    auto table = idealgas::recursion_table(p, 6);
    for (int n = 1; n <= 6; ++n) {
      double log_brute = idealgas::brute_force_partition(p, n);
      double rel = std::fabs(std::expm1(table.logQ[n] - log_brute));
      worst = std::max(worst, rel);
    }
    push("recursion vs enumeration", worst < 1e-10, worst);
  }
  {
    double r = idealgas::resolution_identity_check(8);
    push("resolution identity", r < 1e-12, r);
  }
  {
    SystemParams p = SystemParams::natural(3, 4.0, 1.0);
    p.with_count(64);
    auto dist = idealgas::cycle_distribution_exact(
        idealgas::recursion_table(p, 64));
    double closure = std::fabs(dist.total() - 1.0);
    push("finite cycle closure", closure < 1e-12, closure);
  }
  {
    lattice::LatticeParams lp;
    lp.anisotropy = 0.5;
    lp.beta = 2.0;
    double ph = lattice::particle_hole_residual(lp);
    double mu = std::fabs(lattice::half_filling_mu(lp));
    auto cond = lattice::condensate_observable(lp, 4);
    push("lattice particle-hole", ph < 1e-10, ph);
    push("lattice half-filling mu", mu < 1e-10, mu);
    push("lattice zero-mode identity",
         cond.identity_residual < 1e-10 && cond.spin_bound_slack >= 0,
         cond.identity_residual);
  }
  {
    // The winding-image and momentum forms agree up to the analytic
    // truncation tail plus double-precision summation noise; the two parts
    // of the allowance are kept separate so the truncation bound stays a
    // statement about the mathematics, not the arithmetic.
    const double arithmetic_floor = 1e-13;
    double worst = 0.0;
    bool positive = true;
    for (int box : {4, 8}) {
      for (double beta : {0.1, 1.0, 10.0}) {
        double tail = lattice::bridge_winding_tail_bound(beta, box, 8);
        for (int x = 0; x < box; ++x) {
          std::vector<int> pt{x};
          double w = lattice::lattice_bridge(beta, pt, box, 8);
          double d = lattice::lattice_bridge_dft(beta, pt, box);
          positive = positive && w > 0.0;
          double resid = std::fabs(w - d);
          worst = std::max(worst, resid - tail);
        }
      }
    }
    push("bridge positivity and identity",
         positive && worst <= arithmetic_floor, worst);
  }
  {
    SystemParams p = SystemParams::natural(3, 4.0, 1.0);
    p.with_count(40);
    double r = bounds::qminus_residual(p, 40, 0.01, 0.05);
    push("surrogate partition identity", r < 1e-11, r);
  }
  {
    SystemParams p = SystemParams::natural(3, 4.0, 1.0);
    auto h = bounds::h_beta_kernel(0.0, p, 4000);
    double z = kernels::zeta(1.5);
    push("h kernel brackets zeta(3/2)",
         h.value < z && h.value + h.tail_bound > z, h.value);
  }
  {
    double coeff = constants::he4_lambda_coefficient_printed;
    double lam = coeff / std::sqrt(2.17);
    push("helium wavelength", std::fabs(lam / 5.89 - 1.0) < 0.01, lam);
  }
  {
    pimc::PimcConfig pc;
    pc.system = SystemParams::natural(3, 1.0, 0.8);
    pc.n_particles = 3;
    pc.slices = 8;
    auto audit = pimc::detailed_balance_audit(pc, 17);
    push("sampler balance audit", audit.residual < 1e-12, audit.residual);
  }
  {
    pimc::PimcConfig pc;
    pc.system = SystemParams::natural(3, 1.2, 1.0);
    pc.n_particles = 3;
    pc.slices = 8;
    pc.sweeps = 2000;
    pc.seed = 11;
    auto a = pimc::estimate_cycles(pc);
    auto b = pimc::estimate_cycles(pc);
    bool same = a.stats.histogram == b.stats.histogram &&
                a.final_state.beads == b.final_state.beads;
    push("sampler determinism", same, same ? 0.0 : 1.0);
  }

  return finish_checks(ctx, "selftest", checks);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cycle statistics laboratory for periodic quantum gases"};
  app.require_subcommand(1);

  struct Common {
    std::string config_path;
    std::string out_dir = ".";
    std::string format = "both";
    std::uint64_t seed = 0;
    int jobs = 1;
  };

  std::vector<std::pair<CLI::App*, std::shared_ptr<Common>>> subs;
  auto add_sub = [&](const std::string& name, const std::string& desc) {
    auto common = std::make_shared<Common>();
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", common->config_path,
                    "flat key=value parameter file");
    sub->add_option("--out", common->out_dir, "output directory");
    sub->add_option("--seed", common->seed, "seed override (sampling runs)");
    sub->add_option("--format", common->format, "csv|json|both")
        ->check(CLI::IsMember({"csv", "json", "both"}));
    sub->add_option("--jobs", common->jobs, "worker threads for grids")
        ->check(CLI::PositiveNumber);
    subs.push_back({sub, common});
    return sub;
  };

  CLI::App* helium = add_sub("helium-table",
                             "wavelength/critical-point table in kelvin and "
                             "angstrom, against reference values");
  CLI::App* ideal = add_sub("ideal-scan",
                            "finite-size ladder of tail/head/condensate "
                            "columns with the limit deficit");
  CLI::App* cdist = add_sub("cycle-dist",
                            "exact cycle-length distribution next to the "
                            "limit formula");
  CLI::App* lattice = add_sub("lattice-ed",
                              "even-torus sector diagonalization: symmetry "
                              "residuals and zero-mode identities");
  CLI::App* mc = add_sub("pimc", "world-line sampler for cycle statistics");
  CLI::App* bnd = add_sub("bounds", "free-energy upper bounds on a grid");
  CLI::App* prb = add_sub("probe",
                          "one-body spectra over scatterer configurations");
  CLI::App* self = add_sub("selftest", "fast cross-module validation suite");

  CLI11_PARSE(app, argc, argv);

  for (auto& [sub, common] : subs) {
    if (!sub->parsed()) continue;
    io::Config cfg;
    try {
      if (!common->config_path.empty())
        cfg = io::Config::load(common->config_path);
    } catch (const std::exception& e) {
      std::fprintf(stderr, "usage error: %s\n", e.what());
      return 2;
    }
    RunContext ctx;
    ctx.subcommand = sub->get_name();
    ctx.out_dir = common->out_dir;
    ctx.format = common->format;
    ctx.seed = common->seed;
    ctx.jobs = common->jobs;
    std::filesystem::create_directories(ctx.out_dir);
    try {
      int rc = 1;
      if (sub == helium) rc = run_helium_table(cfg, ctx);
      else if (sub == ideal) rc = run_ideal_scan(cfg, ctx);
      else if (sub == cdist) rc = run_cycle_dist(cfg, ctx);
      else if (sub == lattice) rc = run_lattice_ed(cfg, ctx);
      else if (sub == mc) rc = run_pimc(cfg, ctx);
      else if (sub == bnd) rc = run_bounds(cfg, ctx);
      else if (sub == prb) rc = run_probe(cfg, ctx);
      else if (sub == self) rc = run_selftest(cfg, ctx);
      return rc;
    } catch (const std::invalid_argument& e) {
      std::fprintf(stderr, "usage error: %s\n", e.what());
      return 2;
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return 1;
    }
  }
  return 2;
}
