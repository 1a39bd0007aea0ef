#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <vector>

#include "cyclelab/kernels.hpp"
#include "cyclelab/pimc.hpp"

using namespace cyclelab;

namespace {
constexpr double pi = std::numbers::pi;

pimc::PimcConfig two_particle_config() {
  pimc::PimcConfig cfg;
  cfg.system = SystemParams::natural(3, 1.0, 0.9);
  cfg.n_particles = 2;
  cfg.slices = 8;
  cfg.sweeps = 40000;
  cfg.seed = 7;
  return cfg;
}
}  // namespace

TEST_CASE("initial state is continuous with identity permutation") {
  pimc::PimcConfig cfg = two_particle_config();
  cfg.n_particles = 5;
  auto state = pimc::initial_state(cfg);
  CHECK(state.continuity_ok());
  for (int i = 0; i < 5; ++i) {
    CHECK(state.perm[i] == i);
    CHECK(state.cycle_length(i) == 1);
    auto w = state.strand_winding(i);
    for (int v : w) CHECK(v == 0);
  }
}

TEST_CASE("bridge draw density equals its evaluation, bit for bit") {
  pimc::Rng rng(11);
  std::vector<double> x{0.2, 0.7, 0.4}, y{0.9, 0.1, 0.35};
  for (int rep = 0; rep < 50; ++rep) {
    auto draw = pimc::sample_bridge(x, y, 0.9, 1.0, 8, 6, rng);
    double ev = pimc::bridge_log_density(draw.path, y, 0.9, 1.0, 8, 6);
    CHECK(draw.log_density == ev);
  }
}

TEST_CASE("bridge midpoint variance matches the closed form") {
  // Pinned at both ends over duration beta, the time-midpoint variance per
  // axis is lambda^2/(8 pi); winding contributions are negligible at
  // lambda = L/5.
  pimc::Rng rng(3);
  std::vector<double> a{0.5}, b{0.5};
  const double lam = 0.2;
  const int slices = 16;
  double sum = 0, sum2 = 0;
  const int n = 200000;
  for (int k = 0; k < n; ++k) {
    auto d = pimc::sample_bridge(a, b, lam, 1.0, slices, 6, rng);
    double mid = d.path[slices / 2] - 0.5;
    sum += mid;
    sum2 += mid * mid;
  }
  double var = sum2 / n - (sum / n) * (sum / n);
  double expect = lam * lam / (8 * pi);
  CHECK(std::fabs(var / expect - 1.0) < 0.02);
}

TEST_CASE("redraw samples the exact winding distribution at lambda = L") {
  pimc::PimcConfig c1;
  c1.system = SystemParams::natural(1, 1.0, 1.0);
  c1.n_particles = 1;
  c1.slices = 8;
  auto s1 = pimc::initial_state(c1);
  pimc::Rng rng(5);
  pimc::MoveStats ms;
  long hits0 = 0, hits1 = 0;
  const long total = 50000;
  for (long k = 0; k < total; ++k) {
    pimc::move_redraw(s1, c1, rng, ms);
    int w = s1.strand_winding(0)[0];
    if (w == 0) ++hits0;
    if (std::abs(w) == 1) ++hits1;
  }
  CHECK(s1.continuity_ok());
  double theta = 0;
  for (int z = -8; z <= 8; ++z) theta += std::exp(-pi * z * z);
  CHECK(std::fabs(double(hits0) / total - 1.0 / theta) < 5e-3);
  CHECK(std::fabs(double(hits1) / total - 2 * std::exp(-pi) / theta) < 5e-3);
  // free-gas redraw is heat bath: every proposal accepted
  CHECK(ms.accepted == ms.proposed);
}

TEST_CASE("two-particle free gas matches the exact cycle algebra") {
  pimc::PimcConfig cfg = two_particle_config();
  auto result = pimc::estimate_cycles(cfg);
  CHECK(result.final_state.continuity_ok());

  double q1 = kernels::q_cycle(1, cfg.system);
  double q2 = kernels::q_cycle(2, cfg.system);
  double p1_exact = q1 * q1 / (q1 * q1 + q2);

  double p1 = result.stats.probability[0];
  double se = result.stats.std_error[0];
  REQUIRE(se > 0.0);
  CHECK(std::fabs(p1 - p1_exact) < 4 * se);

  auto mu = pimc::estimate_mu_ratio(result, cfg);
  REQUIRE(mu.available);
  double ratio_exact = 2 * q1 / (q1 * q1 + q2);
  CHECK(std::fabs(mu.value - ratio_exact) < 4 * mu.std_error);

  // sampled distribution mirrors the stats vector
  REQUIRE(result.distribution.mass.size() == 2);
  CHECK(result.distribution.provenance ==
        idealgas::CycleDistribution::Provenance::sampled);
  CHECK(result.distribution.mass[0] == p1);
}

TEST_CASE("runs are bit-reproducible under a fixed seed") {
  pimc::PimcConfig cfg = two_particle_config();
  cfg.sweeps = 4000;
  auto a = pimc::estimate_cycles(cfg);
  auto b = pimc::estimate_cycles(cfg);
  CHECK(a.stats.histogram == b.stats.histogram);
  CHECK(a.stats.action_batch_means == b.stats.action_batch_means);
  CHECK(a.final_state.beads == b.final_state.beads);
  CHECK(a.final_state.links == b.final_state.links);
  CHECK(a.final_state.perm == b.final_state.perm);

  cfg.seed = 8;
  auto c = pimc::estimate_cycles(cfg);
  CHECK(a.stats.histogram != c.stats.histogram);
}

TEST_CASE("merged chains pool like one long run") {
  pimc::PimcConfig cfg = two_particle_config();
  cfg.sweeps = 6000;
  auto a = pimc::estimate_cycles(cfg);
  cfg.seed = 19;
  auto b = pimc::estimate_cycles(cfg);

  auto ab = pimc::merge_stats(a.stats, b.stats);
  auto ba = pimc::merge_stats(b.stats, a.stats);
  CHECK(ab.measurements == a.stats.measurements + b.stats.measurements);
  CHECK(ab.histogram == ba.histogram);
  CHECK(ab.probability == ba.probability);
  CHECK(ab.std_error == ba.std_error);
  for (std::size_t k = 0; k < ab.histogram.size(); ++k)
    CHECK(ab.histogram[k] == a.stats.histogram[k] + b.stats.histogram[k]);
  // pooled estimate lies between the two chain estimates
  for (std::size_t k = 0; k < ab.probability.size(); ++k) {
    double lo = std::min(a.stats.probability[k], b.stats.probability[k]);
    double hi = std::max(a.stats.probability[k], b.stats.probability[k]);
    CHECK(ab.probability[k] >= lo - 1e-15);
    CHECK(ab.probability[k] <= hi + 1e-15);
  }
}

TEST_CASE("a run can be continued from an explicit state") {
  pimc::PimcConfig cfg = two_particle_config();
  cfg.sweeps = 3000;
  auto first = pimc::estimate_cycles(cfg);
  auto resumed = pimc::estimate_cycles(cfg, first.final_state);
  auto resumed2 = pimc::estimate_cycles(cfg, first.final_state);
  CHECK(resumed.stats.histogram == resumed2.stats.histogram);
  CHECK(resumed.final_state.beads == resumed2.final_state.beads);

  // mismatched geometry is refused
  pimc::PimcConfig other = cfg;
  other.slices = 16;
  CHECK_THROWS(pimc::estimate_cycles(other, first.final_state));
}

TEST_CASE("detailed balance audit, free and interacting") {
  pimc::PimcConfig ac;
  ac.system = SystemParams::natural(3, 1.0, 0.8);
  ac.n_particles = 3;
  ac.slices = 8;
  auto audit = pimc::detailed_balance_audit(ac, 99);
  CHECK(audit.residual < 1e-12);
  CHECK(std::fabs(audit.log_ratio_implementation - audit.log_ratio_explicit) ==
        audit.residual);

  ac.potential = kernels::PotentialSpec::gaussian(2.0, 0.3);
  auto audit2 = pimc::detailed_balance_audit(ac, 123);
  CHECK(audit2.residual < 1e-12);

  // several audit seeds, so the forced transposition hits different
  // split/merge geometries
  for (std::uint64_t s : {1ull, 17ull, 31ull})
    CHECK(pimc::detailed_balance_audit(ac, s).residual < 1e-12);
}

TEST_CASE("checkpoints round-trip and refuse foreign digests") {
  pimc::PimcConfig cfg = two_particle_config();
  cfg.sweeps = 2000;
  auto result = pimc::estimate_cycles(cfg);
  const char* path = "test_worldlines_roundtrip.bin";
  pimc::save_worldlines(result.final_state, path, "digest-abc");
  auto loaded = pimc::load_worldlines(path, "digest-abc");
  CHECK(loaded.beads == result.final_state.beads);
  CHECK(loaded.links == result.final_state.links);
  CHECK(loaded.perm == result.final_state.perm);
  CHECK(loaded.box == result.final_state.box);
  CHECK_THROWS(pimc::load_worldlines(path, "digest-xyz"));
  std::remove(path);
}

TEST_CASE("relabeling particles preserves every estimator ingredient") {
  pimc::PimcConfig cfg = two_particle_config();
  cfg.n_particles = 4;
  cfg.sweeps = 2000;
  auto result = pimc::estimate_cycles(cfg);
  std::vector<int> sigma{2, 0, 3, 1};
  auto rl = pimc::relabel(result.final_state, sigma);
  CHECK(rl.continuity_ok());
  for (int i = 0; i < 4; ++i)
    CHECK(rl.cycle_length(sigma[i]) == result.final_state.cycle_length(i));
}

TEST_CASE("action vanishes for the free gas and caps hard contacts") {
  pimc::PimcConfig cfg = two_particle_config();
  auto state = pimc::initial_state(cfg);
  CHECK(pimc::action(state, cfg) == 0.0);

  // with a potential and a finite cap, the trapezoid sum respects the cap
  pimc::PimcConfig capped = cfg;
  capped.potential = kernels::PotentialSpec::gaussian(50.0, 0.4);
  capped.action_cap = 3.0;
  double a = pimc::action(state, capped);
  CHECK(a > 0.0);
  CHECK(a <= capped.system.beta * 3.0 + 1e-12);

  // hard-core contact: both particles on the same straight line
  pimc::PimcConfig hard = cfg;
  hard.potential = kernels::PotentialSpec::lennard_jones(1.0, 0.3);
  auto contact = pimc::initial_state(hard);
  for (int m = 0; m <= hard.slices; ++m)
    for (int j = 0; j < 3; ++j)
      contact.bead(1, m)[j] = contact.bead(0, m)[j];
  CHECK(pimc::action(contact, hard) ==
        std::numeric_limits<double>::infinity());
}

TEST_CASE("trapezoid action converges at second order in the time step") {
  // A closed unit-winding path with a derivative kink at the junction and a
  // static spectator off the symmetry point of the periodized potential, so
  // the O(dt^2) Richardson coefficient is nonzero. Exact slice-count ratio
  // for (64 - 1024)/(128 - 1024) halving is 255/63 = 4.0476...
  auto make = [&](int slices) {
    pimc::PimcConfig c;
    c.system = SystemParams::natural(1, 1.0, 0.5);
    c.n_particles = 2;
    c.slices = slices;
    c.potential = kernels::PotentialSpec::gaussian(1.5, 0.35);
    auto s = pimc::initial_state(c);
    for (int m = 0; m <= slices; ++m) {
      double t = double(m) / slices;
      double u = 0.1 + t + 0.13 * std::sin(pi * t);
      long img = (long)std::floor(u);
      s.bead(0, m)[0] = u - img;
      if (m > 0) {
        long prev = (long)std::floor(0.1 + double(m - 1) / slices +
                                     0.13 * std::sin(pi * (m - 1) / slices));
        s.link(0, m - 1)[0] = int(img - prev);
      }
      s.bead(1, m)[0] = 0.37;
    }
    return std::pair{s, c};
  };
  auto [s64, c64] = make(64);
  auto [s128, c128] = make(128);
  auto [s1024, c1024] = make(1024);
  double a64 = pimc::action(s64, c64);
  double a128 = pimc::action(s128, c128);
  double a1024 = pimc::action(s1024, c1024);
  double ratio = (a64 - a1024) / (a128 - a1024);
  CHECK(ratio > 3.2);
  CHECK(ratio < 4.8);
}

TEST_CASE("winding truncation mass is negligible at the default shells") {
  CHECK(pimc::winding_truncation_ratio(1.0, 6) < 1e-15);
  // wider boxes only sharpen the discrete Gaussian
  CHECK(pimc::winding_truncation_ratio(4.0, 6) <
        pimc::winding_truncation_ratio(1.0, 6) + 1e-300);
  // a single shell at lambda = L drops real mass
  CHECK(pimc::winding_truncation_ratio(1.0, 1) > 1e-6);
}

TEST_CASE("configuration validation rejects malformed runs") {
  pimc::PimcConfig cfg = two_particle_config();
  cfg.slices = 12;  // not a power of two
  CHECK_THROWS(cfg.validate());
  cfg = two_particle_config();
  cfg.n_particles = 0;
  CHECK_THROWS(cfg.validate());
  cfg = two_particle_config();
  cfg.sweeps = 100;
  cfg.batches = 200;  // more batches than measurements
  CHECK_THROWS(pimc::estimate_cycles(cfg));
}

TEST_CASE("translate and swap moves preserve continuity under load") {
  pimc::PimcConfig cfg;
  cfg.system = SystemParams::natural(2, 1.3, 0.9);
  cfg.n_particles = 4;
  cfg.slices = 16;
  cfg.potential = kernels::PotentialSpec::gaussian(0.8, 0.4);
  auto state = pimc::initial_state(cfg);
  pimc::Rng rng(21);
  pimc::MoveStats merge, split, redraw, translate;
  for (int k = 0; k < 3000; ++k) {
    pimc::move_swap(state, cfg, rng, merge, split);
    pimc::move_redraw(state, cfg, rng, redraw);
    pimc::move_translate(state, cfg, rng, translate);
  }
  CHECK(state.continuity_ok());
  CHECK(merge.proposed + split.proposed == 3000);
  CHECK(translate.accepted > 0);
  // interacting gas: some swaps must be rejected by the action
  CHECK(merge.accepted + split.accepted < merge.proposed + split.proposed);
}
