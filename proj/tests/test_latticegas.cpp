#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "cyclelab/latticegas.hpp"

using namespace cyclelab;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST_CASE("hop integral endpoints and Bessel identity") {
  // quadrature of the constant integrand lands within an ulp of 1
  CHECK(std::fabs(lattice::hop_integral(0.0) - 1.0) < 1e-14);
  CHECK(std::fabs(lattice::hop_integral(1.0) - 0.30850832255367104) < 1e-13);
  // (1/pi) int e^{-2t(1-cos k)} dk = e^{-2t} I_0(2t) = continuum weight of a
  // zero displacement, so the quadrature and the series must coincide.
  for (double tau : {0.05, 0.7, 3.0, 20.0}) {
    std::vector<int> zero{0};
    CHECK(std::fabs(lattice::hop_integral(tau) -
                    lattice::continuum_bridge(tau, zero)) <= 1e-13);
  }
}

TEST_CASE("dispersion range and symmetry") {
  std::vector<double> gamma{0.0, 0.0, 0.0};
  CHECK(lattice::dispersion(gamma) == 0.0);
  std::vector<double> corner{pi, pi, pi};
  CHECK(std::fabs(lattice::dispersion(corner) - 12.0) < 1e-12);
  std::vector<double> k{0.4, 1.1};
  std::vector<double> mk{-0.4, -1.1};
  CHECK(lattice::dispersion(k) == lattice::dispersion(mk));
}

TEST_CASE("continuum bridge series equals its quadrature oracle") {
  for (int n : {0, 1, 5, 12}) {
    std::vector<int> x{n};
    double series = lattice::continuum_bridge(2.0, x);
    double quad = lattice::continuum_bridge_quadrature(2.0, x);
    // the quadrature works with an O(1) integrand, so its error is absolute;
    // small series values need the additive floor, not a pure relative bound
    CHECK(std::fabs(series - quad) <= 1e-12 * series + 1e-15);
  }
  // multi-axis factorization
  std::vector<int> xy{2, 3};
  std::vector<int> x2{2}, x3{3};
  CHECK(std::fabs(lattice::continuum_bridge(1.3, xy) -
                  lattice::continuum_bridge(1.3, x2) *
                      lattice::continuum_bridge(1.3, x3)) < 1e-15);
}

TEST_CASE("torus bridge: positivity and the winding/momentum identity") {
  // The analytic tail bound covers the truncated winding images; the extra
  // floor covers double-precision summation of the two independent forms.
  const double arithmetic_floor = 1e-13;
  for (int box : {4, 8, 16}) {
    for (double beta : {0.1, 1.0, 10.0}) {
      double tail = lattice::bridge_winding_tail_bound(beta, box, 8);
      for (int d = 1; d <= 3; ++d) {
        std::vector<int> x(d);
        for (int j = 0; j < d; ++j) x[j] = (j + 1) % box;
        double w = lattice::lattice_bridge(beta, x, box, 8);
        double dft = lattice::lattice_bridge_dft(beta, x, box);
        CHECK(w > 0.0);
        CHECK(std::fabs(w - dft) <= d * tail + arithmetic_floor);
      }
    }
  }
}

TEST_CASE("bridge window truncation is insensitive to the representative") {
  // x and x - box label the same displacement; the truncated sums must be
  // bit-identical because the window is centered on the reduced value.
  std::vector<int> a{3}, b{-1};
  CHECK(lattice::lattice_bridge(2.0, a, 4, 8) ==
        lattice::lattice_bridge(2.0, b, 4, 8));
  std::vector<int> c{7}, e{-9};
  CHECK(lattice::lattice_bridge(5.0, c, 8, 6) ==
        lattice::lattice_bridge(5.0, e, 8, 6));
}

TEST_CASE("zero displacement ties the bridge to the single-cycle weight") {
  lattice::LatticeParams params;
  params.dim = 3;
  params.box = 4;
  params.beta = 0.8;
  std::vector<int> zero{0, 0, 0};
  double w = lattice::lattice_bridge_dft(0.8, zero, 4);
  double q1 = lattice::lattice_q(1, params);
  CHECK(std::fabs(w - q1 / std::pow(4.0, 3)) <= 1e-14 * w);
}

TEST_CASE("finite-size cycle weights approach the density-scaled limit") {
  std::vector<int> boxes{4, 8, 16};
  auto scan = lattice::kn_scan(0.5, 1.0, 3, boxes, 0.5);
  REQUIRE(scan.size() == 3);

  // Frozen values; the deviation sum must shrink as the box grows when the
  // cutoff stays sublinear in N.
  const double dev[] = {0.10025721487530681, 0.030387671779924769,
                        0.007326586455686135};
  for (int i = 0; i < 3; ++i) {
    CHECK(scan[i].box == boxes[i]);
    CHECK(std::fabs(scan[i].deviation_sum - dev[i]) < 1e-12);
  }
  CHECK(scan[0].deviation_sum > scan[1].deviation_sum);
  CHECK(scan[1].deviation_sum > scan[2].deviation_sum);

  // Control: a cutoff proportional to N itself does not converge.
  auto ctrl = lattice::kn_scan(0.5, 1.0, 3, boxes, 1.0);
  const double cdev[] = {0.921090276563993, 0.95131029632555952,
                         0.97402675259739724};
  for (int i = 0; i < 3; ++i)
    CHECK(std::fabs(ctrl[i].deviation_sum - cdev[i]) < 1e-12);
  CHECK(ctrl[2].deviation_sum > ctrl[0].deviation_sum);
}

TEST_CASE("one-particle sector reproduces the shifted dispersion") {
  lattice::LatticeParams p;
  p.dim = 2;
  p.box = 4;
  p.anisotropy = 0.7;
  auto sector = lattice::build_sector(p, 1);
  lattice::diagonalize(sector);
  REQUIRE(sector.dimension == 16);

  std::vector<double> expect;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      std::vector<double> k{2 * pi * a / 4, 2 * pi * b / 4};
      expect.push_back(2 * lattice::dispersion(k) - 4 * 2 * (1 - 0.7));
    }
  std::sort(expect.begin(), expect.end());
  for (int i = 0; i < 16; ++i)
    CHECK(std::fabs(expect[i] - sector.eigenvalues[i]) < 1e-10);
}

TEST_CASE("exchange symmetries across the coupling grid") {
  for (double c : {-1.0, 0.0, 0.5, 1.0, 2.0}) {
    for (double beta : {0.5, 2.0}) {
      lattice::LatticeParams p;
      p.dim = 3;
      p.box = 2;
      p.beta = beta;
      p.anisotropy = c;
      CHECK(lattice::particle_hole_residual(p) <= 1e-10);
      CHECK(std::fabs(lattice::half_filling_mu(p)) <= 1e-10);
    }
  }
}

TEST_CASE("zero-momentum occupation: identity, bound, frozen value") {
  lattice::LatticeParams p;
  p.dim = 3;
  p.box = 2;
  p.beta = 2.0;
  p.anisotropy = 0.5;
  auto rep = lattice::condensate_observable(p, 4);
  CHECK(std::fabs(rep.n0_direct - 2.4706494792089049) < 1e-11);
  CHECK(rep.identity_residual <= 1e-10);
  CHECK(rep.spin_bound_slack >= 0.0);

  for (double c : {-1.0, 0.0, 1.0, 2.0}) {
    lattice::LatticeParams q = p;
    q.anisotropy = c;
    for (int n : {1, 2, 4, 6}) {
      auto r = lattice::condensate_observable(q, n);
      CHECK(r.identity_residual <= 1e-10);
      CHECK(r.spin_bound_slack >= 0.0);
      CHECK(r.n0_direct > 0.0);
    }
  }
}

TEST_CASE("soft core approaches the hard core as the repulsion diverges") {
  lattice::LatticeParams hard;
  hard.dim = 3;
  hard.box = 2;
  hard.beta = 2.0;
  hard.anisotropy = 0.5;
  lattice::LatticeParams soft = hard;
  soft.onsite = 1e8;
  auto hs = lattice::build_sector(hard, 3);
  auto ss = lattice::build_sector(soft, 3);
  lattice::diagonalize(hs);
  lattice::diagonalize(ss);
  CHECK(ss.dimension > hs.dimension);  // doubly-occupied states present
  CHECK(std::fabs(hs.eigenvalues[0] - ss.eigenvalues[0]) < 1e-5);
}

TEST_CASE("sector partition function agrees with a direct trace") {
  lattice::LatticeParams p;
  p.dim = 1;
  p.box = 4;
  p.beta = 1.7;
  p.anisotropy = -0.3;
  auto sector = lattice::build_sector(p, 2);
  lattice::diagonalize(sector);
  double direct = 0.0;
  for (double e : sector.eigenvalues) direct += std::exp(-1.7 * e);
  CHECK(std::fabs(lattice::sector_log_partition(sector, 1.7) -
                  std::log(direct)) < 1e-12);
}

TEST_CASE("scatterer sampling is deterministic and respects the core") {
  auto a = lattice::sample_scatterers(8, 3, 5, 1.5, 42);
  auto b = lattice::sample_scatterers(8, 3, 5, 1.5, 42);
  CHECK(a == b);
  auto c = lattice::sample_scatterers(8, 3, 5, 1.5, 43);
  CHECK(a != c);
  REQUIRE(a.size() == 5);

  // pairwise torus distances respect the minimum
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      double d2 = 0.0;
      for (int axis = 0; axis < 3; ++axis) {
        double d = std::fabs(a[i][axis] - a[j][axis]);
        d = std::min(d, 8.0 - d);
        d2 += d * d;
      }
      CHECK(std::sqrt(d2) >= 1.5);
    }
}

TEST_CASE("one-body spectrum: completeness, positivity, decay") {
  auto pts = lattice::sample_scatterers(8, 3, 5, 1.5, 42);
  auto probe = lattice::one_body_spectrum(
      8, 3, pts, kernels::PotentialSpec::soft_sphere(4.0, 1.2), 0.5, 6);
  REQUIRE(probe.eigenvalues.size() == 512);

  CHECK(std::is_sorted(probe.eigenvalues.begin(), probe.eigenvalues.end()));

  double total = 0.0;
  for (double o : probe.zero_mode_overlap_sq) total += o;
  CHECK(std::fabs(total - 1.0) < 1e-9);

  // ground state of -Delta + V is nodeless
  double gmin = 1e300;
  for (double g : probe.ground_state) gmin = std::min(gmin, g);
  CHECK(gmin >= 0.0);
  CHECK(probe.ground_norm1_sq > 0.0);
  CHECK(probe.ground_norm1_sq <= 1.0 + 1e-12);

  REQUIRE(probe.probe_curve.size() == 6);
  for (std::size_t i = 1; i < probe.probe_curve.size(); ++i)
    CHECK(probe.probe_curve[i] <= probe.probe_curve[i - 1] + 1e-15);
}

TEST_CASE("free one-body spectrum concentrates on the zero mode") {
  std::vector<std::vector<double>> none;
  auto free = lattice::one_body_spectrum(
      6, 2, none, kernels::PotentialSpec::zero(), 1.0, 3);
  CHECK(std::fabs(free.eigenvalues[0]) < 1e-12);
  CHECK(std::fabs(free.zero_mode_overlap_sq[0] - 1.0) < 1e-12);
  double rest = 0.0;
  for (std::size_t i = 1; i < free.zero_mode_overlap_sq.size(); ++i)
    rest += free.zero_mode_overlap_sq[i];
  CHECK(rest < 1e-10);
}

TEST_CASE("parameter validation refuses odd boxes and bad couplings") {
  lattice::LatticeParams p;
  p.box = 3;
  CHECK_THROWS(p.validate());
  lattice::LatticeParams q;
  q.dim = 0;
  CHECK_THROWS(q.validate());
  lattice::LatticeParams r;
  r.beta = -1.0;
  CHECK_THROWS(r.validate());
}
