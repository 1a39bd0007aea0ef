#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "cyclelab/kernels.hpp"

// The discrete-torus side of the laboratory: nearest-neighbor dispersion and
// heat kernels, positive bridge weights with their winding decomposition,
// the hard-core-boson / spin-1/2 family diagonalized exactly in particle
// sectors, and a one-body spectral probe of -Laplacian + V.

namespace cyclelab::lattice {

struct LatticeParams {
  int dim = 3;
  int box = 2;        // sites per axis; must be even
  double beta = 1.0;
  double anisotropy = 0.0;  // c in the -4c n n coupling
  // On-site repulsion. Infinite means hard core (at most one particle per
  // site, the spin-1/2 case); finite values switch to a bosonic basis with
  // per-site occupation capped at max_site_occupation.
  double onsite = std::numeric_limits<double>::infinity();
  int max_site_occupation = 2;

  void validate() const;
  long sites() const;
  bool hard_core() const;
};

// epsilon_k = 2 sum_j (1 - cos k_j), the nonnegative spectrum of the
// nearest-neighbor minus-Laplacian; range [0, 4d].
double dispersion(std::span<const double> k);

// (1/pi) int_0^pi exp(-2 tau (1 - cos k)) dk, the per-axis return weight of
// a continuous-time walk; equals e^{-2 tau} I_0(2 tau). Gauss-Legendre with
// 200 nodes, accurate to machine precision for tau up to ~1e3.
double hop_integral(double tau);

// Finite-box single-cycle weight sum_k e^{-n beta eps_k} (d-th power of the
// per-axis momentum sum) and its per-particle infinite-volume limit
// (1/rho) hop_integral(n beta)^d.
double lattice_q(int n, const LatticeParams& params);
double q_limit(double rho, int n, double beta, int dim);

// Torus heat-kernel weight of an integer displacement x over time beta.
// lattice_bridge sums continuum_bridge over winding images (every term
// positive, so positivity survives roundoff); lattice_bridge_dft evaluates
// the same object through the momentum sum and serves as the independent
// cross-check. continuum_bridge is prod_j e^{-2 beta} I_{x_j}(2 beta) by the
// ascending Bessel series; the quadrature variant is its oracle.
double continuum_bridge(double beta, std::span<const int> x);
double continuum_bridge_quadrature(double beta, std::span<const int> x);
double lattice_bridge(double beta, std::span<const int> x, int box,
                      int windings = 8);
double lattice_bridge_dft(double beta, std::span<const int> x, int box);

// Certified bound on the per-axis winding mass dropped by truncating the
// image sum at |z| <= windings, maximized over displacements in the cell.
double bridge_winding_tail_bound(double beta, int box, int windings);

// Sum over n <= cutoff of |q_n/N - q_limit(rho, n beta)| on a ladder of box
// sizes at fixed density; cutoff = floor(N^exponent).
struct KnScanPoint {
  int box;
  long n_particles;
  int cutoff;
  double deviation_sum;
};
std::vector<KnScanPoint> kn_scan(double rho, double beta, int dim,
                                 std::span<const int> boxes, double exponent);

// One particle-number sector of the lattice Hamiltonian
//   H = sum_bonds [ -2(s+_x s-_y + s+_y s-_x) - 4c n_x n_y + 2c(n_x + n_y) ]
// (directed bond multiset (x, x+e_j); at box = 2 each pair appears twice),
// plus (u0/2) sum_x n_x(n_x - 1) when the core is soft. Basis states are
// occupation configurations; the matrix is real symmetric.
struct SpinSector {
  LatticeParams params;
  int n_particles = 0;
  long dimension = 0;
  // Hard core: bitmask per basis state. Soft core: packed per-site counts.
  std::vector<std::uint64_t> basis_masks;
  std::vector<std::vector<std::uint8_t>> basis_counts;

  // Sparse symmetric matrix, one entry per stored element (both triangles).
  struct Entry {
    long row;
    long col;
    double value;
  };
  std::vector<Entry> matrix_entries;

  bool diagonalized = false;
  std::vector<double> eigenvalues;   // ascending
  std::vector<double> eigenvectors;  // column j = eigenvector j, row-major
};

SpinSector build_sector(const LatticeParams& params, int n_particles);
void diagonalize(SpinSector& sector);

// log sum_i e^{-beta E_i} over the sector spectrum.
double sector_log_partition(const SpinSector& sector, double beta);

// max over N of |log Q_N - log Q_{V-N}| (occupied/empty exchange symmetry).
double particle_hole_residual(const LatticeParams& params);

// Symmetric-difference chemical potential (log Q_{N-1} - log Q_{N+1})/(2 beta)
// at half filling; zero exactly by the same symmetry.
double half_filling_mu(const LatticeParams& params);

// Zero-momentum occupation of the thermal state in sector N, evaluated two
// independent ways: directly as P+ P- / V, and through the planar spin form
// (1/2)(P+ P- + P- P+) + S3 with the scalar counterterm S3 = N - V/2. Also
// reports the slack of <S(S+1)> <= (V/2)(V/2 + 1), whose nonnegativity is
// the finite-size occupation bound.
struct CondensateReport {
  double n0_direct;
  double n0_planar;
  double identity_residual;
  double spin_bound_slack;
};
CondensateReport condensate_observable(const LatticeParams& params,
                                       int n_particles);

// Dense spectrum of -Delta + V on the d-dimensional grid torus, V built by
// summing the periodized pair potential over a scatterer point set. Reports
// the overlaps of each eigenvector with the uniform (zero-momentum) state,
// the ground-state L1-norm-squared normalized so a plane wave gives 1, and
// the excited-state decay curve sum_{j>=1} e^{-n beta (E_j - E_0)} for
// n = 1..probe_depth (a diagnostic, not a pass/fail object).
struct OneBodyResult {
  std::vector<double> eigenvalues;
  std::vector<double> zero_mode_overlap_sq;
  std::vector<double> ground_state;  // sign-fixed to nonnegative mean
  double ground_norm1_sq = 0.0;
  std::vector<double> probe_curve;
};
OneBodyResult one_body_spectrum(int grid, int dim,
                                const std::vector<std::vector<double>>& scatterers,
                                const kernels::PotentialSpec& u, double beta,
                                int probe_depth);

// Hard-core (minimum-distance) point process on the torus for probe inputs;
// deterministic in the seed, rejection sampling with a fixed attempt budget.
std::vector<std::vector<double>> sample_scatterers(int grid, int dim,
                                                   int count,
                                                   double min_distance,
                                                   std::uint64_t seed);

}  // namespace cyclelab::lattice
