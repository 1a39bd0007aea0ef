#pragma once

#include <span>
#include <vector>

#include "cyclelab/kernels.hpp"

// Exact and limiting permutation-cycle statistics of the noninteracting Bose
// gas in a periodic box: the canonical recursion in log domain, brute-force
// cross-checks, the chemical-potential solver, the infinite-volume cycle
// distribution with its percolation deficit, and finite-size scans that show
// the deficit emerging as N grows at fixed density.

namespace cyclelab::idealgas {

// log Q_0 .. log Q_N of the free canonical recursion
// Q_M = (1/M) sum_{n=1}^{M} q_n Q_{M-n}, evaluated by log-sum-exp.
struct RecursionTable {
  SystemParams params;
  std::vector<double> logQ;   // index M = 0..N
  std::vector<double> log_q;  // index n = 1..N; log_q[0] unused

  int size() const { return static_cast<int>(logQ.size()) - 1; }
  // Q_{m-1}/Q_m, the canonical finite-size fugacity-like ratio.
  double ratio_down(int m) const;
};

RecursionTable recursion_table(const SystemParams& params, int n_particles);

// log Q_N summed over integer partitions of N (conjugacy classes of the
// symmetric group): sum over {m_c} of prod_c q_c^{m_c} / (m_c! c^{m_c}).
// Refused for N > 10; the partition count explodes.
double brute_force_partition(const SystemParams& params, int n_particles);

// log Q_N as a direct sum over single-particle-mode occupation numbers with
// momenta truncated to |z|_inf <= z_cut. dropped_mode_mass is the exact
// Boltzmann mass of the discarded modes, from which a rigorous relative
// truncation bound follows (see tests). Refused for N > 6 or state spaces
// beyond 1e7.
struct OccupationPartition {
  double logQ;
  double dropped_mode_mass;
};
OccupationPartition occupation_partition(const SystemParams& params,
                                         int n_particles, int z_cut);

// Builds A_M = (1/M) sum a_n A_{M-n} from arbitrary coefficients a (a[0] is
// a_1) and evaluates the increment identity
//   A_M - A_{M-1} = (1/M) sum_n (a_n - 1)(A_{M-n} - A_{M-n-1}),  A_{-1} = 0.
// Returns the largest absolute residual and the largest |A_M| for scaling.
struct IncrementIdentityReport {
  double max_residual;
  double max_abs_value;
};
IncrementIdentityReport increment_identity_check(std::span<const double> a);

struct CycleDistribution {
  enum class Provenance { exact, limit, sampled };
  Provenance provenance = Provenance::exact;
  std::vector<double> mass;       // mass[i] = P(cycle length = i+1)
  std::vector<double> std_error;  // sampled provenance only, else empty
  // Limit provenance: analytic mass beyond mass.size(), plus the rigorous
  // bound on what the tail summation itself may have missed.
  double tail_mass = 0.0;
  double tail_remainder_bound = 0.0;

  double total() const;                  // covered probability incl. tail
  double deficit() const;                // 1 - total(): escaped probability
  double head(int cutoff) const;         // P(length <= cutoff)
  double tail_beyond(int cutoff) const;  // P(length > cutoff), finite part
};

// Exact finite-size distribution p_n = q_n Q_{N-n} / (N Q_N).
CycleDistribution cycle_distribution_exact(const RecursionTable& table);

// Mean zero-mode occupation fraction (1/N) sum_{n=1}^{N} Q_{N-n}/Q_N.
double condensate_fraction_finite(const RecursionTable& table);

// Chemical potential of the infinite ideal gas at a given rho lambda^d.
struct MuSolution {
  double beta_mu = 0.0;
  bool saturated = false;
};
MuSolution mu_ideal(double rho_lambda_d, int dim);

// Infinite-volume cycle-length distribution p_n = e^{n beta mu}/(rho
// lambda^d n^{d/2}) for n <= n_max, plus the analytic tail. Total mass is
// min(1, zeta(d/2)/(rho lambda^d)); the shortfall from 1 is the probability
// carried by infinite cycles.
CycleDistribution limit_cycle_distribution(double rho_lambda_d, int dim,
                                           int n_max);

// One row of the fixed-density ladder: exact finite-N observables that the
// limit formulas are approached by.
struct ScanPoint {
  int n_particles;
  double box_over_lambda;
  double tail_fraction;      // P(cycle > eps N)
  double head_sqrt;          // P(cycle <= floor(N^exponent))
  double condensate_fraction;
};
std::vector<ScanPoint> finite_size_scan(double rho_lambda_d, int dim,
                                        std::span<const int> ladder,
                                        double eps, double kn_exponent);

// Free energy density of the saturated ideal gas, -zeta(1 + d/2)/(beta
// lambda^d) per volume; domain error below the critical density.
double f0_limit(double rho_lambda_d, int dim, double beta, double lambda);

// lim_{N -> inf} log Q_N at fixed box, via two algebraically equal forms:
// the mode product -sum_{z != 0} log(1 - e^{-pi (lambda/L)^2 z^2}) and the
// cycle series sum_{n >= 1} (q_n - 1)/n.
double fixed_box_limit_product(const SystemParams& params);
double fixed_box_limit_series(const SystemParams& params);

// Evaluates the nested all-orders identity sum (telescoping resolution of
// the recursion) directly, without memoization, and returns |value/N - 1|.
// Refused for N > 12: the direct evaluation is exponential by design.
double resolution_identity_check(int n_particles);

}  // namespace cyclelab::idealgas
