#pragma once

#include "cyclelab/kernels.hpp"

// Jensen-route upper bounds on the cycle self-energy and the mean-field free
// energy, plus the closed-form identity for the auxiliary partition function
// built on the quadratic interaction surrogate. Everything here is a rigorous
// inequality or an exact identity; quadrature error is reported, not hidden.

namespace cyclelab::bounds {

// Inverse-length-squared combination (1/lambda^2)(1/k + 1/(n-k)) entering the
// two-arc splitting of an n-cycle at position k; symmetric in k <-> n-k.
double alpha(int n, int k, double lambda_beta);

// Smallest stability constant for positive-definite interactions, u(0)/2.
// Kinds without manifest positive-definiteness are refused; callers supply
// their own constant in that case.
double stability_constant(const kernels::PotentialSpec& u);

struct PhiBound {
  double k_sum;    // (1/2) sum_k alpha^{d/2} int u(x) e^{-pi alpha x^2} dx
  double uniform;  // n-independent: zeta(d/2) lambda^{-d} int u   (d >= 3)
};

// Upper bound on the self-energy of an n-cycle. The potential must be
// integrable and radial. The uniform member is meaningful for dim >= 3 and
// requires u >= 0 to dominate; it is reported unconditionally.
PhiBound phi_upper(int n, const SystemParams& params,
                   const kernels::PotentialSpec& u);

// Upper bound rho * int u on the cycle-background interaction density.
double psi_upper(double rho, const kernels::PotentialSpec& u, int dim);

struct KernelValue {
  double value;       // partial sum to k_max
  double tail_bound;  // integral-comparison bound on the dropped tail
};

// h(x) = sum_{k>=1} k^{-d/2} exp(-pi x^2 / (k lambda^2)). Diverges for
// dim <= 2 (domain error); at x = 0 equals zeta(d/2).
KernelValue h_beta_kernel(double x, const SystemParams& params,
                          int k_max);

struct BoundReport {
  double f_zero;             // ideal-gas free energy density
  bool saturated;            // rho lambda^d >= zeta(d/2)
  double mean_field;         // rho^2/2 int u + rho lambda^{-d} int u h + f0
  double coarse;             // rho^2 int u + (rho/beta) log(rho lambda^d)
  double kernel_tail_bound;  // quadrature-propagated h truncation bound
  bool mean_field_tighter;   // mean_field <= coarse on this point
};

// Both free-energy upper bounds at density rho. Below saturation the ideal
// reference term switches to rho mu - p from the unsaturated equation of
// state and the report is flagged through `saturated`.
BoundReport f_upper(double rho, const SystemParams& params,
                    const kernels::PotentialSpec& u);

// Auxiliary model: recursion with log-weight penalty
// c [n(N-n) + n(n-1)/2] + d n against the closed form
// log Qminus_N = -c N(N-1)/2 - d N + log Q0_N. Returns the max residual over
// N <= n_max. The couplings are the dimensionless (beta-absorbed) constants.
double qminus_residual(const SystemParams& params, int n_max,
                       double c_coupling, double d_coupling);

// Same identity with the couplings derived from an integrable potential:
// c = beta L^{-d} int u, d = beta lambda^{-d} int u(x) h(x) dx.
double qminus_identity(const SystemParams& params, int n_max,
                       const kernels::PotentialSpec& u);

}  // namespace cyclelab::bounds
