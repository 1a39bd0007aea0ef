#include "cyclelab/idealgas.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cyclelab::idealgas {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(std::span<const double> terms) {
  double m = kNegInf;
  for (double t : terms) m = std::max(m, t);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double t : terms) s += std::exp(t - m);
  return m + std::log(s);
}

int checked_count(const SystemParams& params, int n_particles) {
  params.validate();
  if (n_particles < 0) throw std::domain_error("particle count must be >= 0");
  return n_particles;
}

}  // namespace

double RecursionTable::ratio_down(int m) const {
  if (m < 1 || m > size())
    throw std::domain_error("ratio_down index out of table range");
  return std::exp(logQ[m - 1] - logQ[m]);
}

RecursionTable recursion_table(const SystemParams& params, int n_particles) {
  const int N = checked_count(params, n_particles);
  RecursionTable t;
  t.params = params;
  t.logQ.assign(N + 1, 0.0);
  t.log_q.assign(N + 1, 0.0);
  for (int n = 1; n <= N; ++n) t.log_q[n] = kernels::log_q_cycle(n, params);

  std::vector<double> terms;
  terms.reserve(N);
  for (int M = 1; M <= N; ++M) {
    terms.clear();
    for (int n = 1; n <= M; ++n) terms.push_back(t.log_q[n] + t.logQ[M - n]);
    t.logQ[M] = log_sum_exp(terms) - std::log(static_cast<double>(M));
  }
  return t;
}

namespace {

// Recursive enumeration of integer partitions of `left` with parts <= cap.
// mult[c] tracks the multiplicity of part c; at a leaf the partition's
// symmetric-group conjugacy-class weight is accumulated.
void partition_weights(int left, int cap, std::vector<int>& mult,
                       const std::vector<double>& q, double& total) {
  if (left == 0) {
    double w = 1.0;
    for (int c = 1; c < static_cast<int>(mult.size()); ++c) {
      for (int j = 1; j <= mult[c]; ++j) w *= q[c] / (j * c);
    }
    total += w;
    return;
  }
  for (int c = std::min(left, cap); c >= 1; --c) {
    ++mult[c];
    partition_weights(left - c, c, mult, q, total);
    --mult[c];
  }
}

}  // namespace

double brute_force_partition(const SystemParams& params, int n_particles) {
  const int N = checked_count(params, n_particles);
  if (N > 10)
    throw std::invalid_argument(
        "partition enumeration refused beyond N = 10 (combinatorial blowup)");
  if (N == 0) return 0.0;
  std::vector<double> q(N + 1, 0.0);
  for (int n = 1; n <= N; ++n) q[n] = kernels::q_cycle(n, params);
  std::vector<int> mult(N + 1, 0);
  double total = 0.0;
  partition_weights(N, N, mult, q, total);
  return std::log(total);
}

OccupationPartition occupation_partition(const SystemParams& params,
                                         int n_particles, int z_cut) {
  const int N = checked_count(params, n_particles);
  if (N > 6)
    throw std::invalid_argument(
        "occupation enumeration refused beyond N = 6");
  if (z_cut < 0) throw std::domain_error("z_cut must be >= 0");
  const int d = params.dim;
  const double per_axis = 2.0 * z_cut + 1.0;
  if (std::pow(per_axis, d) * (N + 1.0) > 1e7)
    throw std::invalid_argument("occupation state space exceeds 1e7");

  // Mode energies beta*eps = pi (lambda/L)^2 |z|^2 on the truncated grid,
  // enumerated one axis at a time via an odometer.
  const double ratio = params.lambda / params.box;
  const double a = M_PI * ratio * ratio;
  std::vector<int> z(d, -z_cut);
  std::vector<double> modes;
  for (;;) {
    double z2 = 0.0;
    for (int j = 0; j < d; ++j) z2 += static_cast<double>(z[j]) * z[j];
    modes.push_back(a * z2);
    int axis = 0;
    while (axis < d && ++z[axis] > z_cut) z[axis++] = -z_cut;
    if (axis == d) break;
  }
  std::sort(modes.begin(), modes.end());

  // DP over modes: logW[M] = log of the occupation sum with M particles
  // placed among the modes processed so far (each mode may hold any number).
  std::vector<double> logW(N + 1, kNegInf);
  logW[0] = 0.0;
  std::vector<double> terms;
  for (double e : modes) {
    for (int M = N; M >= 1; --M) {
      terms.clear();
      terms.push_back(logW[M]);
      // j >= 1 particles in this mode, M - j among the earlier ones; the
      // update runs M downward so logW[M - j] is still the pre-mode value.
      for (int j = 1; j <= M; ++j) terms.push_back(logW[M - j] - e * j);
      logW[M] = log_sum_exp(terms);
    }
  }

  OccupationPartition out;
  out.logQ = logW[N];
  // Exact Boltzmann mass of the dropped modes: theta(a/pi scaled)^d minus
  // the kept partial sum, all in one-particle terms.
  double kept_axis = 0.0;
  for (int v = -z_cut; v <= z_cut; ++v)
    kept_axis += std::exp(-a * static_cast<double>(v) * v);
  const double full = kernels::theta_sum(a / M_PI);
  out.dropped_mode_mass =
      std::pow(full, d) - std::pow(kept_axis, d);
  return out;
}

IncrementIdentityReport increment_identity_check(std::span<const double> a) {
  const int N = static_cast<int>(a.size());
  if (N > 1000)
    throw std::invalid_argument("increment identity check capped at N = 1000");
  std::vector<double> A(N + 1, 0.0);
  A[0] = 1.0;
  for (int M = 1; M <= N; ++M) {
    double s = 0.0;
    for (int n = 1; n <= M; ++n) s += a[n - 1] * A[M - n];
    A[M] = s / M;
  }
  IncrementIdentityReport rep{0.0, 1.0};
  for (int M = 1; M <= N; ++M) {
    rep.max_abs_value = std::max(rep.max_abs_value, std::abs(A[M]));
    double rhs = 0.0;
    for (int n = 1; n <= M; ++n) {
      const double inc = (n == M) ? 1.0 : A[M - n] - A[M - n - 1];
      rhs += (a[n - 1] - 1.0) * inc;
    }
    rhs /= M;
    rep.max_residual = std::max(rep.max_residual,
                                std::abs((A[M] - A[M - 1]) - rhs));
  }
  return rep;
}

double CycleDistribution::total() const {
  double s = tail_mass;
  for (double p : mass) s += p;
  return s;
}

double CycleDistribution::deficit() const { return 1.0 - total(); }

double CycleDistribution::head(int cutoff) const {
  double s = 0.0;
  const int top = std::min<int>(cutoff, static_cast<int>(mass.size()));
  for (int i = 0; i < top; ++i) s += mass[i];
  return s;
}

double CycleDistribution::tail_beyond(int cutoff) const {
  double s = 0.0;
  for (int i = std::max(cutoff, 0); i < static_cast<int>(mass.size()); ++i)
    s += mass[i];
  return s;
}

CycleDistribution cycle_distribution_exact(const RecursionTable& table) {
  const int N = table.size();
  if (N < 1) throw std::domain_error("cycle distribution needs N >= 1");
  CycleDistribution dist;
  dist.provenance = CycleDistribution::Provenance::exact;
  dist.mass.resize(N);
  const double logN = std::log(static_cast<double>(N));
  for (int n = 1; n <= N; ++n)
    dist.mass[n - 1] =
        std::exp(table.log_q[n] + table.logQ[N - n] - table.logQ[N] - logN);
  return dist;
}

double condensate_fraction_finite(const RecursionTable& table) {
  const int N = table.size();
  if (N < 1) throw std::domain_error("condensate fraction needs N >= 1");
  double s = 0.0;
  for (int n = 1; n <= N; ++n)
    s += std::exp(table.logQ[N - n] - table.logQ[N]);
  return s / N;
}

MuSolution mu_ideal(double rho_lambda_d, int dim) {
  if (dim <= 2)
    throw std::domain_error(
        "no critical density for dim <= 2: zeta(d/2) diverges");
  if (rho_lambda_d <= 0.0)
    throw std::domain_error("rho lambda^d must be positive");
  if (rho_lambda_d >= kernels::zeta(0.5 * dim)) return {0.0, true};

  const double s = 0.5 * dim;
  double lo = std::log(rho_lambda_d) - 5.0;
  double hi = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (kernels::polylog(s, std::exp(mid)) < rho_lambda_d)
      lo = mid;
    else
      hi = mid;
  }
  return {0.5 * (lo + hi), false};
}

CycleDistribution limit_cycle_distribution(double rho_lambda_d, int dim,
                                           int n_max) {
  if (n_max < 1) throw std::domain_error("n_max must be >= 1");
  const MuSolution mu = mu_ideal(rho_lambda_d, dim);
  const double s = 0.5 * dim;
  const double z = std::exp(mu.beta_mu);

  CycleDistribution dist;
  dist.provenance = CycleDistribution::Provenance::limit;
  dist.mass.resize(n_max);
  for (int n = 1; n <= n_max; ++n)
    dist.mass[n - 1] =
        std::exp(n * mu.beta_mu) / (rho_lambda_d * std::pow(n, s));

  if (mu.saturated) {
    // Tail of sum n^{-s} via zeta minus the head; no cancellation trouble,
    // both sides are order one.
    double head = 0.0;
    for (int n = n_max; n >= 1; --n) head += std::pow(n, -s);
    dist.tail_mass = (kernels::zeta(s) - head) / rho_lambda_d;
    dist.tail_remainder_bound = 0.0;
  } else {
    // Geometric continuation; stop once the remainder bound
    // z^{n+1}/((1-z) n^s) is negligible.
    double tail = 0.0;
    double bound = std::numeric_limits<double>::infinity();
    for (long n = n_max + 1; n <= 200000000L; ++n) {
      const double term = std::exp(n * mu.beta_mu) / std::pow(n, s);
      tail += term;
      bound = term * z / (1.0 - z);
      if (bound < 1e-13) break;
    }
    dist.tail_mass = tail / rho_lambda_d;
    dist.tail_remainder_bound = bound / rho_lambda_d;
  }
  return dist;
}

std::vector<ScanPoint> finite_size_scan(double rho_lambda_d, int dim,
                                        std::span<const int> ladder,
                                        double eps, double kn_exponent) {
  if (eps <= 0.0 || eps >= 1.0)
    throw std::domain_error("eps must lie in (0,1)");
  std::vector<ScanPoint> out;
  out.reserve(ladder.size());
  for (int N : ladder) {
    if (N < 1) throw std::domain_error("ladder entries must be >= 1");
    const double box =
        std::pow(N / rho_lambda_d, 1.0 / dim);  // lambda = 1 units
    SystemParams p = SystemParams::natural(dim, box, 1.0);
    p.with_count(N);
    const RecursionTable table = recursion_table(p, N);
    const CycleDistribution dist = cycle_distribution_exact(table);
    ScanPoint pt;
    pt.n_particles = N;
    pt.box_over_lambda = box;
    pt.tail_fraction = dist.tail_beyond(static_cast<int>(eps * N));
    pt.head_sqrt =
        dist.head(static_cast<int>(std::floor(std::pow(N, kn_exponent))));
    pt.condensate_fraction = condensate_fraction_finite(table);
    out.push_back(pt);
  }
  return out;
}

double f0_limit(double rho_lambda_d, int dim, double beta, double lambda) {
  if (dim <= 2) throw std::domain_error("f0 limit needs dim >= 3");
  if (beta <= 0.0 || lambda <= 0.0)
    throw std::domain_error("beta and lambda must be positive");
  if (rho_lambda_d < kernels::zeta(0.5 * dim))
    throw std::domain_error(
        "f0 limit defined only at or above the critical density");
  return -kernels::zeta(1.0 + 0.5 * dim) / (beta * std::pow(lambda, dim));
}

double fixed_box_limit_product(const SystemParams& params) {
  params.validate();
  const double ratio = params.lambda / params.box;
  const double a = M_PI * ratio * ratio;
  // -sum_{z != 0} log(1 - e^{-a |z|^2}); terms below e^{-49 pi-ish} are
  // invisible at double precision.
  const int zmax =
      std::max(1, static_cast<int>(std::ceil(7.0 / std::sqrt(a / M_PI))));
  std::vector<int> z(params.dim, -zmax);
  double total = 0.0;
  for (;;) {
    double z2 = 0.0;
    bool origin = true;
    for (int j = 0; j < params.dim; ++j) {
      z2 += static_cast<double>(z[j]) * z[j];
      origin = origin && z[j] == 0;
    }
    if (!origin) total -= std::log1p(-std::exp(-a * z2));
    int axis = 0;
    while (axis < params.dim && ++z[axis] > zmax) z[axis++] = -zmax;
    if (axis == params.dim) break;
  }
  return total;
}

double fixed_box_limit_series(const SystemParams& params) {
  params.validate();
  double total = 0.0;
  for (int n = 1; n <= 1000000; ++n) {
    // q_n - 1 computed without cancellation: expm1 of d*log(theta).
    const double term = std::expm1(kernels::log_q_cycle(n, params)) / n;
    total += term;
    if (term < 1e-18 * std::max(total, 1e-300)) break;
  }
  return total;
}

namespace {

double resolution_nested(int M) {
  if (M == 1) return 1.0;
  double s = 1.0;
  for (int n = 1; n <= M - 1; ++n) s += resolution_nested(M - n) / (M - n);
  return s;
}

}  // namespace

double resolution_identity_check(int n_particles) {
  if (n_particles < 1) throw std::domain_error("need N >= 1");
  if (n_particles > 12)
    throw std::invalid_argument(
        "nested resolution evaluation refused beyond N = 12 (exponential)");
  return std::abs(resolution_nested(n_particles) / n_particles - 1.0);
}

}  // namespace cyclelab::idealgas
