#include "cyclelab/latticegas.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include <boost/math/special_functions/legendre.hpp>

namespace cyclelab::lattice {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Gauss-Legendre rule on [-1, 1], nodes paired with weights. Nodes come from
// the Boost Legendre zero finder; weights use w = 2 / ((1 - x^2) P_n'(x)^2).
struct QuadRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

QuadRule make_gauss_legendre(int n) {
  QuadRule rule;
  auto positive = boost::math::legendre_p_zeros<double>(n);
  for (double x : positive) {
    double dp = boost::math::legendre_p_prime(n, x);
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes.push_back(x);
    rule.weights.push_back(w);
    if (x > 0.0) {
      rule.nodes.push_back(-x);
      rule.weights.push_back(w);
    }
  }
  return rule;
}

const QuadRule& gauss_200() {
  static const QuadRule rule = make_gauss_legendre(200);
  return rule;
}

const QuadRule& gauss_400() {
  static const QuadRule rule = make_gauss_legendre(400);
  return rule;
}

// Scaled modified Bessel e^{-y} I_nu(y) through the ascending series; every
// term is positive, so the result is nonnegative by construction.
double scaled_bessel_i(int nu, double y) {
  if (nu < 0) nu = -nu;
  if (y < 0.0) throw std::domain_error("scaled_bessel_i: negative argument");
  if (y == 0.0) return nu == 0 ? 1.0 : 0.0;
  double log_t0 = -y;
  if (nu > 0) log_t0 += nu * std::log(0.5 * y) - std::lgamma(nu + 1.0);
  double term = std::exp(log_t0);
  double total = term;
  double q = 0.25 * y * y;
  for (int m = 0; m < 600; ++m) {
    term *= q / ((m + 1.0) * (nu + m + 1.0));
    total += term;
    if (term < 1e-18 * total) break;
  }
  return total;
}

long ipow(long base, int exp) {
  long r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

struct BondList {
  std::vector<std::pair<int, int>> directed;  // (x, x + e_j) over all x, j
};

BondList make_bonds(int dim, int box) {
  BondList bonds;
  long sites = ipow(box, dim);
  std::vector<long> stride(dim);
  stride[0] = 1;
  for (int j = 1; j < dim; ++j) stride[j] = stride[j - 1] * box;
  for (long s = 0; s < sites; ++s) {
    for (int j = 0; j < dim; ++j) {
      int coord = static_cast<int>((s / stride[j]) % box);
      long t = s + stride[j] * (coord + 1 == box ? 1 - box : 1);
      bonds.directed.emplace_back(static_cast<int>(s), static_cast<int>(t));
    }
  }
  return bonds;
}

long binomial(long n, long k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  long r = 1;
  for (long i = 1; i <= k; ++i) {
    // Guard against overflow in the admission check itself.
    if (r > (1L << 50)) return 1L << 50;
    r = r * (n - k + i) / i;
  }
  return r;
}

long mask_index(const std::vector<std::uint64_t>& basis, std::uint64_t mask) {
  auto it = std::lower_bound(basis.begin(), basis.end(), mask);
  if (it == basis.end() || *it != mask)
    throw std::logic_error("basis lookup failed");
  return it - basis.begin();
}

long count_index(const std::vector<std::vector<std::uint8_t>>& basis,
                 const std::vector<std::uint8_t>& counts) {
  auto it = std::lower_bound(basis.begin(), basis.end(), counts);
  if (it == basis.end() || *it != counts)
    throw std::logic_error("basis lookup failed");
  return it - basis.begin();
}

void enumerate_counts(int sites, int cap, int remaining,
                      std::vector<std::uint8_t>& scratch,
                      std::vector<std::vector<std::uint8_t>>& out) {
  int slot = static_cast<int>(scratch.size());
  if (slot == sites) {
    if (remaining == 0) out.push_back(scratch);
    return;
  }
  int tail_room = cap * (sites - slot - 1);
  for (int c = 0; c <= std::min(cap, remaining); ++c) {
    if (remaining - c > tail_room) continue;
    scratch.push_back(static_cast<std::uint8_t>(c));
    enumerate_counts(sites, cap, remaining - c, scratch, out);
    scratch.pop_back();
  }
}

// Thermal weights over a diagonalized sector, shifted by the ground energy
// so the largest weight is exactly one.
std::vector<double> thermal_weights(const SpinSector& sector, double beta) {
  if (!sector.diagonalized)
    throw std::logic_error("sector must be diagonalized first");
  std::vector<double> w(sector.eigenvalues.size());
  double e0 = sector.eigenvalues.empty() ? 0.0 : sector.eigenvalues.front();
  for (std::size_t i = 0; i < w.size(); ++i)
    w[i] = std::exp(-beta * (sector.eigenvalues[i] - e0));
  return w;
}

// ||A v||^2 where A = sum_x sigma^-_x maps sector N to sector N-1 (lower)
// or A = sum_x sigma^+_x maps N to N+1 (raise). The image norm only needs
// the target basis, not its spectrum.
double ladder_norm_sq(const SpinSector& sector,
                      const std::vector<std::uint64_t>& target_basis,
                      const double* vec, bool lower) {
  long sites = sector.params.sites();
  if (target_basis.empty()) return 0.0;
  std::vector<double> image(target_basis.size(), 0.0);
  for (long i = 0; i < sector.dimension; ++i) {
    double amp = vec[i];
    if (amp == 0.0) continue;
    std::uint64_t mask = sector.basis_masks[i];
    for (long x = 0; x < sites; ++x) {
      std::uint64_t bit = std::uint64_t{1} << x;
      bool occupied = (mask & bit) != 0;
      if (lower ? !occupied : occupied) continue;
      image[mask_index(target_basis, mask ^ bit)] += amp;
    }
  }
  double norm = 0.0;
  for (double v : image) norm += v * v;
  return norm;
}

std::vector<std::uint64_t> hard_core_basis(long sites, int n_particles) {
  std::vector<std::uint64_t> basis;
  if (n_particles == 0) {
    basis.push_back(0);
    return basis;
  }
  std::uint64_t state = (std::uint64_t{1} << n_particles) - 1;
  std::uint64_t limit = std::uint64_t{1} << sites;
  while (state < limit) {
    basis.push_back(state);
    std::uint64_t c = state & (~state + 1);
    std::uint64_t r = state + c;
    state = (((r ^ state) >> 2) / c) | r;
    if (c == 0) break;
  }
  return basis;
}

}  // namespace

void LatticeParams::validate() const {
  if (dim < 1 || dim > 6) throw std::invalid_argument("dim must be in 1..6");
  if (box < 2) throw std::invalid_argument("box must be at least 2");
  if (box % 2 != 0) throw std::invalid_argument("box must be even");
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
  if (!hard_core()) {
    if (!(onsite >= 0.0))
      throw std::invalid_argument("finite onsite repulsion must be >= 0");
    if (max_site_occupation < 1)
      throw std::invalid_argument("max_site_occupation must be >= 1");
  }
}

long LatticeParams::sites() const { return ipow(box, dim); }

bool LatticeParams::hard_core() const {
  return std::isinf(onsite) || max_site_occupation == 1;
}

double dispersion(std::span<const double> k) {
  double e = 0.0;
  for (double kj : k) e += 2.0 * (1.0 - std::cos(kj));
  return e;
}

double hop_integral(double tau) {
  if (tau < 0.0) throw std::domain_error("hop_integral: tau must be >= 0");
  const QuadRule& rule = gauss_200();
  double total = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    double k = 0.5 * kPi * (rule.nodes[i] + 1.0);
    total += rule.weights[i] * std::exp(-2.0 * tau * (1.0 - std::cos(k)));
  }
  return 0.5 * total;
}

double lattice_q(int n, const LatticeParams& params) {
  params.validate();
  if (n < 1) throw std::invalid_argument("cycle length must be positive");
  double axis = 0.0;
  for (int l = 0; l < params.box; ++l) {
    double k = 2.0 * kPi * l / params.box;
    axis += std::exp(-2.0 * n * params.beta * (1.0 - std::cos(k)));
  }
  return std::pow(axis, params.dim);
}

double q_limit(double rho, int n, double beta, int dim) {
  if (!(rho > 0.0)) throw std::invalid_argument("density must be positive");
  return std::pow(hop_integral(n * beta), dim) / rho;
}

double continuum_bridge(double beta, std::span<const int> x) {
  if (!(beta > 0.0)) throw std::domain_error("beta must be positive");
  double w = 1.0;
  for (int xj : x) w *= scaled_bessel_i(xj, 2.0 * beta);
  return w;
}

double continuum_bridge_quadrature(double beta, std::span<const int> x) {
  if (!(beta > 0.0)) throw std::domain_error("beta must be positive");
  const QuadRule& rule = gauss_400();
  double w = 1.0;
  for (int xj : x) {
    double axis = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      double k = 0.5 * kPi * (rule.nodes[i] + 1.0);
      axis += rule.weights[i] *
              std::exp(-2.0 * beta * (1.0 - std::cos(k))) * std::cos(xj * k);
    }
    w *= 0.5 * axis;
  }
  return w;
}

double lattice_bridge(double beta, std::span<const int> x, int box,
                      int windings) {
  if (!(beta > 0.0)) throw std::domain_error("beta must be positive");
  if (box < 2) throw std::invalid_argument("box must be at least 2");
  if (windings < 1) throw std::invalid_argument("windings must be >= 1");
  double w = 1.0;
  for (int xj : x) {
    // Center the image window on the minimal representative so the dropped
    // orders start at (windings + 1) box - box / 2, the value the tail bound
    // is written against; the infinite sum is indifferent to the shift.
    int r = ((xj % box) + box) % box;
    if (2 * r > box) r -= box;
    double axis = 0.0;
    for (int z = -windings; z <= windings; ++z)
      axis += scaled_bessel_i(r + box * z, 2.0 * beta);
    w *= axis;
  }
  return w;
}

double lattice_bridge_dft(double beta, std::span<const int> x, int box) {
  if (!(beta > 0.0)) throw std::domain_error("beta must be positive");
  if (box < 2) throw std::invalid_argument("box must be at least 2");
  double w = 1.0;
  for (int xj : x) {
    double axis = 0.0;
    for (int l = 0; l < box; ++l) {
      double k = 2.0 * kPi * l / box;
      axis += std::exp(-2.0 * beta * (1.0 - std::cos(k))) * std::cos(k * xj);
    }
    w *= axis / box;
  }
  return w;
}

double bridge_winding_tail_bound(double beta, int box, int windings) {
  // Dropped per-axis mass is sum over |z| > windings of e^{-y} I_{x+box z}(y)
  // with y = 2 beta. The smallest surviving order over displacements
  // |x| <= box/2 is nu0 = (windings + 1) box - box / 2. Each term obeys
  // e^{-y} I_nu(y) <= e^{-y} (y/2)^nu / nu! * e^{y^2 / (4(nu+1))}, and
  // successive windings shrink the bound by at least ((y/2)/(nu0+1))^box.
  double y = 2.0 * beta;
  long nu0 = static_cast<long>(windings + 1) * box - box / 2;
  double ratio = std::pow(0.5 * y / (nu0 + 1.0), box);
  if (!(ratio < 0.5))
    throw std::domain_error(
        "bridge_winding_tail_bound: truncation too aggressive for this beta");
  double log_head = -y + nu0 * std::log(0.5 * y) - std::lgamma(nu0 + 1.0) +
                    y * y / (4.0 * (nu0 + 1.0));
  return 2.0 * std::exp(log_head) / (1.0 - ratio);
}

std::vector<KnScanPoint> kn_scan(double rho, double beta, int dim,
                                 std::span<const int> boxes, double exponent) {
  std::vector<KnScanPoint> out;
  for (int box : boxes) {
    LatticeParams params;
    params.dim = dim;
    params.box = box;
    params.beta = beta;
    params.validate();
    long sites = params.sites();
    long n_particles = std::lround(rho * static_cast<double>(sites));
    if (n_particles < 1)
      throw std::invalid_argument("kn_scan: box too small for this density");
    double realized_rho =
        static_cast<double>(n_particles) / static_cast<double>(sites);
    int cutoff = static_cast<int>(
        std::floor(std::pow(static_cast<double>(n_particles), exponent)));
    cutoff = std::max(cutoff, 1);
    double dev = 0.0;
    for (int n = 1; n <= cutoff; ++n) {
      double finite = lattice_q(n, params) / static_cast<double>(n_particles);
      dev += std::abs(finite - q_limit(realized_rho, n, beta, dim));
    }
    out.push_back({box, n_particles, cutoff, dev});
  }
  return out;
}

SpinSector build_sector(const LatticeParams& params, int n_particles) {
  params.validate();
  long sites = params.sites();
  if (n_particles < 0)
    throw std::invalid_argument("particle number must be >= 0");
  SpinSector sector;
  sector.params = params;
  sector.n_particles = n_particles;
  double c = params.anisotropy;

  if (params.hard_core()) {
    if (n_particles > sites)
      throw std::invalid_argument("more particles than sites with hard core");
    if (sites > 62) throw std::invalid_argument("lattice too large to mask");
    if (binomial(sites, n_particles) > 100000)
      throw std::invalid_argument("sector dimension exceeds 100000");
    sector.basis_masks = hard_core_basis(sites, n_particles);
    sector.dimension = static_cast<long>(sector.basis_masks.size());
    BondList bonds = make_bonds(params.dim, params.box);
    for (long i = 0; i < sector.dimension; ++i) {
      std::uint64_t mask = sector.basis_masks[i];
      double diag = 0.0;
      for (auto [s, t] : bonds.directed) {
        int ns = (mask >> s) & 1;
        int nt = (mask >> t) & 1;
        diag += -4.0 * c * ns * nt + 2.0 * c * (ns + nt);
        if (ns != nt) {
          std::uint64_t flipped =
              mask ^ (std::uint64_t{1} << s) ^ (std::uint64_t{1} << t);
          long j = mask_index(sector.basis_masks, flipped);
          sector.matrix_entries.push_back({j, i, -2.0});
        }
      }
      if (diag != 0.0) sector.matrix_entries.push_back({i, i, diag});
    }
    return sector;
  }

  // Soft core: occupation numbers capped per site, bosonic hop amplitudes.
  int cap = std::min<long>(params.max_site_occupation, n_particles);
  std::vector<std::uint8_t> scratch;
  enumerate_counts(static_cast<int>(sites), cap, n_particles, scratch,
                   sector.basis_counts);
  sector.dimension = static_cast<long>(sector.basis_counts.size());
  if (sector.dimension == 0)
    throw std::invalid_argument("no states: occupation cap too tight");
  if (sector.dimension > 100000)
    throw std::invalid_argument("sector dimension exceeds 100000");
  BondList bonds = make_bonds(params.dim, params.box);
  std::vector<std::uint8_t> moved;
  for (long i = 0; i < sector.dimension; ++i) {
    const auto& counts = sector.basis_counts[i];
    double diag = 0.0;
    for (long x = 0; x < sites; ++x)
      diag += 0.5 * params.onsite * counts[x] * (counts[x] - 1.0);
    for (auto [s, t] : bonds.directed) {
      int ns = counts[s];
      int nt = counts[t];
      diag += -4.0 * c * ns * nt + 2.0 * c * (ns + nt);
      if (ns > 0 && nt < cap) {
        moved = counts;
        --moved[s];
        ++moved[t];
        long j = count_index(sector.basis_counts, moved);
        sector.matrix_entries.push_back(
            {j, i, -2.0 * std::sqrt(ns * (nt + 1.0))});
      }
      if (nt > 0 && ns < cap) {
        moved = counts;
        --moved[t];
        ++moved[s];
        long j = count_index(sector.basis_counts, moved);
        sector.matrix_entries.push_back(
            {j, i, -2.0 * std::sqrt(nt * (ns + 1.0))});
      }
    }
    if (diag != 0.0) sector.matrix_entries.push_back({i, i, diag});
  }
  return sector;
}

void diagonalize(SpinSector& sector) {
  if (sector.diagonalized) return;
  if (sector.dimension > 2000)
    throw std::invalid_argument(
        "dense diagonalization capped at dimension 2000");
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(sector.dimension, sector.dimension);
  for (const auto& e : sector.matrix_entries) h(e.row, e.col) += e.value;
  double asym = (h - h.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12) throw std::logic_error("assembled matrix not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eigensolver failed to converge");
  sector.eigenvalues.assign(solver.eigenvalues().data(),
                            solver.eigenvalues().data() + sector.dimension);
  sector.eigenvectors.resize(sector.dimension * sector.dimension);
  const Eigen::MatrixXd& v = solver.eigenvectors();
  for (long i = 0; i < sector.dimension; ++i)
    for (long j = 0; j < sector.dimension; ++j)
      sector.eigenvectors[i * sector.dimension + j] = v(i, j);
  sector.diagonalized = true;
}

double sector_log_partition(const SpinSector& sector, double beta) {
  if (!sector.diagonalized)
    throw std::logic_error("sector must be diagonalized first");
  if (sector.eigenvalues.empty()) throw std::logic_error("empty spectrum");
  double e0 = sector.eigenvalues.front();
  double total = 0.0;
  for (double e : sector.eigenvalues) total += std::exp(-beta * (e - e0));
  return std::log(total) - beta * e0;
}

double particle_hole_residual(const LatticeParams& params) {
  params.validate();
  if (!params.hard_core())
    throw std::invalid_argument("exchange symmetry check needs a hard core");
  long sites = params.sites();
  std::vector<double> log_q(sites + 1);
  for (long n = 0; n <= sites; ++n) {
    SpinSector sector = build_sector(params, static_cast<int>(n));
    diagonalize(sector);
    log_q[n] = sector_log_partition(sector, params.beta);
  }
  double worst = 0.0;
  for (long n = 0; n <= sites; ++n)
    worst = std::max(worst, std::abs(log_q[n] - log_q[sites - n]));
  return worst;
}

double half_filling_mu(const LatticeParams& params) {
  params.validate();
  long sites = params.sites();
  long half = sites / 2;
  SpinSector below = build_sector(params, static_cast<int>(half - 1));
  SpinSector above = build_sector(params, static_cast<int>(half + 1));
  diagonalize(below);
  diagonalize(above);
  return (sector_log_partition(below, params.beta) -
          sector_log_partition(above, params.beta)) /
         (2.0 * params.beta);
}

CondensateReport condensate_observable(const LatticeParams& params,
                                       int n_particles) {
  params.validate();
  if (!params.hard_core())
    throw std::invalid_argument("condensate observable implemented for the "
                                "hard-core basis");
  long sites = params.sites();
  if (n_particles < 0 || n_particles > sites)
    throw std::invalid_argument("particle number out of range");
  SpinSector sector = build_sector(params, n_particles);
  diagonalize(sector);

  std::vector<std::uint64_t> basis_below, basis_above;
  if (n_particles > 0) basis_below = hard_core_basis(sites, n_particles - 1);
  if (n_particles < sites)
    basis_above = hard_core_basis(sites, n_particles + 1);

  std::vector<double> weights = thermal_weights(sector, params.beta);
  double z = 0.0;
  double lower_sq = 0.0;  // <P+ P->
  double raise_sq = 0.0;  // <P- P+>
  for (long i = 0; i < sector.dimension; ++i) {
    const double* vec = sector.eigenvectors.data() + i;
    // Column i with row stride = dimension; copy for contiguous access.
    std::vector<double> column(sector.dimension);
    for (long r = 0; r < sector.dimension; ++r)
      column[r] = vec[r * sector.dimension];
    double w = weights[i];
    z += w;
    lower_sq += w * ladder_norm_sq(sector, basis_below, column.data(), true);
    raise_sq += w * ladder_norm_sq(sector, basis_above, column.data(), false);
  }
  lower_sq /= z;
  raise_sq /= z;

  double volume = static_cast<double>(sites);
  double s3 = n_particles - 0.5 * volume;
  CondensateReport report;
  report.n0_direct = lower_sq / volume;
  report.n0_planar = (0.5 * (lower_sq + raise_sq) + s3) / volume;
  report.identity_residual = std::abs(report.n0_direct - report.n0_planar);
  double spin_sq = 0.5 * (lower_sq + raise_sq) + s3 * s3;
  report.spin_bound_slack = 0.5 * volume * (0.5 * volume + 1.0) - spin_sq;
  return report;
}

OneBodyResult one_body_spectrum(int grid, int dim,
                                const std::vector<std::vector<double>>& scatterers,
                                const kernels::PotentialSpec& u, double beta,
                                int probe_depth) {
  if (grid < 2) throw std::invalid_argument("grid must be at least 2");
  if (dim < 1 || dim > 4) throw std::invalid_argument("dim must be in 1..4");
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
  long volume = ipow(grid, dim);
  if (volume > 2000)
    throw std::invalid_argument("dense one-body probe capped at 2000 sites");
  for (const auto& s : scatterers)
    if (static_cast<int>(s.size()) != dim)
      throw std::invalid_argument("scatterer dimension mismatch");

  std::vector<long> stride(dim);
  stride[0] = 1;
  for (int j = 1; j < dim; ++j) stride[j] = stride[j - 1] * grid;

  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(volume, volume);
  std::vector<double> displacement(dim);
  for (long s = 0; s < volume; ++s) {
    double v = 0.0;
    for (const auto& point : scatterers) {
      for (int j = 0; j < dim; ++j) {
        double coord = static_cast<double>((s / stride[j]) % grid);
        displacement[j] = coord - point[j];
      }
      v += kernels::periodize_potential(u, displacement,
                                        static_cast<double>(grid));
    }
    h(s, s) = 2.0 * dim + v;
    for (int j = 0; j < dim; ++j) {
      int coord = static_cast<int>((s / stride[j]) % grid);
      long up = s + stride[j] * (coord + 1 == grid ? 1 - grid : 1);
      long down = s + stride[j] * (coord == 0 ? grid - 1 : -1);
      h(s, up) += -1.0;
      h(s, down) += -1.0;
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eigensolver failed to converge");

  OneBodyResult result;
  result.eigenvalues.assign(solver.eigenvalues().data(),
                            solver.eigenvalues().data() + volume);
  result.zero_mode_overlap_sq.resize(volume);
  for (long j = 0; j < volume; ++j) {
    double s = solver.eigenvectors().col(j).sum();
    result.zero_mode_overlap_sq[j] = s * s / static_cast<double>(volume);
  }
  Eigen::VectorXd ground = solver.eigenvectors().col(0);
  if (ground.sum() < 0.0) ground = -ground;
  result.ground_state.assign(ground.data(), ground.data() + volume);
  double l1 = ground.cwiseAbs().sum();
  result.ground_norm1_sq = l1 * l1 / static_cast<double>(volume);
  result.probe_curve.resize(std::max(probe_depth, 0));
  for (int n = 1; n <= probe_depth; ++n) {
    double total = 0.0;
    for (long j = 1; j < volume; ++j)
      total += std::exp(-n * beta *
                        (result.eigenvalues[j] - result.eigenvalues[0]));
    result.probe_curve[n - 1] = total;
  }
  return result;
}

std::vector<std::vector<double>> sample_scatterers(int grid, int dim,
                                                   int count,
                                                   double min_distance,
                                                   std::uint64_t seed) {
  if (count < 0) throw std::invalid_argument("count must be >= 0");
  std::mt19937_64 gen(seed);
  auto uniform = [&gen]() {
    return (gen() >> 11) * 0x1.0p-53;
  };
  std::vector<std::vector<double>> points;
  long attempts = 0;
  long budget = 10000L * std::max(count, 1);
  while (static_cast<int>(points.size()) < count) {
    if (++attempts > budget)
      throw std::runtime_error("scatterer sampling budget exhausted; lower "
                               "the density or the minimum distance");
    std::vector<double> candidate(dim);
    for (int j = 0; j < dim; ++j) candidate[j] = uniform() * grid;
    bool ok = true;
    for (const auto& p : points) {
      double dist_sq = 0.0;
      for (int j = 0; j < dim; ++j) {
        double delta = std::abs(candidate[j] - p[j]);
        delta = std::min(delta, grid - delta);
        dist_sq += delta * delta;
      }
      if (dist_sq < min_distance * min_distance) {
        ok = false;
        break;
      }
    }
    if (ok) points.push_back(std::move(candidate));
  }
  return points;
}

}  // namespace cyclelab::lattice
