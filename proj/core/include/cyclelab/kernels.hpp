#pragma once

#include <cstddef>
#include <span>
#include <string>

// Scalar building blocks shared by every other module: the one-dimensional
// Gaussian lattice sum (Jacobi theta), Riemann zeta and the Bose polylog,
// thermal wavelengths in natural and physical units, the single-cycle weight
// q_n of a periodic box, and periodized pair potentials.

namespace cyclelab {

namespace constants {

// CODATA 2018 values.
inline constexpr double hbar = 1.054571817e-34;              // J s
inline constexpr double k_boltzmann = 1.380649e-23;          // J/K (exact)
inline constexpr double atomic_mass_unit = 1.66053906660e-27; // kg
inline constexpr double he4_mass_amu = 4.002602;

// Coefficient in lambda_T[angstrom] = C / sqrt(T[kelvin]) for a particle of
// the given mass, derived from the CODATA constants above.
double lambda_coefficient_angstrom(double mass_amu);

// The working value printed in the helium literature whose table this
// artifact reproduces. The CODATA-derived coefficient for the He-4 atomic
// mass is 8.7263, 0.65% above this; the published table numbers are
// consistent only with 8.67, so the helium table uses it as an input datum.
inline constexpr double he4_lambda_coefficient_printed = 8.67;

} // namespace constants

enum class UnitSystem { natural, physical };

// Geometry and thermodynamic state of one homogeneous periodic system.
// lambda is the thermal wavelength at inverse temperature beta and is the
// single source of the quantum length scale; in natural units it is supplied
// directly, in physical units it is derived from (mass, temperature).
struct SystemParams {
  int dim = 3;
  double box = 1.0;     // side L of the periodic box
  double beta = 1.0;    // inverse temperature
  double lambda = 1.0;  // thermal wavelength at beta

  // Exactly one of the pair (count, density) is authoritative; the other is
  // derived through the box volume.
  double count = 0.0;
  double density = 0.0;
  bool density_authoritative = false;

  UnitSystem units = UnitSystem::natural;
  double mass_amu = 0.0;            // physical units only
  double temperature_kelvin = 0.0;  // physical units only

  static SystemParams natural(int dim, double box, double lambda,
                              double beta = 1.0);
  // box in angstrom, temperature in kelvin; lambda computed from the mass.
  static SystemParams physical(int dim, double box_angstrom, double mass_amu,
                               double temperature_kelvin);

  SystemParams& with_count(double n);
  SystemParams& with_density(double rho);

  double volume() const;
  double particle_count() const;
  double number_density() const;
  double box_over_lambda() const;

  // Throws std::domain_error on nonsensical geometry (dim < 1, box <= 0,
  // lambda <= 0, negative particle count). Count and density stay optional;
  // modules that need one check for it themselves.
  void validate() const;
};

namespace kernels {

// theta(a) = sum_{z in Z} exp(-pi a z^2), a > 0. Satisfies the duality
// theta(a) = theta(1/a)/sqrt(a); evaluation switches branch at a = 1 so the
// summed series always decays at least like exp(-pi z^2).
double theta_sum(double a);

// log theta(a), exact for large a where theta(a) - 1 underflows in doubles.
double log_theta_sum(double a);

// Riemann zeta on s > 1 via Euler-Maclaurin; throws std::domain_error for
// s <= 1.
double zeta(double s);

// Bose polylog g_s(z) = sum_{n>=1} z^n / n^s for 0 <= z <= 1 (z = 1 gives
// zeta(s), valid for s > 1). Direct series; the remainder after n terms is
// bounded by z^{n+1} / ((1-z) n^s).
double polylog(double s, double z);

// Single-cycle weight of an n-cycle in the periodic box:
// q_n = theta(n lambda^2 / L^2)^dim. Strictly decreasing in n.
double q_cycle(int n, const SystemParams& params);
double log_q_cycle(int n, const SystemParams& params);

// Thermal wavelength. Natural units: params.lambda. Physical units:
// C(mass)/sqrt(T) in angstrom from the CODATA constants.
double thermal_wavelength(const SystemParams& params);

// Translation-invariant pair potentials. Gaussian uses u(r) =
// amplitude * exp(-pi r^2 / width^2) so its integral is amplitude * width^d.
// SoftSphere is the finite plateau u(r) = amplitude for r < range, else 0.
// LatticeNN is the lattice-gas family potential: u(0) = onsite, u(r) = -4c
// at lattice distance 1, zero beyond.
struct PotentialSpec {
  enum class Kind { zero, lennard_jones, soft_sphere, gaussian, lattice_nn };
  Kind kind = Kind::zero;

  double epsilon = 0.0;    // LJ well depth
  double d0 = 0.0;         // LJ zero crossing
  double amplitude = 0.0;  // soft sphere / gaussian
  double range = 0.0;      // soft sphere radius
  double width = 0.0;      // gaussian width
  double onsite = 0.0;     // lattice on-site u0 (may be +inf for hard core)
  double anisotropy = 0.0; // lattice c

  double images_tolerance = 1e-12; // periodization tail target, relative

  static PotentialSpec zero();
  static PotentialSpec lennard_jones(double epsilon, double d0);
  static PotentialSpec soft_sphere(double amplitude, double range);
  static PotentialSpec gaussian(double amplitude, double width);
  static PotentialSpec lattice_nn(double onsite, double anisotropy);

  // Bare u at radial distance r. Throws std::domain_error at a hard-core
  // contact (r = 0 with a divergent kind).
  double evaluate(double r) const;

  // Whether int u d^dx converges at the origin; LJ does not.
  bool integrable(int dim) const;
  // Closed-form int u d^dx where one exists (zero, soft sphere, gaussian);
  // throws std::invalid_argument otherwise.
  double integral(int dim) const;

  std::string name() const;
};

// Periodized potential u_L(x) = sum_{z in Z^dim} u(x + L z). Image shells are
// added until the analytic tail bound for the decaying kind drops below
// images_tolerance relative to the accumulated value (finite-range kinds
// terminate exactly).
double periodize_potential(const PotentialSpec& u, std::span<const double> x,
                           double box);

} // namespace kernels
} // namespace cyclelab
