#include "cyclelab/bounds.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "cyclelab/idealgas.hpp"

namespace cyclelab::bounds {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Surface area of the unit sphere in d dimensions, 2 pi^{d/2} / Gamma(d/2).
double sphere_area(int dim) {
  return 2.0 * std::pow(kPi, 0.5 * dim) / std::tgamma(0.5 * dim);
}

// Radial support cutoff past which |u| is negligible relative to its scale.
// Soft spheres are exactly supported; Gaussians get four widths, where the
// density has fallen below e^{-16 pi} ~ 2e-22 of the amplitude.
double radial_cutoff(const kernels::PotentialSpec& u) {
  using Kind = kernels::PotentialSpec::Kind;
  switch (u.kind) {
    case Kind::zero:
      return 0.0;
    case Kind::soft_sphere:
      return u.range;
    case Kind::gaussian:
      return 4.0 * u.width;
    default:
      throw std::invalid_argument("potential '" + u.name() +
                                  "' is not integrable; bounds need int u");
  }
}

void require_integrable(const kernels::PotentialSpec& u, int dim) {
  if (!u.integrable(dim))
    throw std::invalid_argument("potential '" + u.name() +
                                "' is not integrable in dim " +
                                std::to_string(dim));
}

// int_{R^d} u(|x|) g(|x|) dx by adaptive Gauss-Kronrod on the radius.
template <typename Extra>
double radial_integral(const kernels::PotentialSpec& u, int dim,
                       Extra&& weight) {
  double cut = radial_cutoff(u);
  if (cut == 0.0) return 0.0;
  auto integrand = [&](double r) {
    return u.evaluate(r) * weight(r) * std::pow(r, dim - 1);
  };
  double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, 0.0, cut, 12, 1e-13);
  return sphere_area(dim) * value;
}

double log_sum_exp(const std::vector<double>& terms) {
  double peak = -std::numeric_limits<double>::infinity();
  for (double t : terms) peak = std::max(peak, t);
  if (!std::isfinite(peak)) return peak;
  double total = 0.0;
  for (double t : terms) total += std::exp(t - peak);
  return peak + std::log(total);
}

}  // namespace

double alpha(int n, int k, double lambda_beta) {
  if (!(lambda_beta > 0.0))
    throw std::domain_error("alpha: lambda must be positive");
  if (n < 2 || k < 1 || k > n - 1)
    throw std::domain_error("alpha: need 1 <= k <= n-1");
  return (1.0 / k + 1.0 / (n - k)) / (lambda_beta * lambda_beta);
}

double stability_constant(const kernels::PotentialSpec& u) {
  using Kind = kernels::PotentialSpec::Kind;
  if (u.kind == Kind::zero || u.kind == Kind::gaussian)
    return 0.5 * u.evaluate(0.0);
  throw std::invalid_argument(
      "no built-in positive-definiteness for potential '" + u.name() +
      "'; supply the stability constant explicitly");
}

PhiBound phi_upper(int n, const SystemParams& params,
                   const kernels::PotentialSpec& u) {
  params.validate();
  require_integrable(u, params.dim);
  if (n < 1) throw std::domain_error("phi_upper: cycle length must be >= 1");
  PhiBound bound{0.0, 0.0};
  for (int k = 1; k <= n - 1; ++k) {
    double a = alpha(n, k, params.lambda);
    bound.k_sum += 0.5 * std::pow(a, 0.5 * params.dim) *
                   radial_integral(u, params.dim, [&](double r) {
                     return std::exp(-kPi * a * r * r);
                   });
  }
  if (params.dim >= 3)
    bound.uniform = kernels::zeta(0.5 * params.dim) *
                    std::pow(params.lambda, -params.dim) *
                    u.integral(params.dim);
  return bound;
}

double psi_upper(double rho, const kernels::PotentialSpec& u, int dim) {
  if (!(rho >= 0.0)) throw std::domain_error("psi_upper: density must be >= 0");
  require_integrable(u, dim);
  return rho * radial_integral(u, dim, [](double) { return 1.0; });
}

KernelValue h_beta_kernel(double x, const SystemParams& params,
                          int k_max) {
  params.validate();
  if (params.dim <= 2)
    throw std::domain_error("h kernel diverges for dim <= 2");
  if (k_max < 1) throw std::domain_error("k_max must be >= 1");
  double lambda_sq = params.lambda * params.lambda;
  double value = 0.0;
  for (int k = 1; k <= k_max; ++k)
    value += std::pow(static_cast<double>(k), -0.5 * params.dim) *
             std::exp(-kPi * x * x / (k * lambda_sq));
  // Dropped terms are below k^{-d/2}; compare with the integral of t^{-d/2}.
  double s = 0.5 * params.dim;
  double tail = std::pow(static_cast<double>(k_max), 1.0 - s) / (s - 1.0);
  return {value, tail};
}

BoundReport f_upper(double rho, const SystemParams& params,
                    const kernels::PotentialSpec& u) {
  params.validate();
  require_integrable(u, params.dim);
  if (!(rho > 0.0)) throw std::domain_error("f_upper: density must be > 0");
  int d = params.dim;
  double beta = params.beta;
  double lambda_d = std::pow(params.lambda, d);
  double rho_lambda_d = rho * lambda_d;

  BoundReport report{};
  auto mu = idealgas::mu_ideal(rho_lambda_d, d);
  report.saturated = mu.saturated;
  if (mu.saturated) {
    report.f_zero = idealgas::f0_limit(rho_lambda_d, d, beta, params.lambda);
  } else {
    // f0 = rho mu - p with p = g_{d/2+1}(z) / (beta lambda^d).
    double pressure =
        kernels::polylog(0.5 * d + 1.0, std::exp(mu.beta_mu)) /
        (beta * lambda_d);
    report.f_zero = rho * mu.beta_mu / beta - pressure;
  }

  const int k_max = 400;
  double int_u = radial_integral(u, d, [](double) { return 1.0; });
  double tail_scale = 0.0;
  double int_u_h = radial_integral(u, d, [&](double r) {
    return h_beta_kernel(r, params, k_max).value;
  });
  // The kernel truncation enters linearly: |dropped| <= tail * int |u|.
  // Our integrable kinds are sign-definite, so int |u| = |int u|.
  tail_scale = h_beta_kernel(0.0, params, k_max).tail_bound * std::abs(int_u);

  report.mean_field =
      0.5 * rho * rho * int_u + rho / lambda_d * int_u_h + report.f_zero;
  report.coarse = rho * rho * int_u + rho / beta * std::log(rho_lambda_d);
  report.kernel_tail_bound = tail_scale * rho / lambda_d;
  report.mean_field_tighter = report.mean_field <= report.coarse;
  return report;
}

double qminus_residual(const SystemParams& params, int n_max,
                       double c_coupling, double d_coupling) {
  params.validate();
  if (n_max < 1 || n_max > 2000)
    throw std::domain_error("qminus residual supported for 1 <= N <= 2000");

  std::vector<double> log_q(n_max + 1, 0.0);
  for (int n = 1; n <= n_max; ++n)
    log_q[n] = kernels::log_q_cycle(n, params);

  // Ideal reference by the plain recursion.
  idealgas::RecursionTable table = idealgas::recursion_table(params, n_max);

  std::vector<double> log_qminus(n_max + 1, 0.0);
  std::vector<double> terms;
  double worst = 0.0;
  for (int m = 1; m <= n_max; ++m) {
    terms.clear();
    for (int n = 1; n <= m; ++n) {
      double penalty = c_coupling * (static_cast<double>(n) * (m - n) +
                                     0.5 * static_cast<double>(n) * (n - 1)) +
                       d_coupling * n;
      terms.push_back(log_q[n] - penalty + log_qminus[m - n]);
    }
    log_qminus[m] = log_sum_exp(terms) - std::log(static_cast<double>(m));
    double closed = -c_coupling * 0.5 * static_cast<double>(m) * (m - 1) -
                    d_coupling * m + table.logQ[m];
    worst = std::max(worst, std::abs(log_qminus[m] - closed));
  }
  return worst;
}

double qminus_identity(const SystemParams& params, int n_max,
                       const kernels::PotentialSpec& u) {
  params.validate();
  require_integrable(u, params.dim);
  double int_u = radial_integral(u, params.dim, [](double) { return 1.0; });
  double int_u_h = radial_integral(u, params.dim, [&](double r) {
    return h_beta_kernel(r, params, 400).value;
  });
  double c_coupling =
      params.beta * std::pow(params.box, -params.dim) * int_u;
  double d_coupling =
      params.beta * std::pow(params.lambda, -params.dim) * int_u_h;
  return qminus_residual(params, n_max, c_coupling, d_coupling);
}

}  // namespace cyclelab::bounds
