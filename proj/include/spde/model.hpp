#pragma once

#include <map>
#include <string>

namespace spde {

// One SPDE instance: d^beta u = -(nu/2)(-Delta)^{alpha/2} u + I^gamma[lambda u W'].
struct ModelParams {
  double alpha = 2.0;
  double beta = 1.0;
  double gamma = 0.0;
  double lambda = 1.0;
  double nu = 1.0;
  int dim = 1;
  double u0 = 1.0;
  double u1 = 0.0;

  bool operator==(const ModelParams&) const = default;
};

// Throws DomainError unless alpha > 0, beta in (0,2], gamma >= 0, nu > 0,
// lambda != 0 and dim >= 1 (all finite).
void validate(const ModelParams& p);

// Same as validate but admits lambda = 0 (deterministic limit).
void validate_allow_zero_lambda(const ModelParams& p);

// Right-hand side of the dimension bound: Dalang holds iff dim < dalang_bound(p).
double dalang_bound(const ModelParams& p);
bool dalang_satisfied(const ModelParams& p);

// theta = 2(beta+gamma) - 2 - beta d / alpha.
double theta(const ModelParams& p);

// Radial Fourier transform of the fundamental kernel at |xi| = r.
double kernel_ft(const ModelParams& p, double t, double r);

// Theta = (2 pi)^{-d} int E^2_{beta,beta+gamma}(-nu |xi|^alpha / 2) d xi.
// Requires Dalang; closed form for beta = 2, gamma = 0, d = 1.
double big_theta(const ModelParams& p);

// Same spatial integral without the Dalang precondition; throws DomainError
// only when the integral itself diverges.
double big_theta_unchecked(const ModelParams& p);

// Always by quadrature (no closed-form shortcut); used to cross-check.
double big_theta_quadrature(const ModelParams& p);

// True when the spatial integral defining Theta is finite.
bool spatially_integrable(const ModelParams& p);

// int_0^inf E^2_{b0,b0+g}(-r^a) r^{d-1} dr with ConvergenceFailure above rel_tol.
double radial_ml_integral(double a, double beta, double gamma, int dim, double rel_tol = 1e-8);

double t_hat(const ModelParams& p, double t);
double t_p(const ModelParams& p, double t, double pp);

// int |p(s,x)|^2 dx = Theta s^theta.
double l2_norm_kernel(const ModelParams& p, double s);

// Direct radial quadrature of kernel_ft^2, independent of the scaled route.
double l2_norm_kernel_quadrature(const ModelParams& p, double s);

// Homogeneous solution: u0 for beta <= 1, u0 + u1 t otherwise.
double j0(const ModelParams& p, double t);

enum class Nonnegativity { Nonnegative, Unknown };
Nonnegativity kernel_nonneg_known(const ModelParams& p);

struct DerivedConstants {
  double theta = 0.0;
  double big_theta = 0.0;
  double lyapunov_base = 0.0;  // lambda^2 Theta Gamma(theta+1)
};
DerivedConstants derived_constants(const ModelParams& p);

// Flat key=value text, one pair per line; '#' starts a comment.
std::string to_kv(const ModelParams& p);
ModelParams from_kv(const std::string& text, ModelParams base = {});
std::map<std::string, double> to_map(const ModelParams& p);

}  // namespace spde
