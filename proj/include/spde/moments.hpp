#pragma once

#include <span>
#include <string>
#include <vector>

#include "spde/model.hpp"

namespace spde {

enum class Method { ClosedForm, Volterra, MonteCarlo };

std::string to_string(Method m);

// Sampled t -> E[u(t,x)^2]. stderr_values is empty unless method = MonteCarlo.
struct MomentCurve {
  std::vector<double> t_grid;
  std::vector<double> values;
  std::vector<double> stderr_values;
  Method method = Method::ClosedForm;
  ModelParams params;

  // Header "t,value,method", 17 significant digits, locale independent.
  std::string to_csv() const;
};

// Shortest round-trip-safe text for x, at most 17 significant digits.
std::string format_number(double x);

// u0^2 E_{theta+1}(lambda^2 t_hat) [+ 2 u0 u1 t E_{theta+1,2} + 2 u1^2 t^2 E_{theta+1,3} when beta > 1].
double second_moment(const ModelParams& p, double t);

// log of second_moment without overflow; requires u0 > 0 and u1 >= 0.
double log_second_moment(const ModelParams& p, double t);

MomentCurve second_moment_curve(const ModelParams& p, std::span<const double> t_grid);

double she_second_moment(double nu, double lambda, double u0, double t);
double swe_second_moment(double nu, double lambda, double u0, double u1, double t);

// (lambda^2 Theta Gamma(theta+1))^{1/(theta+1)}
double second_lyapunov(const ModelParams& p);

// Right side of the bound on ||u(t,x)||_p^2.
double pth_moment_upper(const ModelParams& p, double t, double pp);

// 1/2 (8 lambda^2 Theta Gamma(theta+1))^{1/(theta+1)} pp^{1 + 1/(theta+1)}
double pth_lyapunov_upper(const ModelParams& p, double pp);

// p (p^2 - 1) lambda^4 / 24
double she_exact_pth_lyapunov(double lambda, double pp);

struct VolterraOptions {
  // Internal step on the uniform part is at most t_max / min_steps.
  int min_steps = 1024;
  // Richardson (h vs h/2) relative estimate allowed at every grid point.
  double rel_tol = 1e-4;
};

// Solves eta(t) = J0(t)^2 + lambda^2 Theta int_0^t (t-s)^theta eta(s) ds by
// product integration against piecewise-linear eta. t_grid must be uniform.
// Throws StepTooCoarse when the Richardson estimate exceeds opts.rel_tol.
MomentCurve volterra_second_moment(const ModelParams& p, std::span<const double> t_grid,
                                   const VolterraOptions& opts = {});

// K(t) = k Gamma(theta+1) t^theta E_{theta+1,theta+1}(k Gamma(theta+1) t^{theta+1}), k = lambda^2 Theta.
double resolvent_kernel(const ModelParams& p, double t);

// J0(t)^2 + int_0^t K(t-s) J0(s)^2 ds by quadrature.
double resolvent_second_moment(const ModelParams& p, double t);

}  // namespace spde
