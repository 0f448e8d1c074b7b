#pragma once

#include <span>

namespace spde {

// Gamma function. Throws PoleError at 0, -1, -2, ...
double gamma(double x);

// 1/Gamma(x); exactly zero at the poles.
double rgamma(double x);

// log Gamma(x) for x > 0 (thread safe).
double log_gamma(double x);

double normal_cdf(double x);

// sin(pi x) with exact argument reduction.
double sin_pi(double x);

struct MLQuery {
  double a = 1.0;
  double b = 1.0;
  double z = 0.0;
};

struct MLValue {
  double value = 0.0;
  // Set when the Laplace-inversion tolerance had to be relaxed, or when a
  // complex branch sum failed its realness check.
  bool reduced_accuracy = false;
};

// Two-parameter Mittag-Leffler function E_{a,b}(z) on the real line.
//   a = b = 1             : exp(z)
//   z > 0, z^{1/a} < 50   : power series
//   z > 0, z^{1/a} >= 50  : exponential asymptotic (overflows to +inf past
//                            z^{1/a} ~ 709; use ml_log there)
//   z < 0, |z|^{1/a} <= 1 : power series
//   z <= -1e4, a <= 2     : poles plus algebraic series
//   z < 0 otherwise       : Laplace inversion on a parabolic contour with
//                            explicit residues at the poles s^a = z
MLValue ml_eval(const MLQuery& q);
double ml(const MLQuery& q);
double mittag_leffler(double a, double b, double z);

// Raw truncated power series with compensated summation.
double ml_series(double a, double b, double z);

// Large-|z| expansion: residues at the poles s^a = z on the principal sheet
// (for z > 0 only those with |n| <= a/4) plus the algebraic series
// -sum_k z^{-k}/Gamma(b - a k), truncated at its smallest term.
double ml_asymptotic(double a, double b, double z);

// Laplace-inversion route alone (any real z, a > 0).
MLValue ml_laplace(double a, double b, double z);

// log E_{a,b}(z) for z > 0 without overflow.
double ml_log(double a, double b, double z);

// t^{-1} log E_{a,b}(C t^a) at the last grid point.
double ml_log_growth(double a, double b, double C, std::span<const double> t);

// Riemann-Liouville integral of t^{beta-1}: Gamma(beta)/Gamma(beta+order) x^{beta+order-1}.
double frac_int_power(double order, double beta, double x);

// int_0^inf sin^2(b xi^{alpha/2}) / xi^alpha d xi, alpha > 1.
double sin_power_integral(double alpha, double b);

}  // namespace spde
