#pragma once

#include <functional>
#include <span>
#include <vector>

namespace spde::numerics {

struct Integral {
  double value = 0.0;
  double error = 0.0;
};

// Globally adaptive Gauss-Kronrod (21 point) on [a, b], finite endpoints.
// Stops once error <= max(abs_tol, rel_tol * |value|).
Integral integrate(const std::function<double(double)>& f, double a, double b,
                   double rel_tol = 1e-12, double abs_tol = 0.0);

// As integrate, over consecutive breakpoints sharing one error budget.
Integral integrate_panels(const std::function<double(double)>& f, std::span<const double> nodes,
                          double rel_tol = 1e-12, double abs_tol = 0.0);

// Wynn epsilon extrapolation of a sequence of partial sums. Returns the
// estimated limit and an error estimate from the last two diagonal entries.
Integral wynn_epsilon(std::span<const double> partial_sums);

// Pairwise (cascade) summation; order-deterministic.
double pairwise_sum(std::span<const double> v);

}  // namespace spde::numerics
