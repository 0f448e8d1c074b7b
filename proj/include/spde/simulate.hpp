#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spde/model.hpp"
#include "spde/moments.hpp"

namespace spde {

struct SimConfig {
  double dx = 0.02;
  double dt = 1e-4;
  double domain_half_width = 1.2;  // lattice covers [-J dx, J dx], J = floor(L / dx)
  double t_end = 0.3;
  std::uint64_t n_paths = 10000;
  std::uint64_t seed = 1;
  unsigned threads = 0;           // 0: hardware concurrency; never changes results
  bool check_domain = true;       // SHE: rerun on 1.5 L with the same noise
  double offset_probe = 0.1;      // second probe for the x-independence check
};

// Per-probe statistics of one Monte Carlo run.
struct SimSummary {
  MomentCurve second;  // E[u(t,0)^2] with standard errors
  std::vector<double> mean;
  std::vector<double> mean_stderr;
  std::vector<double> variance;  // sample variance of u(t,0)
  std::vector<double> second_offset;
  std::vector<double> second_offset_stderr;
  double offset_x = 0.0;  // offset probe snapped to the lattice
  // SHE only: E[u^2] on the 1.5 L domain minus E[u^2] on L (same noise).
  std::vector<double> boundary_shift;
};

// Explicit Euler for the 1-D SHE (alpha = 2, beta = 1, gamma = 0), u = u0 on
// the boundary. Throws StabilityViolated when dt > dx^2 / (2 nu) and
// InsufficientDomain when the 1.5 L rerun moves any probe by more than 1 SE.
SimSummary simulate_she_summary(const ModelParams& p, const SimConfig& cfg,
                                std::span<const double> probes);
MomentCurve simulate_she(const ModelParams& p, const SimConfig& cfg, std::span<const double> probes);

// Characteristic lattice for the 1-D SWE (alpha = beta = 2, gamma = 0): the
// rectangle kernel 1/(2 kappa) on the light cone, kappa = sqrt(nu / 2), summed
// over past cells. Requires dx = kappa dt; throws InsufficientDomain unless
// L >= |x probe| + kappa t_end + 5 dx.
SimSummary simulate_swe_summary(const ModelParams& p, const SimConfig& cfg,
                                std::span<const double> probes);
MomentCurve simulate_swe(const ModelParams& p, const SimConfig& cfg, std::span<const double> probes);

// u(t, 0) along one SWE path; used for the path-by-path finite speed check.
std::vector<double> swe_path(const ModelParams& p, const SimConfig& cfg,
                             std::span<const double> probes, std::uint64_t path);

// Exact E[u(t,0)^2] of the explicit SHE lattice scheme (covariance recursion,
// no sampling). The Monte Carlo mean converges to this, not to the continuum.
double she_lattice_second_moment(const ModelParams& p, const SimConfig& cfg, double t);

// Exact E[u(t,0)^2] of the SWE lattice scheme inside the light cone.
double swe_lattice_second_moment(const ModelParams& p, const SimConfig& cfg, double t);

// {n_paths, seed, dx, dt, domain_half_width, method, probes, stderr}.
std::string sidecar_json(const SimSummary& s, const SimConfig& cfg);

// Overlap of two wave kernels (nu = 2) over B_eps(x):
// d = 1: int 1/4 1{|y-a|<=t} 1{|y-b|<=s} dy; d = 2: int (1/4 pi^2)
// ((t^2 - |y-a|^2)(s^2 - |y-b|^2))^{-1/2} dy. Needs t, s in [2 eps, 12 eps]
// and a, b in the closed ball; throws GeometryViolation otherwise.
double wave_overlap(int dim, double eps, double t, double s, std::span<const double> a,
                    std::span<const double> b, std::span<const double> x);

// C eps^{-d} t s with C = 1/(2 c^2) (d = 1) or 1/(4 pi c^4) (d = 2), c = 12.
double wave_overlap_lower_bound(int dim, double eps, double t, double s);

}  // namespace spde
