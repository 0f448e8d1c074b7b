#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "doctest.h"
#include "spde/errors.hpp"
#include "spde/moments.hpp"
#include "spde/simulate.hpp"
#include "support.hpp"

using namespace spde;
using spde::test::rel_err;

namespace {

ModelParams she_params() { return ModelParams{}; }

ModelParams swe_params(double nu = 2.0, double u1 = 0.0) {
  ModelParams p;
  p.beta = 2.0;
  p.nu = nu;
  p.u1 = u1;
  return p;
}

// Coarse SHE lattice: 48 interior cells, 300 steps.
SimConfig coarse_she(std::uint64_t paths = 4000) {
  SimConfig c;
  c.dx = 0.05;
  c.dt = 1e-3;
  c.t_end = 0.3;
  c.n_paths = paths;
  c.seed = 5;
  return c;
}

SimConfig swe_cfg(const ModelParams& p, double L = 0.7, std::uint64_t paths = 4000) {
  SimConfig c;
  c.dt = 0.005;
  c.dx = std::sqrt(p.nu / 2.0) * c.dt;
  c.domain_half_width = L;
  c.t_end = 0.5;
  c.n_paths = paths;
  c.seed = 3;
  return c;
}

const std::vector<double> kProbes{0.1, 0.2, 0.3};

}  // namespace

TEST_CASE("SHE: zero coupling keeps u = u0 exactly") {
  ModelParams p = she_params();
  p.lambda = 0.0;
  p.u0 = 1.5;
  const auto s = simulate_she_summary(p, coarse_she(50), kProbes);
  for (std::size_t i = 0; i < kProbes.size(); ++i) {
    CHECK(s.second.values[i] == 2.25);
    CHECK(s.variance[i] == 0.0);
    CHECK(s.mean[i] == 1.5);
  }
}

TEST_CASE("SHE: stability, slice and grid checks") {
  SimConfig c = coarse_she(10);
  c.dt = 1.3e-3;
  CHECK_THROWS_AS(simulate_she(she_params(), c, kProbes), StabilityViolated);
  ModelParams q = she_params();
  q.alpha = 1.5;
  CHECK_THROWS_AS(simulate_she(q, coarse_she(10), kProbes), DomainError);
  const std::vector<double> off_grid{0.1005};
  CHECK_THROWS_AS(simulate_she(she_params(), coarse_she(10), off_grid), DomainError);
  const std::vector<double> late{0.4};
  CHECK_THROWS_AS(simulate_she(she_params(), coarse_she(10), late), DomainError);
}

TEST_CASE("SHE lattice oracle at the default resolution") {
  // numpy covariance recursion of the same scheme
  const SimConfig c;
  CHECK(rel_err(she_lattice_second_moment(she_params(), c, 0.3), 1.4048802589) < 1e-9);
  CHECK(rel_err(she_lattice_second_moment(she_params(), c, 0.3), second_moment(she_params(), 0.3)) < 3e-3);
}

TEST_CASE("SHE Monte Carlo matches the lattice oracle, mean and offset probe within 3 SE") {
  const SimConfig c = coarse_she();
  const auto s = simulate_she_summary(she_params(), c, kProbes);
  CHECK(s.second.method == Method::MonteCarlo);
  for (std::size_t i = 0; i < kProbes.size(); ++i) {
    const double exact = she_lattice_second_moment(she_params(), c, kProbes[i]);
    CAPTURE(kProbes[i]);
    CHECK(std::abs(s.second.values[i] - exact) < 3.0 * s.second.stderr_values[i]);
    CHECK(std::abs(s.mean[i] - 1.0) < 3.0 * s.mean_stderr[i]);
    const double se2 = std::hypot(s.second.stderr_values[i], s.second_offset_stderr[i]);
    CHECK(std::abs(s.second_offset[i] - s.second.values[i]) < 3.0 * se2);
    CHECK(s.variance[i] > 0.0);
    CHECK(std::abs(s.boundary_shift[i]) <= s.second.stderr_values[i]);
  }
  CHECK(s.offset_x == doctest::Approx(0.1));
}

TEST_CASE("SHE results do not depend on the thread count") {
  SimConfig c = coarse_she(300);
  c.threads = 1;
  const auto a = simulate_she_summary(she_params(), c, kProbes);
  c.threads = 3;
  const auto b = simulate_she_summary(she_params(), c, kProbes);
  CHECK(a.second.values == b.second.values);
  CHECK(a.second.stderr_values == b.second.stderr_values);
  CHECK(a.mean == b.mean);
  CHECK(a.boundary_shift == b.boundary_shift);
  c.seed = 6;
  CHECK(simulate_she_summary(she_params(), c, kProbes).second.values != a.second.values);
}

TEST_CASE("SHE: doubling L moves the estimate by less than 1 SE") {
  SimConfig c = coarse_she(1000);
  const auto a = simulate_she_summary(she_params(), c, kProbes);
  c.domain_half_width *= 2.0;
  const auto b = simulate_she_summary(she_params(), c, kProbes);
  for (std::size_t i = 0; i < kProbes.size(); ++i)
    CHECK(std::abs(a.second.values[i] - b.second.values[i]) < a.second.stderr_values[i]);
}

TEST_CASE("SHE: the boundary detector rejects a domain that is too small") {
  SimConfig c = coarse_she(2000);
  c.domain_half_width = 0.25;
  c.offset_probe = 0.0;
  CHECK_THROWS_AS(simulate_she(she_params(), c, kProbes), InsufficientDomain);
  c.check_domain = false;
  CHECK_NOTHROW(simulate_she(she_params(), c, kProbes));
}

TEST_CASE("SHE refinement ladder: lattice bias shrinks monotonically") {
  double prev = HUGE_VAL;
  const double exact = second_moment(she_params(), 0.3);
  for (double dx : {0.04, 0.02, 0.01}) {
    SimConfig c;
    c.dx = dx;
    c.dt = dx * dx / 4.0;
    const double err = std::abs(she_lattice_second_moment(she_params(), c, 0.3) - exact);
    CAPTURE(dx);
    CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("SWE: zero coupling gives u0 + u1 t exactly") {
  ModelParams p = swe_params(2.0, 0.8);
  p.lambda = 0.0;
  const std::vector<double> probes{0.25, 0.5};
  const auto s = simulate_swe_summary(p, swe_cfg(p, 0.7, 20), probes);
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const double j = 1.0 + 0.8 * probes[i];
    CHECK(s.second.values[i] == doctest::Approx(j * j).epsilon(1e-14));
    CHECK(s.variance[i] == doctest::Approx(0.0));
  }
}

TEST_CASE("SWE: characteristic step and light-cone checks") {
  const ModelParams p = swe_params();
  const std::vector<double> probes{0.5};
  SimConfig c = swe_cfg(p, 0.7, 10);
  c.dx *= 1.1;
  CHECK_THROWS_AS(simulate_swe(p, c, probes), DomainError);
  CHECK_THROWS_AS(simulate_swe(p, swe_cfg(p, 0.55, 10), probes), InsufficientDomain);
}

TEST_CASE("SWE lattice oracle converges to the closed form") {
  const ModelParams p = swe_params();
  double prev = HUGE_VAL;
  for (double dt : {0.01, 0.005, 0.0025}) {
    SimConfig c = swe_cfg(p);
    c.dt = dt;
    c.dx = dt;
    const double err = std::abs(swe_lattice_second_moment(p, c, 0.5) - std::cosh(0.5 / std::sqrt(2.0)));
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev / std::cosh(0.5 / std::sqrt(2.0)) < 1e-5);
}

TEST_CASE("SWE Monte Carlo matches its lattice oracle within 3 SE") {
  for (double u1 : {0.0, 1.0}) {
    const ModelParams p = swe_params(2.0, u1);
    const SimConfig c = swe_cfg(p);
    const std::vector<double> probes{0.25, 0.5};
    const auto s = simulate_swe_summary(p, c, probes);
    for (std::size_t i = 0; i < probes.size(); ++i) {
      CAPTURE(u1);
      CAPTURE(probes[i]);
      CHECK(std::abs(s.second.values[i] - swe_lattice_second_moment(p, c, probes[i])) < 3.0 * s.second.stderr_values[i]);
      CHECK(std::abs(s.mean[i] - j0(p, probes[i])) < 3.0 * s.mean_stderr[i]);
      CHECK(s.variance[i] > 0.0);
    }
  }
}

TEST_CASE("SWE finite speed: paths identical on [-L, L] and [-2L, 2L]") {
  const ModelParams p = swe_params(2.0, 0.5);
  const std::vector<double> probes{0.1, 0.3, 0.5};
  ModelParams strong = p;
  strong.lambda = 3.0;
  for (const ModelParams& q : {p, strong}) {
    for (std::uint64_t path : {0ull, 17ull, 999ull}) {
      const auto a = swe_path(q, swe_cfg(q, 0.7), probes, path);
      const auto b = swe_path(q, swe_cfg(q, 1.4), probes, path);
      CHECK(a == b);
    }
  }
}

TEST_CASE("SWE results do not depend on the thread count") {
  const ModelParams p = swe_params(1.0, 0.3);
  SimConfig c = swe_cfg(p, 0.7, 500);
  c.threads = 1;
  const std::vector<double> probes{0.5};
  const auto a = simulate_swe(p, c, probes);
  c.threads = 4;
  const auto b = simulate_swe(p, c, probes);
  CHECK(a.values == b.values);
  CHECK(a.stderr_values == b.stderr_values);
}

TEST_CASE("sidecar JSON carries the run metadata") {
  const SimConfig c = coarse_she(50);
  const auto s = simulate_she_summary(she_params(), c, kProbes);
  const std::string j = sidecar_json(s, c);
  for (const char* key : {"\"n_paths\"", "\"seed\"", "\"dx\"", "\"dt\"", "\"stderr\"", "\"probes\"", "\"method\""})
    CHECK(j.find(key) != std::string::npos);
}

TEST_CASE("wave_overlap in one dimension is eps / 2") {
  const double eps = 0.3;
  const std::vector<double> x{1.0};
  for (auto [t, s, a, b] : {std::tuple{0.6, 0.6, 1.0, 1.0}, {0.7, 3.6, 0.75, 1.3}, {3.6, 0.6, 1.3, 0.7}}) {
    const std::vector<double> va{a}, vb{b};
    CHECK(wave_overlap(1, eps, t, s, va, vb, x) == doctest::Approx(eps / 2).epsilon(1e-14));
    CHECK(eps / 2 >= wave_overlap_lower_bound(1, eps, t, s));
  }
  CHECK(wave_overlap_lower_bound(1, eps, 2 * eps, 2 * eps) == doctest::Approx((2 * eps) * (2 * eps) / (eps * 2.0 * 144.0)));
}

TEST_CASE("wave_overlap in two dimensions") {
  const double eps = 0.5;
  const std::vector<double> x{0.2, -0.1};
  const double t = 2 * eps;
  // a = b = x: (1/4 pi) ln(t^2 / (t^2 - eps^2)) in closed form
  const double exact = std::log(t * t / (t * t - eps * eps)) / (4 * std::numbers::pi);
  const double v = wave_overlap(2, eps, t, t, x, x, x);
  CHECK(rel_err(v, exact) < 1e-8);
  CHECK(v >= eps * eps / (4 * std::numbers::pi * t * t));
  CHECK(v >= wave_overlap_lower_bound(2, eps, t, t));
  const std::vector<double> a{0.2 + 0.3, -0.1}, b{0.2, -0.1 - 0.45};
  for (auto [tt, ss] : {std::pair{1.0, 1.0}, {1.3, 6.0}, {6.0, 6.0}}) {
    CHECK(wave_overlap(2, eps, tt, ss, a, b, x) >= wave_overlap_lower_bound(2, eps, tt, ss));
  }
}

TEST_CASE("wave_overlap geometry checks") {
  const std::vector<double> x{0.0}, far{0.6};
  CHECK_THROWS_AS(wave_overlap(1, 0.5, 0.9, 1.0, x, x, x), GeometryViolation);
  CHECK_THROWS_AS(wave_overlap(1, 0.5, 1.0, 6.5, x, x, x), GeometryViolation);
  CHECK_THROWS_AS(wave_overlap(1, 0.5, 1.0, 1.0, far, x, x), GeometryViolation);
  CHECK_THROWS_AS(wave_overlap(3, 0.5, 1.0, 1.0, x, x, x), GeometryViolation);
}
