// Acceptance run: one PASS/FAIL line per criterion, runtime budget included.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "spde/cli.hpp"
#include "spde/diagrams.hpp"
#include "spde/model.hpp"
#include "spde/moments.hpp"
#include "spde/simulate.hpp"
#include "spde/specialfn.hpp"
#include "support.hpp"

using namespace spde;
using spde::test::rel_err;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool ok = true;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome r;
  try {
    r = body();
  } catch (const std::exception& e) {
    r = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs < budget_s;
  const bool pass = r.ok && in_time;
  if (!pass) ++failures;
  std::printf("%s %2d  %s: %s [%.2f s of %.0f s%s]\n", pass ? "PASS" : "FAIL", id, title, r.detail.c_str(), secs,
              budget_s, in_time ? "" : ", over budget");
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

ModelParams mk(double alpha, double beta, double gamma_, double nu = 1.0) {
  ModelParams p;
  p.alpha = alpha;
  p.beta = beta;
  p.gamma = gamma_;
  p.nu = nu;
  return p;
}

Outcome ml_identities() {
  double worst = 0.0;
  for (double z : spde::test::linspace(-20.0, 20.0, 100)) {
    const double r = std::sqrt(std::abs(z));
    const double e22 = z == 0.0 ? 1.0 : (z > 0 ? std::sinh(r) / r : std::sin(r) / r);
    worst = std::max({worst, rel_err(mittag_leffler(1.0, 1.0, z), std::exp(z)),
                      rel_err(mittag_leffler(2.0, 1.0, z), z >= 0 ? std::cosh(r) : std::cos(r)),
                      rel_err(mittag_leffler(2.0, 2.0, z), e22),
                      rel_err(mittag_leffler(0.5, 1.0, z), std::exp(z * z) * std::erfc(-z))});
  }
  double worst_rec = 0.0;
  for (double a : {0.5, 1.0, 1.5, 2.0, 2.5})
    for (double b : {0.5, 1.0, 2.0, 3.0})
      for (double x : {0.5, 2.0, 8.0, 20.0}) {
        const double lhs = mittag_leffler(a, b, x) - rgamma(b);
        worst_rec = std::max(worst_rec, rel_err(lhs, x * mittag_leffler(a, a + b, x)));
      }
  return {worst < 1e-8 && worst_rec < 1e-9,
          fmt("closed forms max rel %.2e (tol 1e-8), recurrence max rel %.2e (tol 1e-9)", worst, worst_rec)};
}

Outcome theta_closed_forms() {
  double worst = 0.0;
  worst = std::max(worst, rel_err(big_theta_quadrature(mk(2, 1, 0)), 1.0 / std::sqrt(4 * kPi)));
  worst = std::max(worst, rel_err(big_theta_quadrature(mk(2, 2, 0)), 1.0 / std::sqrt(2.0)));
  for (double a : {1.5, 2.0, 3.0, 5.0})
    worst = std::max(worst, rel_err(big_theta_quadrature(mk(a, 1, 0)), std::tgamma(1 + 1 / a) / kPi));
  for (double a : {1.5, 3.0}) {
    const double sfwe = std::pow(2.0, 2 - 1 / a) * std::cos(kPi / a) * std::tgamma(2 * (1 / a - 1)) / (kPi * a);
    worst = std::max(worst, rel_err(big_theta_quadrature(mk(a, 2, 0)), sfwe));
  }
  return {worst < 1e-6, fmt("SHE, SWE, SFHE x4, SFWE x2 by quadrature: max rel %.2e (tol 1e-6)", worst)};
}

double figure_y(const std::vector<cli::FigureRow>& rows, const char* series, double x) {
  for (const auto& r : rows)
    if (r.series == series && std::abs(r.x - x) < 1e-12) return r.y;
  return NAN;
}

Outcome figure_data() {
  ModelParams base;
  const auto she = cli::figure_data("sheswe", base);
  const double beta[] = {0.5, 1.0, 1.5, 2.0};
  const double want[] = {0.0715941, 0.2820948, 0.5168553, 0.706991};
  double worst = 0.0;
  for (int i = 0; i < 4; ++i) worst = std::max(worst, std::abs(figure_y(she, "big_theta", beta[i]) - want[i]));
  base.nu = 2.0;
  const auto tf = cli::figure_data("tfspde", base);
  const double e1 = std::abs(figure_y(tf, "lyapunov", 1.0) - 0.125);
  const double e2 = std::abs(figure_y(tf, "lyapunov", 2.0) - 1.0 / std::sqrt(2.0));
  return {worst < 1e-3 && e1 < 1e-6 && e2 < 1e-6,
          fmt("Theta_{beta,1} max abs %.2e (tol 1e-3); Lyapunov endpoints off by %.1e, %.1e (tol 1e-6)", worst, e1,
              e2)};
}

Outcome volterra_sweep() {
  const auto grid = spde::test::linspace(0.0, 2.0, 101);
  double worst = 0.0;
  for (const auto& c : spde::test::volterra_sweep()) {
    const auto v = volterra_second_moment(c.p, grid);
    for (std::size_t i = 1; i < grid.size(); ++i) worst = std::max(worst, rel_err(v.values[i], second_moment(c.p, grid[i])));
  }
  return {worst < 1e-4, fmt("6 cases, 100 points on (0, 2]: max rel %.2e (tol 1e-4)", worst)};
}

Outcome monte_carlo() {
  const std::vector<double> she_t{0.3};
  SimConfig c;  // dx 0.02, dt 1e-4, L 1.2, 1e4 paths
  const auto she = simulate_she_summary(ModelParams{}, c, she_t);
  const double she_exact = 1.40283;
  const double e_she = rel_err(she.second.values[0], she_exact);
  double worst_swe = 0.0;
  std::string swe_txt;
  for (double u1 : {0.0, 1.0}) {
    ModelParams p = mk(2, 2, 0, 2.0);
    p.u1 = u1;
    SimConfig w;
    w.dt = 0.005;
    w.dx = std::sqrt(p.nu / 2.0) * w.dt;
    w.t_end = 0.5;
    w.domain_half_width = 0.1 + w.t_end + 6 * w.dx;
    const std::vector<double> t{0.5};
    const auto s = simulate_swe_summary(p, w, t);
    const double exact = swe_second_moment(p.nu, 1.0, 1.0, u1, 0.5);
    worst_swe = std::max(worst_swe, rel_err(s.second.values[0], exact));
    swe_txt += fmt(" SWE(u1=%g) %.5f vs %.5f;", u1, s.second.values[0], exact);
  }
  return {e_she < 0.05 && worst_swe < 0.05,
          fmt("SHE %.5f +- %.5f vs 1.40283 (rel %.2e);", she.second.values[0], she.second.stderr_values[0], e_she) +
              swe_txt + " tol 5%"};
}

Outcome diagram_combinatorics() {
  bool ok = true;
  for (int n = 1; n <= 4; ++n) {
    const Partition pn{{n, n}};
    const auto got = enumerate_admissible(pn).size();
    const auto brute = spde::test::brute_force_matchings(pn).size();
    std::uint64_t fact = 1;
    for (int k = 2; k <= n; ++k) fact *= k;
    ok &= got == fact && brute == fact;
  }
  ok &= count_lower_bound(6, 7) == 36;
  for (int p = 2; p <= 6; p += 2)
    for (int m = p / 2; m <= 8; ++m) {
      std::uint64_t total = 0;
      for (const auto& nv : balanced_partitions(p, m)) total += count_balanced(nv, p, m);
      ok &= total >= count_lower_bound(p, m);
    }
  const auto d1 = diagram_from_text("4 4 | 1,2,2,3 | (1,1)-(2,1); (2,2)-(4,3); (3,1)-(4,2); (3,2)-(4,1)");
  const auto d2 = diagram_from_text("4 4 | 1,2,2,3 | (1,1)-(3,1); (2,1)-(4,1); (2,2)-(4,2); (3,2)-(4,3)");
  ok &= crossing_vanishes(d1) && !crossing_vanishes(d2);
  return {ok, "|D_(n,n)| = n! (n <= 4, brute-force matcher), bound(6,7) = 36, aggregate bound p <= 6, m <= 8, "
              "crossing D1 true / D2 false"};
}

// Pass/fail uses the sum to k = 30 as stated. The converged sum is reported
// alongside: when theta + 1 is small the terms fall off like
// 1 / Gamma(k (theta + 1) + 1), so 30 terms cannot reach 1e-10 near
// lambda^2 t_hat = 5 even though the series identity holds.
Outcome chaos() {
  double worst = 0.0, worst_full = 0.0;
  int slices = 0;
  for (auto c : spde::test::volterra_sweep()) {
    c.p.u1 = 0.0;
    for (double t : spde::test::linspace(0.1, 3.0, 30)) {
      if (c.p.lambda * c.p.lambda * t_hat(c.p, t) > 5.0) continue;
      const double exact = second_moment(c.p, t);
      double s = 0.0;
      for (int k = 0; k <= 400; ++k) {
        const double term = chaos_term(c.p, t, k);
        s += term;
        if (k == 30) worst = std::max(worst, rel_err(s, exact));
        if (k > 30 && term < 1e-18 * s) break;
      }
      worst_full = std::max(worst_full, rel_err(s, exact));
      ++slices;
    }
  }
  double worst_z = 0.0;
  for (int k = 1; k <= 3; ++k) {
    const auto e = chaos_term_mc(ModelParams{}, 1.0, k, 100000, 2024 + k);
    worst_z = std::max(worst_z, std::abs(e.value - chaos_term(ModelParams{}, 1.0, k)) / e.stderr_value);
  }
  return {worst < 1e-10 && worst_z < 3.0,
          fmt("sum to k = 30 max rel %.2e over %g points (tol 1e-10; converged sum %.1e); MC k <= 3 max |z| %.2f "
              "(tol 3)",
              worst, slices, worst_full, worst_z)};
}

Outcome tail_facts() {
  const double h = exp_tail_facts(1000, 1.0).half_ratio;
  bool st = true;
  for (int n = 1; n <= 170; ++n) st &= stirling_check(n).holds;
  return {h >= 0.48 && h <= 0.52 && st, fmt("half_ratio(1000) = %.5f in [0.48, 0.52]; Stirling n in [1, 170]: ", h) +
                                            (st ? "holds" : "fails")};
}

Outcome lyapunov_ratio() {
  double worst = 0.0;
  for (const auto& c : spde::test::volterra_sweep()) {
    const double rate = second_lyapunov(c.p);
    const double t = 200.0 / rate;
    worst = std::max(worst, rel_err(log_second_moment(c.p, t) / t, rate));
  }
  return {worst < 0.02, fmt("infinite-time limits not computed; finite-t ratio log E[u^2]/t at t = 200/rate: max rel %.2e "
                            "(tol 2e-2)",
                            worst)};
}

Outcome crossing() {
  ModelParams base;
  const auto rows = cli::figure_data("sfhe", base, "1.05:5:0.05");
  const auto c = cli::curve_crossing(rows, "sfhe_lyapunov", "sfwe_lyapunov");
  if (!c) return {false, "no crossing found"};
  const bool ok = c->x >= 1.33 && c->x <= 1.36 && c->y >= 1.13 && c->y <= 1.17;
  return {ok, fmt("crossing at alpha = %.4f, value %.4f", c->x, c->y)};
}

}  // namespace

int main() {
  criterion(1, "Mittag-Leffler identities", 1, ml_identities);
  criterion(2, "Theta closed forms", 5, theta_closed_forms);
  criterion(3, "figure data", 10, figure_data);
  criterion(4, "closed form vs Volterra", 30, volterra_sweep);
  criterion(5, "Monte Carlo SHE and SWE", 180, monte_carlo);
  criterion(6, "diagram combinatorics", 10, diagram_combinatorics);
  criterion(7, "chaos consistency", 60, chaos);
  criterion(8, "exponential tail and Stirling facts", 1, tail_facts);
  criterion(9, "asymptotic constants (informational)", 60, lyapunov_ratio);
  criterion(10, "SFHE/SFWE Lyapunov crossing", 10, crossing);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
