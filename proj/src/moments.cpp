#include "spde/moments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

#include "spde/errors.hpp"
#include "spde/numerics.hpp"
#include "spde/specialfn.hpp"

namespace spde {
namespace {

void require_dalang(const ModelParams& p) {
  validate_allow_zero_lambda(p);
  if (!dalang_satisfied(p)) throw DalangViolated("Dalang's condition fails for these parameters");
}

// lambda^2 Theta Gamma(theta + 1)
double lyapunov_base(const ModelParams& p) {
  return p.lambda * p.lambda * big_theta(p) * gamma(theta(p) + 1.0);
}

double log_sum_exp(std::span<const double> logs) {
  double m = -HUGE_VAL;
  for (double l : logs) m = std::max(m, l);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double l : logs) s += std::exp(l - m);
  return m + std::log(s);
}

// u0^2 E_a(A) [+ c1 u0 u1 t E_{a,2}(A) + c1 u1^2 t^2 E_{a,3}(A)], the shared shape of both bounds.
double moment_series(const ModelParams& p, double t, double A, double c0, double c1) {
  const double a = theta(p) + 1.0;
  double v = c0 * p.u0 * p.u0 * ml({a, 1.0, A});
  if (p.beta > 1.0)
    v += c1 * p.u0 * p.u1 * t * ml({a, 2.0, A}) + c1 * p.u1 * p.u1 * t * t * ml({a, 3.0, A});
  return v;
}

// Nodes for the product-integration mesh: uniform steps of at most h_in that
// hit every output point, with [0, tau] replaced by s = tau (j/n)^r grading.
struct Mesh {
  std::vector<double> s;
  std::vector<std::size_t> out_index;
};

Mesh build_mesh(std::span<const double> grid, double h_in, double grading) {
  std::vector<double> s{0.0};
  double prev = 0.0;
  for (double g : grid) {
    if (g <= prev) continue;
    const int k = std::max(1, static_cast<int>(std::ceil((g - prev) / h_in - 1e-9)));
    for (int i = 1; i < k; ++i) s.push_back(prev + (g - prev) * i / k);
    s.push_back(g);
    prev = g;
  }
  const double T = s.back();
  if (grading > 1.0 && T > 0.0) {
    const auto it = std::lower_bound(s.begin(), s.end(), T / 16.0);
    const double tau = *it;
    const int ng = std::max(2, static_cast<int>(std::ceil(grading * tau / h_in)));
    std::vector<double> graded;
    for (int j = 0; j < ng; ++j) graded.push_back(tau * std::pow(static_cast<double>(j) / ng, grading));
    for (double g : grid)
      if (g > 0.0 && g < tau) graded.push_back(g);
    std::sort(graded.begin(), graded.end());
    std::vector<double> merged;
    for (double x : graded)
      if (merged.empty() || x - merged.back() > 1e-14 * T) merged.push_back(x);
    merged.insert(merged.end(), it, s.end());
    s = std::move(merged);
  }
  Mesh m;
  m.s = std::move(s);
  for (double g : grid) {
    const auto it = std::lower_bound(m.s.begin(), m.s.end(), g - 1e-14 * std::max(T, 1.0));
    m.out_index.push_back(static_cast<std::size_t>(it - m.s.begin()));
  }
  return m;
}

std::vector<double> solve_on_mesh(const ModelParams& p, const std::vector<double>& s, double kappa) {
  const double a = theta(p) + 1.0;
  const std::size_t M = s.size();
  std::vector<double> eta(M), pa(M), pa1(M);
  const double j00 = j0(p, s[0]);
  eta[0] = j00 * j00;
  for (std::size_t n = 1; n < M; ++n) {
    for (std::size_t j = 0; j <= n; ++j) {
      const double u = s[n] - s[j];
      pa[j] = std::pow(u, a);
      pa1[j] = pa[j] * u;
    }
    double acc = 0.0, diag = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      // Panel [s_j, s_{j+1}]: exact moments of (s_n - s)^theta against 1 and (s - s_j).
      const double h = s[j + 1] - s[j];
      const double ua = s[n] - s[j];
      const double m0 = (pa[j] - pa[j + 1]) / a;
      const double m1 = ua * m0 - (pa1[j] - pa1[j + 1]) / (a + 1.0);
      const double w_right = m1 / h;
      acc += (m0 - w_right) * eta[j];
      if (j + 1 < n)
        acc += w_right * eta[j + 1];
      else
        diag = w_right;
    }
    const double jn = j0(p, s[n]);
    eta[n] = (jn * jn + kappa * acc) / (1.0 - kappa * diag);
  }
  return eta;
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::ClosedForm: return "closed_form";
    case Method::Volterra: return "volterra";
    case Method::MonteCarlo: return "monte_carlo";
  }
  return "unknown";
}

std::string format_number(double x) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string MomentCurve::to_csv() const {
  std::string out = "t,value,method\n";
  const std::string m = to_string(method);
  for (std::size_t i = 0; i < t_grid.size(); ++i)
    out += format_number(t_grid[i]) + ',' + format_number(values[i]) + ',' + m + '\n';
  return out;
}

double second_moment(const ModelParams& p, double t) {
  require_dalang(p);
  if (!(t >= 0.0)) throw DomainError("second_moment: requires t >= 0");
  if (t == 0.0) return p.u0 * p.u0;
  const double A = p.lambda * p.lambda * t_hat(p, t);
  return moment_series(p, t, A, 1.0, 2.0);
}

double log_second_moment(const ModelParams& p, double t) {
  require_dalang(p);
  if (!(t > 0.0)) throw DomainError("log_second_moment: requires t > 0");
  if (!(p.u0 > 0.0) || !(p.u1 >= 0.0))
    throw DomainError("log_second_moment: requires u0 > 0 and u1 >= 0");
  const double A = p.lambda * p.lambda * t_hat(p, t);
  if (A == 0.0) return 2.0 * std::log(j0(p, t));
  const double a = theta(p) + 1.0;
  std::vector<double> logs{2.0 * std::log(p.u0) + ml_log(a, 1.0, A)};
  if (p.beta > 1.0 && p.u1 > 0.0) {
    logs.push_back(std::log(2.0 * p.u0 * p.u1 * t) + ml_log(a, 2.0, A));
    logs.push_back(std::log(2.0 * p.u1 * p.u1 * t * t) + ml_log(a, 3.0, A));
  }
  return log_sum_exp(logs);
}

MomentCurve second_moment_curve(const ModelParams& p, std::span<const double> t_grid) {
  MomentCurve c;
  c.method = Method::ClosedForm;
  c.params = p;
  c.t_grid.assign(t_grid.begin(), t_grid.end());
  for (double t : t_grid) c.values.push_back(second_moment(p, t));
  return c;
}

double she_second_moment(double nu, double lambda, double u0, double t) {
  if (!(nu > 0.0) || !(t >= 0.0)) throw DomainError("she_second_moment: requires nu > 0, t >= 0");
  const double l2 = lambda * lambda;
  return 2.0 * u0 * u0 * std::exp(l2 * l2 * t / (4.0 * nu)) *
         normal_cdf(l2 * std::sqrt(t) / std::sqrt(2.0 * nu));
}

double swe_second_moment(double nu, double lambda, double u0, double u1, double t) {
  if (!(nu > 0.0) || !(t >= 0.0)) throw DomainError("swe_second_moment: requires nu > 0, t >= 0");
  if (lambda == 0.0) return (u0 + u1 * t) * (u0 + u1 * t);
  const double al = std::abs(lambda);
  const double s = al * t / std::pow(2.0 * nu, 0.25);
  const double c_sq = std::pow(2.0, 1.5) * std::sqrt(nu) * u1 * u1 / (lambda * lambda);
  const double c_mix = std::pow(2.0, 1.25) * std::pow(nu, 0.25) * u0 * u1 / al;
  if (s <= 30.0) {
    const double sh = std::sinh(0.5 * s);
    return u0 * u0 * std::cosh(s) + c_sq * 2.0 * sh * sh + c_mix * std::sinh(s);
  }
  // e^{s}/2 times the bracket, with the decaying exponentials kept exact.
  const double em = std::exp(-s);
  const double bracket = u0 * u0 * (1.0 + em * em) + c_sq * (1.0 - em) * (1.0 - em) +
                         c_mix * (1.0 - em * em);
  if (bracket > 0.0) return std::exp(s - std::numbers::ln2 + std::log(bracket));
  return std::exp(s - std::numbers::ln2) * bracket;
}

double second_lyapunov(const ModelParams& p) {
  require_dalang(p);
  return std::pow(lyapunov_base(p), 1.0 / (theta(p) + 1.0));
}

double pth_moment_upper(const ModelParams& p, double t, double pp) {
  require_dalang(p);
  if (!(pp >= 2.0)) throw DomainError("pth_moment_upper: requires p >= 2");
  if (!(t >= 0.0)) throw DomainError("pth_moment_upper: requires t >= 0");
  if (t == 0.0) return 2.0 * p.u0 * p.u0;
  const double A = 8.0 * pp * p.lambda * p.lambda * t_hat(p, t);
  return moment_series(p, t, A, 2.0, 4.0);
}

double pth_lyapunov_upper(const ModelParams& p, double pp) {
  require_dalang(p);
  if (!(pp >= 2.0)) throw DomainError("pth_lyapunov_upper: requires p >= 2");
  const double a = theta(p) + 1.0;
  return 0.5 * std::pow(8.0 * lyapunov_base(p), 1.0 / a) * std::pow(pp, 1.0 + 1.0 / a);
}

double she_exact_pth_lyapunov(double lambda, double pp) {
  if (!(pp >= 2.0)) throw DomainError("she_exact_pth_lyapunov: requires p >= 2");
  const double l2 = lambda * lambda;
  return pp * (pp * pp - 1.0) * l2 * l2 / 24.0;
}

MomentCurve volterra_second_moment(const ModelParams& p, std::span<const double> t_grid,
                                   const VolterraOptions& opts) {
  require_dalang(p);
  if (t_grid.empty()) throw DomainError("volterra_second_moment: empty grid");
  if (opts.min_steps < 1 || !(opts.rel_tol > 0.0))
    throw DomainError("volterra_second_moment: bad options");
  for (double t : t_grid)
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("volterra: grid must be finite, >= 0");
  if (t_grid.size() > 1) {
    const double h = t_grid[1] - t_grid[0];
    for (std::size_t i = 1; i < t_grid.size(); ++i) {
      const double hi = t_grid[i] - t_grid[i - 1];
      if (!(hi > 0.0) || std::abs(hi - h) > 1e-9 * std::max(h, t_grid.back()))
        throw DomainError("volterra: grid must be uniform and increasing");
    }
  }

  MomentCurve c;
  c.method = Method::Volterra;
  c.params = p;
  c.t_grid.assign(t_grid.begin(), t_grid.end());
  const double T = t_grid.back();
  if (T == 0.0) {
    c.values.assign(t_grid.size(), p.u0 * p.u0);
    return c;
  }
  const double kappa = p.lambda * p.lambda * (p.lambda == 0.0 ? 0.0 : big_theta(p));
  const double th = theta(p);
  // eta ~ t^{theta+1} near 0; this grading restores second order on [0, tau].
  const double grading = th < 1.0 ? 2.0 / (th + 1.0) : 1.0;
  const double h_in = T / opts.min_steps;

  const Mesh coarse = build_mesh(t_grid, h_in, grading);
  const Mesh fine = build_mesh(t_grid, 0.5 * h_in, grading);
  const std::vector<double> ec = solve_on_mesh(p, coarse.s, kappa);
  const std::vector<double> ef = solve_on_mesh(p, fine.s, kappa);
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const double vf = ef[fine.out_index[i]];
    const double vc = ec[coarse.out_index[i]];
    // second-order scheme: error of the fine solution ~ |fine - coarse| / 3
    if (std::abs(vf - vc) / 3.0 > opts.rel_tol * std::abs(vf))
      throw StepTooCoarse("volterra: Richardson estimate exceeds tolerance at t = " +
                          format_number(t_grid[i]));
    c.values.push_back(vf);
  }
  return c;
}

double resolvent_kernel(const ModelParams& p, double t) {
  require_dalang(p);
  if (!(t > 0.0)) throw DomainError("resolvent_kernel: requires t > 0");
  const double a = theta(p) + 1.0;
  const double c = lyapunov_base(p);
  return c * std::pow(t, a - 1.0) * ml({a, a, c * std::pow(t, a)});
}

double resolvent_second_moment(const ModelParams& p, double t) {
  require_dalang(p);
  if (!(t >= 0.0)) throw DomainError("resolvent_second_moment: requires t >= 0");
  const double jt = j0(p, t);
  if (t == 0.0 || p.lambda == 0.0) return jt * jt;
  const double a = theta(p) + 1.0;
  const double c = lyapunov_base(p);
  // tau = t - s, v = tau^a removes the tau^theta singularity of K.
  auto f = [&](double v) {
    const double tau = std::pow(v, 1.0 / a);
    const double g = j0(p, std::max(0.0, t - tau));
    return c / a * ml({a, a, c * v}) * g * g;
  };
  return jt * jt + numerics::integrate(f, 0.0, std::pow(t, a), 1e-12).value;
}

}  // namespace spde
