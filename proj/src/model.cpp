#include "spde/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <mutex>
#include <numbers>
#include <sstream>
#include <tuple>
#include <vector>

#include "spde/errors.hpp"
#include "spde/numerics.hpp"
#include "spde/specialfn.hpp"

namespace spde {
namespace {

constexpr double kPi = std::numbers::pi;

// Switch to the closed-form large-x expansion of E(-x) beyond this argument.
constexpr double kAsymptoticX = 1e4;
// Cap on oscillation panels for beta close to 2.
constexpr std::size_t kMaxPanels = 400000;

bool finite_all(const ModelParams& p) {
  return std::isfinite(p.alpha) && std::isfinite(p.beta) && std::isfinite(p.gamma) &&
         std::isfinite(p.lambda) && std::isfinite(p.nu) && std::isfinite(p.u0) &&
         std::isfinite(p.u1);
}

double sphere_area(int d) { return 2.0 * std::pow(kPi, 0.5 * d) / gamma(0.5 * d); }

// Coefficients c_k of E_{beta,b}(-x) ~ sum_k c_k x^{-k}: c_k = (-1)^{k+1}/Gamma(b - beta k).
std::vector<double> algebraic_coefficients(double beta, double b, std::size_t K) {
  std::vector<double> c(K + 1, 0.0);
  for (std::size_t k = 1; k <= K; ++k) {
    const double sign = (k % 2 == 1) ? 1.0 : -1.0;
    c[k] = sign * rgamma(b - beta * static_cast<double>(k));
  }
  return c;
}

// Coefficients of B(x)^2 = sum_m d_m x^{-m}.
std::vector<double> squared_coefficients(const std::vector<double>& c) {
  const std::size_t K = c.size() - 1;
  std::vector<double> d(2 * K + 1, 0.0);
  for (std::size_t i = 1; i <= K; ++i)
    for (std::size_t j = 1; j <= K; ++j) d[i + j] += c[i] * c[j];
  return d;
}

// int_R^inf r^{d-1} x^{-m} dr with x = r^alpha.
double power_tail(double R, double alpha, int dim, int m) {
  const double e = m * alpha - dim;
  return std::pow(R, -e) / e;
}

double E_neg(double beta, double b, double x) { return ml_eval({beta, b, -x}).value; }

// Breakpoints: dyadic near the origin, then every half period of the phase
// sigma * r^{alpha/beta_eff} once that is finer than the dyadic grid.
std::vector<double> panel_nodes(double R, double alpha, double omega, double sigma) {
  std::vector<double> nodes{0.0};
  for (double x = 1.0 / 64.0; x < R; x *= 2.0) nodes.push_back(x);
  if (sigma > 0.0) {
    // phase(r) = sigma * r^{alpha*omega}; node r_k solves phase = k pi
    const double kmax = sigma * std::pow(R, alpha * omega) / kPi;
    if (kmax > static_cast<double>(kMaxPanels))
      throw ConvergenceFailure("big_theta: oscillatory range needs too many panels");
    for (std::size_t k = 1; k <= static_cast<std::size_t>(kmax); ++k)
      nodes.push_back(std::pow(k * kPi / sigma, 1.0 / (alpha * omega)));
  }
  nodes.push_back(R);
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  while (nodes.size() > 1 && nodes.back() > R) nodes.pop_back();
  if (nodes.back() < R) nodes.push_back(R);
  return nodes;
}

// Oscillatory tail int_R^inf g(r) dr where g carries cos(freq * r^{alpha/2} + shift).
// Pieces run between consecutive zeros of the cosine, so partial sums alternate;
// Wynn-accelerated.
numerics::Integral oscillatory_tail(const std::function<double(double)>& g, double R,
                                    double alpha, double freq, double shift) {
  auto node = [&](double k) {
    return std::pow(((k + 0.5) * kPi - shift) / freq, 2.0 / alpha);
  };
  double k0 = std::ceil((freq * std::pow(R, 0.5 * alpha) + shift) / kPi - 0.5);
  numerics::Integral head = numerics::integrate(g, R, node(k0), 1e-12);
  std::vector<double> partial;
  double acc = head.value, err = head.error;
  partial.push_back(acc);
  for (int i = 0; i < 60; ++i) {
    const numerics::Integral piece = numerics::integrate(g, node(k0 + i), node(k0 + i + 1), 1e-12);
    acc += piece.value;
    err += piece.error;
    partial.push_back(acc);
  }
  numerics::Integral lim = numerics::wynn_epsilon(partial);
  lim.error += err;
  return lim;
}

struct RadialKey {
  double alpha, beta, gamma;
  int dim;
  bool operator<(const RadialKey& o) const {
    return std::tie(alpha, beta, gamma, dim) < std::tie(o.alpha, o.beta, o.gamma, o.dim);
  }
};

std::mutex& cache_mutex() {
  static std::mutex m;
  return m;
}
std::map<RadialKey, double>& cache() {
  static std::map<RadialKey, double> c;
  return c;
}

double scale_factor(const ModelParams& p) {
  const int d = p.dim;
  return std::pow(2.0 * kPi, -d) * std::pow(0.5 * p.nu, -static_cast<double>(d) / p.alpha) *
         sphere_area(d);
}

}  // namespace

void validate_allow_zero_lambda(const ModelParams& p) {
  if (!finite_all(p)) throw DomainError("parameters must be finite");
  if (!(p.alpha > 0.0)) throw DomainError("alpha must be > 0");
  if (!(p.beta > 0.0 && p.beta <= 2.0)) throw DomainError("beta must lie in (0, 2]");
  if (!(p.gamma >= 0.0)) throw DomainError("gamma must be >= 0");
  if (!(p.nu > 0.0)) throw DomainError("nu must be > 0");
  if (p.dim < 1) throw DomainError("dim must be >= 1");
}

void validate(const ModelParams& p) {
  validate_allow_zero_lambda(p);
  if (p.lambda == 0.0) throw DomainError("lambda must be nonzero");
}

double dalang_bound(const ModelParams& p) {
  validate_allow_zero_lambda(p);
  if (p.beta < 2.0) return 2.0 * p.alpha + p.alpha / p.beta * std::min(2.0 * p.gamma - 1.0, 0.0);
  return p.alpha * std::min(2.0, 1.0 + p.gamma);
}

bool dalang_satisfied(const ModelParams& p) { return static_cast<double>(p.dim) < dalang_bound(p); }

double theta(const ModelParams& p) {
  return 2.0 * (p.beta + p.gamma) - 2.0 - p.beta * p.dim / p.alpha;
}

double kernel_ft(const ModelParams& p, double t, double r) {
  validate_allow_zero_lambda(p);
  if (!(t > 0.0) || !(r >= 0.0)) throw DomainError("kernel_ft: requires t > 0, r >= 0");
  const double b = p.beta + p.gamma;
  const double x = 0.5 * p.nu * std::pow(t, p.beta) * std::pow(r, p.alpha);
  return std::pow(t, b - 1.0) * E_neg(p.beta, b, x);
}

bool spatially_integrable(const ModelParams& p) {
  validate_allow_zero_lambda(p);
  const double b = p.beta + p.gamma;
  const double d = p.dim;
  if (p.beta == 2.0 && !(p.alpha * (1.0 + p.gamma) > d)) return false;
  const std::vector<double> c = algebraic_coefficients(p.beta, b, 8);
  for (std::size_t k = 1; k < c.size(); ++k)
    if (c[k] != 0.0) return 2.0 * k * p.alpha > d;
  return true;
}

double radial_ml_integral(double alpha, double beta, double gamma, int dim, double rel_tol) {
  const double b = beta + gamma;
  const double dm1 = dim - 1.0;
  auto f = [&](double r) {
    if (r == 0.0) return dim == 1 ? std::pow(rgamma(b), 2) : 0.0;
    const double e = E_neg(beta, b, std::pow(r, alpha));
    return e * e * std::pow(r, dm1);
  };

  const std::vector<double> c = algebraic_coefficients(beta, b, 6);
  const std::vector<double> dsq = squared_coefficients(c);
  for (std::size_t m = 2; m < dsq.size(); ++m)
    if (dsq[m] != 0.0 && !(m * alpha > dim))
      throw DomainError("spatial integral diverges for these parameters");

  numerics::Integral total;
  double R = std::pow(kAsymptoticX, 1.0 / alpha);

  if (beta < 2.0) {
    // Pole terms decay like exp(cos(pi/beta) x^{1/beta}); integrate until gone.
    double sigma = 0.0;
    if (beta > 1.0) {
      const double cs = std::cos(kPi / beta);
      sigma = std::sin(kPi / beta);
      const double w_end = 45.0 / (-cs);
      R = std::max(R, std::pow(w_end, beta / alpha));
    }
    const std::vector<double> nodes = panel_nodes(R, alpha, 1.0 / beta, sigma);
    total = numerics::integrate_panels(f, nodes, 1e-11);
    for (std::size_t m = 2; m < dsq.size(); ++m)
      if (dsq[m] != 0.0) total.value += dsq[m] * power_tail(R, alpha, dim, static_cast<int>(m));
  } else {
    if (!(alpha * (1.0 + gamma) > dim))
      throw DomainError("spatial integral diverges for these parameters");
    const std::vector<double> nodes = panel_nodes(R, alpha, 0.5, 1.0);
    total = numerics::integrate_panels(f, nodes, 1e-11);
    // E(-x) = x^{q} cos(sqrt(x) + phi0) + B(x), q = (1-b)/2, phi0 = (1-b) pi/2.
    const double q = 0.5 * (1.0 - b);
    const double phi0 = 0.5 * (1.0 - b) * kPi;
    auto B = [&](double x) {
      double s = 0.0;
      for (std::size_t k = 1; k < c.size(); ++k) s += c[k] * std::pow(x, -static_cast<double>(k));
      return s;
    };
    // x^{2q}/2 mean of the squared cosine, in closed form.
    total.value += 0.5 * std::pow(R, dim - alpha * (b - 1.0)) / (alpha * (b - 1.0) - dim);
    for (std::size_t m = 2; m < dsq.size(); ++m)
      if (dsq[m] != 0.0) total.value += dsq[m] * power_tail(R, alpha, dim, static_cast<int>(m));
    auto g_fast = [&](double r) {
      const double x = std::pow(r, alpha);
      return 0.5 * std::pow(x, 2.0 * q) * std::cos(2.0 * std::sqrt(x) + 2.0 * phi0) *
             std::pow(r, dm1);
    };
    const numerics::Integral t1 = oscillatory_tail(g_fast, R, alpha, 2.0, 2.0 * phi0);
    total.value += t1.value;
    total.error += t1.error;
    if (gamma > 0.0) {
      auto g_cross = [&](double r) {
        const double x = std::pow(r, alpha);
        return 2.0 * std::pow(x, q) * std::cos(std::sqrt(x) + phi0) * B(x) * std::pow(r, dm1);
      };
      const numerics::Integral t2 = oscillatory_tail(g_cross, R, alpha, 1.0, phi0);
      total.value += t2.value;
      total.error += t2.error;
    }
  }
  if (!(total.value > 0.0) || !std::isfinite(total.value))
    throw ConvergenceFailure("big_theta: non-positive or non-finite radial integral");
  if (total.error > rel_tol * total.value)
    throw ConvergenceFailure("big_theta: quadrature error estimate above tolerance");
  return total.value;
}

double big_theta_quadrature(const ModelParams& p) {
  validate_allow_zero_lambda(p);
  const RadialKey key{p.alpha, p.beta, p.gamma, p.dim};
  {
    std::lock_guard<std::mutex> lock(cache_mutex());
    auto it = cache().find(key);
    if (it != cache().end()) return scale_factor(p) * it->second;
  }
  const double I = radial_ml_integral(p.alpha, p.beta, p.gamma, p.dim);
  {
    std::lock_guard<std::mutex> lock(cache_mutex());
    cache().emplace(key, I);
  }
  return scale_factor(p) * I;
}

double big_theta_unchecked(const ModelParams& p) {
  validate_allow_zero_lambda(p);
  if (!spatially_integrable(p)) throw DomainError("spatial integral diverges for these parameters");
  if (p.beta == 2.0 && p.gamma == 0.0 && p.dim == 1) {
    // E_{2,2}(-x) = sin(sqrt x)/sqrt x reduces the radial integral to the sine-power integral.
    return scale_factor(p) * sin_power_integral(p.alpha, 1.0);
  }
  return big_theta_quadrature(p);
}

double big_theta(const ModelParams& p) {
  validate_allow_zero_lambda(p);
  if (!dalang_satisfied(p)) throw DalangViolated("Dalang's condition fails for these parameters");
  return big_theta_unchecked(p);
}

double t_hat(const ModelParams& p, double t) {
  const double th = theta(p);
  return big_theta(p) * gamma(th + 1.0) * std::pow(t, th + 1.0);
}

double t_p(const ModelParams& p, double t, double pp) {
  if (!dalang_satisfied(p)) throw DalangViolated("Dalang's condition fails for these parameters");
  return std::pow(pp, 1.0 + 1.0 / (1.0 + theta(p))) * t;
}

double l2_norm_kernel(const ModelParams& p, double s) {
  if (!(s > 0.0)) throw DomainError("l2_norm_kernel: requires s > 0");
  return big_theta(p) * std::pow(s, theta(p));
}

double l2_norm_kernel_quadrature(const ModelParams& p, double s) {
  if (!dalang_satisfied(p)) throw DalangViolated("Dalang's condition fails for these parameters");
  if (!(s > 0.0)) throw DomainError("l2_norm_kernel_quadrature: requires s > 0");
  const int d = p.dim;
  const double b = p.beta + p.gamma;
  // r0 puts the Mittag-Leffler argument at 1; integrate r/r0 on a fixed grid.
  const double c0 = 0.5 * p.nu * std::pow(s, p.beta);
  const double r0 = std::pow(c0, -1.0 / p.alpha);
  auto f = [&](double r) {
    const double k = kernel_ft(p, s, r0 * r);
    return k * k * std::pow(r, d - 1.0);
  };
  const double Xmax = 1e8;
  const double Rmax = std::pow(Xmax, 1.0 / p.alpha);
  std::vector<double> nodes{0.0};
  for (double r = 0.01; r < Rmax; r *= 1.25) nodes.push_back(r);
  if (p.beta > 1.0) {
    const double sig = std::sin(kPi / p.beta);
    const double w = 1.0 / p.beta;
    // past w_end the pole terms are below exp(-45)
    const double w_end = p.beta < 2.0 ? 45.0 / -std::cos(kPi / p.beta) : HUGE_VAL;
    for (double k = 1.0; k * kPi / sig < w_end; k += 1.0) {
      const double r = std::pow(k * kPi / sig, 1.0 / (p.alpha * w));
      if (r >= Rmax) break;
      nodes.push_back(r);
    }
  }
  nodes.push_back(Rmax);
  std::sort(nodes.begin(), nodes.end());
  double I = numerics::integrate_panels(f, nodes, 1e-11).value;
  // Leading non-oscillatory tail only.
  const double pref = std::pow(s, 2.0 * (b - 1.0));
  if (p.beta == 2.0) {
    const double e = p.alpha * (b - 1.0) - d;
    I += pref * 0.5 * std::pow(Rmax, -e) / e;
  }
  const double c1 = rgamma(p.gamma);
  if (c1 != 0.0) I += pref * c1 * c1 * std::pow(Rmax, d - 2.0 * p.alpha) / (2.0 * p.alpha - d);
  return std::pow(2.0 * kPi, -d) * sphere_area(d) * std::pow(r0, d) * I;
}

double j0(const ModelParams& p, double t) { return p.beta <= 1.0 ? p.u0 : p.u0 + p.u1 * t; }

Nonnegativity kernel_nonneg_known(const ModelParams& p) {
  const double a = p.alpha, b = p.beta, g = p.gamma;
  const int d = p.dim;
  if (a > 0.0 && a <= 2.0 && b > 0.0 && b <= 1.0 && g >= 0.0 && d >= 1)
    return Nonnegativity::Nonnegative;
  if (1.0 < b && b < a && a <= 2.0 && g > 0.0 && d >= 1 && d <= 3)
    return Nonnegativity::Nonnegative;
  if (1.0 < b && b == a && a < 2.0 && g > 0.5 * (d + 3) - b && d >= 1 && d <= 3)
    return Nonnegativity::Nonnegative;
  if (a == 2.0 && b == 2.0 && g == 0.0) return Nonnegativity::Nonnegative;
  return Nonnegativity::Unknown;
}

DerivedConstants derived_constants(const ModelParams& p) {
  DerivedConstants c;
  c.theta = theta(p);
  c.big_theta = big_theta(p);
  c.lyapunov_base = p.lambda * p.lambda * c.big_theta * gamma(c.theta + 1.0);
  return c;
}

std::map<std::string, double> to_map(const ModelParams& p) {
  return {{"alpha", p.alpha}, {"beta", p.beta}, {"gamma", p.gamma}, {"lambda", p.lambda},
          {"nu", p.nu},       {"dim", p.dim},   {"u0", p.u0},       {"u1", p.u1}};
}

std::string to_kv(const ModelParams& p) {
  std::ostringstream os;
  os.precision(17);
  for (const char* k : {"alpha", "beta", "gamma", "lambda", "nu", "dim", "u0", "u1"})
    os << k << " = " << to_map(p).at(k) << '\n';
  return os.str();
}

ModelParams from_kv(const std::string& text, ModelParams base) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    for (char& ch : line)
      if (ch == '=' || ch == ':' || ch == '\t') ch = ' ';
    std::istringstream ls(line);
    std::string key, value, extra;
    if (!(ls >> key)) continue;
    if (!(ls >> value) || (ls >> extra))
      throw DomainError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != value.size())
      throw DomainError("config line " + std::to_string(lineno) + ": bad number '" + value + "'");
    if (key == "alpha") base.alpha = v;
    else if (key == "beta") base.beta = v;
    else if (key == "gamma") base.gamma = v;
    else if (key == "lambda") base.lambda = v;
    else if (key == "nu") base.nu = v;
    else if (key == "u0") base.u0 = v;
    else if (key == "u1") base.u1 = v;
    else if (key == "dim") {
      if (v != std::floor(v)) throw DomainError("config: dim must be an integer");
      base.dim = static_cast<int>(v);
    } else {
      throw DomainError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  return base;
}

}  // namespace spde
