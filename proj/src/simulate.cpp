#include "spde/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

#include "json.hpp"

#include "spde/errors.hpp"
#include "spde/numerics.hpp"
#include "spde/rng.hpp"

namespace spde {
namespace {

constexpr std::uint32_t kTagShe = 1;
constexpr std::uint32_t kTagSwe = 2;
// Absolute cell j maps to counter word j + kCellOffset; lanes of one Philox
// block are four neighbouring cells, so noise never depends on the domain.
constexpr std::int64_t kCellOffset = std::int64_t{1} << 30;
constexpr std::int64_t kMaxCells = std::int64_t{1} << 28;

void check_config(const SimConfig& cfg) {
  auto pos = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!pos(cfg.dx) || !pos(cfg.dt) || !pos(cfg.domain_half_width) || !pos(cfg.t_end))
    throw DomainError("dx, dt, domain_half_width and t_end must be positive and finite");
  if (cfg.n_paths == 0) throw DomainError("n_paths must be positive");
  if (!std::isfinite(cfg.offset_probe)) throw DomainError("offset_probe must be finite");
  if (cfg.t_end / cfg.dt > 4.0e9) throw TooLarge("more than 4e9 time steps");
  if (cfg.domain_half_width / cfg.dx > static_cast<double>(kMaxCells)) throw TooLarge("domain too wide");
  if (cfg.n_paths >= (std::uint64_t{1} << 56)) throw TooLarge("n_paths must be below 2^56");
}

std::int64_t half_cells(const SimConfig& cfg) {
  return static_cast<std::int64_t>(std::floor(cfg.domain_half_width / cfg.dx + 1e-9));
}

std::int64_t step_of(double t, double dt) {
  const double k = std::round(t / dt);
  if (std::fabs(k * dt - t) > 1e-6 * dt) throw DomainError("time is not on the dt grid");
  return static_cast<std::int64_t>(k);
}

std::vector<std::int64_t> probe_steps(std::span<const double> probes, const SimConfig& cfg,
                                      std::int64_t n_end) {
  if (probes.empty()) throw DomainError("no probe times");
  std::vector<std::int64_t> out;
  for (double t : probes) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("probe times must be positive");
    const std::int64_t k = step_of(t, cfg.dt);
    if (k > n_end) throw DomainError("probe time beyond t_end");
    out.push_back(k);
  }
  return out;
}

struct Stat {
  double mean = 0.0;
  double stderr_value = 0.0;
  double variance = 0.0;
};

Stat stat_of(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  Stat s;
  s.mean = numerics::pairwise_sum(x) / n;
  if (x.size() < 2) return s;
  std::vector<double> dev(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) dev[i] = (x[i] - s.mean) * (x[i] - s.mean);
  s.variance = numerics::pairwise_sum(dev) / (n - 1.0);
  s.stderr_value = std::sqrt(s.variance / n);
  return s;
}

// Philox words for cells lo..hi (absolute, inclusive) at one (step, path).
class NoiseRow {
 public:
  NoiseRow(std::uint64_t seed, std::uint32_t tag) : seed_(seed), key_(Philox4x32::key_from_seed(seed)), tag_(tag) {}

  // out[j - lo] = standard normal for cell j.
  void fill(std::int64_t lo, std::int64_t hi, std::uint32_t step, std::uint64_t path, double* out) const {
    const auto path_lo = static_cast<std::uint32_t>(path);
    const std::uint32_t c3 = (tag_ << 24) | static_cast<std::uint32_t>(path >> 32);
    const std::int64_t alo = lo + kCellOffset;
    const std::int64_t ahi = hi + kCellOffset;
    for (std::int64_t b = alo >> 2; b <= (ahi >> 2); ++b) {
      const auto w = Philox4x32::block({static_cast<std::uint32_t>(b), step, path_lo, c3}, key_);
      for (int lane = 0; lane < 4; ++lane) {
        const std::int64_t a = 4 * b + lane;
        if (a < alo || a > ahi) continue;
        out[a - alo] = ziggurat_normal(w[lane], [&] {
          const std::uint64_t cell_key = mix64(seed_ ^ (static_cast<std::uint64_t>(a) << 8 | tag_));
          return PhiloxStream(cell_key, step, path_lo, c3 | 0x80000000u);
        });
      }
    }
  }

 private:
  std::uint64_t seed_;
  Philox4x32::Key key_;
  std::uint32_t tag_;
};

unsigned thread_count(const SimConfig& cfg) {
  unsigned t = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::uint64_t>(t, cfg.n_paths));
}

// Runs body(path) for every path; the split across threads never affects output.
template <class Body>
void for_each_path(const SimConfig& cfg, Body&& body) {
  const unsigned nt = thread_count(cfg);
  if (nt <= 1) {
    for (std::uint64_t q = 0; q < cfg.n_paths; ++q) body(q);
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < nt; ++w)
    pool.emplace_back([&, w] {
      for (std::uint64_t q = w; q < cfg.n_paths; q += nt) body(q);
    });
  for (auto& th : pool) th.join();
}

void require_she_slice(const ModelParams& p) {
  validate_allow_zero_lambda(p);
  if (p.alpha != 2.0 || p.beta != 1.0 || p.gamma != 0.0 || p.dim != 1)
    throw DomainError("simulate_she needs alpha = 2, beta = 1, gamma = 0, dim = 1");
}

void require_swe_slice(const ModelParams& p) {
  validate_allow_zero_lambda(p);
  if (p.alpha != 2.0 || p.beta != 2.0 || p.gamma != 0.0 || p.dim != 1)
    throw DomainError("simulate_swe needs alpha = beta = 2, gamma = 0, dim = 1");
}

void check_she_stability(const ModelParams& p, const SimConfig& cfg) {
  if (cfg.dt > cfg.dx * cfg.dx / (2.0 * p.nu) * (1.0 + 1e-12))
    throw StabilityViolated("explicit SHE scheme needs dt <= dx^2 / (2 nu)");
}

std::int64_t offset_cell(const SimConfig& cfg) { return std::llround(cfg.offset_probe / cfg.dx); }

// One SHE path on nested domains sharing the noise of the widest one.
// u[d] holds cells -J_d..J_d; boundary cells stay at u0.
struct SheDomain {
  std::int64_t J;
  std::vector<double> u, next;
};

struct SheSetup {
  double r = 0.0;  // nu dt / (2 dx^2)
  double c = 0.0;  // lambda sqrt(dt / dx)
  double u0 = 1.0;
  std::int64_t n_end = 0;
  std::int64_t j1 = 0;
  std::vector<std::int64_t> steps;
  std::vector<std::int64_t> domains;
};

// out[d][k][0] = u(t_k, 0), out[d][k][1] = u(t_k, x1) on domain d.
void she_path(const SheSetup& s, const NoiseRow& noise, std::uint64_t path,
              std::vector<std::vector<std::array<double, 2>>>& out) {
  std::vector<SheDomain> dom;
  for (std::int64_t J : s.domains)
    dom.push_back({J, std::vector<double>(2 * J + 1, s.u0), std::vector<double>(2 * J + 1, s.u0)});
  const std::int64_t Jmax = *std::max_element(s.domains.begin(), s.domains.end());
  std::vector<double> xi(2 * Jmax + 1, 0.0);
  auto record = [&](std::int64_t n) {
    for (std::size_t k = 0; k < s.steps.size(); ++k) {
      if (s.steps[k] != n) continue;
      for (std::size_t d = 0; d < dom.size(); ++d)
        out[d][k] = {dom[d].u[dom[d].J], dom[d].u[dom[d].J + s.j1]};
    }
  };
  for (std::int64_t n = 0; n < s.n_end; ++n) {
    if (s.c != 0.0) noise.fill(-Jmax + 1, Jmax - 1, static_cast<std::uint32_t>(n), path, xi.data() + 1);
    for (auto& D : dom) {
      const double* u = D.u.data();
      double* v = D.next.data();
      const double* z = xi.data() + (Jmax - D.J);
      for (std::int64_t i = 1; i < 2 * D.J; ++i)
        v[i] = u[i] + s.r * (u[i + 1] - 2.0 * u[i] + u[i - 1]) + s.c * u[i] * z[i];
      std::swap(D.u, D.next);
    }
    record(n + 1);
  }
}

SimSummary summarize(const ModelParams& p, std::span<const double> probes, std::size_t n_paths,
                     const std::vector<double>& center, const std::vector<double>& offset, double offset_x) {
  SimSummary s;
  s.second.t_grid.assign(probes.begin(), probes.end());
  s.second.method = Method::MonteCarlo;
  s.second.params = p;
  s.offset_x = offset_x;
  std::vector<double> sq(n_paths);
  for (std::size_t k = 0; k < probes.size(); ++k) {
    std::span<const double> c(center.data() + k * n_paths, n_paths);
    std::span<const double> o(offset.data() + k * n_paths, n_paths);
    const Stat m = stat_of(c);
    s.mean.push_back(m.mean);
    s.mean_stderr.push_back(m.stderr_value);
    s.variance.push_back(m.variance);
    for (std::size_t q = 0; q < n_paths; ++q) sq[q] = c[q] * c[q];
    const Stat m2 = stat_of(sq);
    s.second.values.push_back(m2.mean);
    s.second.stderr_values.push_back(m2.stderr_value);
    for (std::size_t q = 0; q < n_paths; ++q) sq[q] = o[q] * o[q];
    const Stat m2o = stat_of(sq);
    s.second_offset.push_back(m2o.mean);
    s.second_offset_stderr.push_back(m2o.stderr_value);
  }
  return s;
}

// SWE lattice: S(n+1,j) = S(n,j-1) + S(n,j+1) - S(n-1,j) + w(n-1,j) + w(n,j),
// the sum of w over the discrete backward cone, u = J0 + lambda/(2 kappa) S.
struct SweSetup {
  double g = 0.0;      // lambda / (2 kappa)
  double sigma = 0.0;  // sqrt(dt dx)
  double dt = 0.0;
  double u0 = 0.0, u1 = 0.0;
  std::int64_t J = 0;
  std::int64_t n_end = 0;
  std::int64_t j1 = 0;
  std::vector<std::int64_t> steps;
};

void swe_run(const SweSetup& s, const NoiseRow& noise, std::uint64_t path,
             std::vector<std::array<double, 2>>& out) {
  const std::int64_t width = 2 * s.J + 1;
  // Index i <-> cell i - 1 - J; one zero guard cell on each side.
  std::vector<double> S_prev(width + 2, 0.0), S_cur(width + 2, 0.0), S_next(width + 2, 0.0);
  std::vector<double> w_prev(width + 2, 0.0), w_cur(width + 2, 0.0), xi(width, 0.0);
  const std::int64_t c0 = s.J + 1;
  for (std::int64_t n = 0; n <= s.n_end; ++n) {
    const double j0 = s.u0 + s.u1 * (static_cast<double>(n) * s.dt);
    for (std::size_t k = 0; k < s.steps.size(); ++k)
      if (s.steps[k] == n) out[k] = {j0 + s.g * S_cur[c0], j0 + s.g * S_cur[c0 + s.j1]};
    if (n == s.n_end) break;
    if (s.g != 0.0) noise.fill(-s.J, s.J, static_cast<std::uint32_t>(n), path, xi.data());
    for (std::int64_t i = 1; i <= width; ++i) w_cur[i] = (j0 + s.g * S_cur[i]) * s.sigma * xi[i - 1];
    for (std::int64_t i = 1; i <= width; ++i)
      S_next[i] = S_cur[i - 1] + S_cur[i + 1] - S_prev[i] + w_prev[i] + w_cur[i];
    std::swap(S_prev, S_cur);
    std::swap(S_cur, S_next);
    std::swap(w_prev, w_cur);
  }
}

SweSetup swe_setup(const ModelParams& p, const SimConfig& cfg, std::span<const double> probes) {
  require_swe_slice(p);
  check_config(cfg);
  const double kappa = std::sqrt(p.nu / 2.0);
  if (std::fabs(cfg.dx - kappa * cfg.dt) > 1e-9 * cfg.dx)
    throw DomainError("SWE lattice needs dx = sqrt(nu / 2) dt");
  SweSetup s;
  s.g = p.lambda / (2.0 * kappa);
  s.sigma = std::sqrt(cfg.dt * cfg.dx);
  s.dt = cfg.dt;
  s.u0 = p.u0;
  s.u1 = p.u1;
  s.J = half_cells(cfg);
  s.n_end = step_of(cfg.t_end, cfg.dt);
  s.j1 = offset_cell(cfg);
  s.steps = probe_steps(probes, cfg, s.n_end);
  const double reach = std::fabs(static_cast<double>(s.j1) * cfg.dx) + kappa * cfg.t_end + 5.0 * cfg.dx;
  if (cfg.domain_half_width < reach * (1.0 - 1e-12))
    throw InsufficientDomain("SWE domain must cover the probe light cone plus 5 dx");
  return s;
}

}  // namespace

SimSummary simulate_she_summary(const ModelParams& p, const SimConfig& cfg, std::span<const double> probes) {
  require_she_slice(p);
  check_config(cfg);
  check_she_stability(p, cfg);
  SheSetup s;
  s.r = p.nu * cfg.dt / (2.0 * cfg.dx * cfg.dx);
  s.c = p.lambda * std::sqrt(cfg.dt / cfg.dx);
  s.u0 = p.u0;
  s.n_end = step_of(cfg.t_end, cfg.dt);
  s.steps = probe_steps(probes, cfg, s.n_end);
  s.j1 = offset_cell(cfg);
  const std::int64_t J = half_cells(cfg);
  if (J < 2 || std::llabs(s.j1) >= J) throw InsufficientDomain("SHE domain must strictly contain both probes");
  s.domains = {J};
  if (cfg.check_domain) s.domains.push_back((3 * J + 1) / 2);

  const std::size_t np = cfg.n_paths;
  const std::size_t nk = probes.size();
  const std::size_t nd = s.domains.size();
  // [domain][probe * np + path]
  std::vector<std::vector<double>> center(nd, std::vector<double>(nk * np));
  std::vector<std::vector<double>> offset(nd, std::vector<double>(nk * np));
  const NoiseRow noise(cfg.seed, kTagShe);
  for_each_path(cfg, [&](std::uint64_t q) {
    std::vector<std::vector<std::array<double, 2>>> out(nd, std::vector<std::array<double, 2>>(nk));
    she_path(s, noise, q, out);
    for (std::size_t d = 0; d < nd; ++d)
      for (std::size_t k = 0; k < nk; ++k) {
        center[d][k * np + q] = out[d][k][0];
        offset[d][k * np + q] = out[d][k][1];
      }
  });

  SimSummary sum = summarize(p, probes, np, center[0], offset[0], static_cast<double>(s.j1) * cfg.dx);
  if (nd > 1) {
    const SimSummary wide = summarize(p, probes, np, center[1], offset[1], sum.offset_x);
    for (std::size_t k = 0; k < nk; ++k) {
      const double shift = wide.second.values[k] - sum.second.values[k];
      sum.boundary_shift.push_back(shift);
      if (std::fabs(shift) > sum.second.stderr_values[k])
        throw InsufficientDomain("widening the SHE domain by 1.5x moved E[u^2] by more than 1 SE");
    }
  }
  return sum;
}

MomentCurve simulate_she(const ModelParams& p, const SimConfig& cfg, std::span<const double> probes) {
  return simulate_she_summary(p, cfg, probes).second;
}

SimSummary simulate_swe_summary(const ModelParams& p, const SimConfig& cfg, std::span<const double> probes) {
  const SweSetup s = swe_setup(p, cfg, probes);
  const std::size_t np = cfg.n_paths;
  const std::size_t nk = probes.size();
  std::vector<double> center(nk * np), offset(nk * np);
  const NoiseRow noise(cfg.seed, kTagSwe);
  for_each_path(cfg, [&](std::uint64_t q) {
    std::vector<std::array<double, 2>> out(nk);
    swe_run(s, noise, q, out);
    for (std::size_t k = 0; k < nk; ++k) {
      center[k * np + q] = out[k][0];
      offset[k * np + q] = out[k][1];
    }
  });
  return summarize(p, probes, np, center, offset, static_cast<double>(s.j1) * cfg.dx);
}

MomentCurve simulate_swe(const ModelParams& p, const SimConfig& cfg, std::span<const double> probes) {
  return simulate_swe_summary(p, cfg, probes).second;
}

std::vector<double> swe_path(const ModelParams& p, const SimConfig& cfg, std::span<const double> probes,
                             std::uint64_t path) {
  const SweSetup s = swe_setup(p, cfg, probes);
  std::vector<std::array<double, 2>> out(probes.size());
  swe_run(s, NoiseRow(cfg.seed, kTagSwe), path, out);
  std::vector<double> v;
  for (const auto& o : out) v.push_back(o[0]);
  return v;
}

double she_lattice_second_moment(const ModelParams& p, const SimConfig& cfg, double t) {
  require_she_slice(p);
  check_config(cfg);
  check_she_stability(p, cfg);
  const std::int64_t J = half_cells(cfg);
  if (J < 2) throw InsufficientDomain("SHE domain must contain an interior cell");
  const std::int64_t n_steps = step_of(t, cfg.dt);
  const auto n = static_cast<std::size_t>(2 * J + 1);
  if (n > 4001) throw TooLarge("lattice covariance limited to 4001 cells");
  const double r = p.nu * cfg.dt / (2.0 * cfg.dx * cfg.dx);
  const double q = p.lambda * p.lambda * cfg.dt / cfg.dx;
  // M = E[u u^T]; u_{n+1} = A u_n + noise with E[noise noise^T] = q diag(u_j^2) inside.
  std::vector<double> M(n * n, p.u0 * p.u0), B(n * n);
  auto at = [n](std::vector<double>& X, std::size_t i, std::size_t j) -> double& { return X[i * n + j]; };
  std::vector<double> diag(n);
  for (std::int64_t step = 0; step < n_steps; ++step) {
    for (std::size_t i = 0; i < n; ++i) diag[i] = at(M, i, i);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        at(B, i, j) = (i == 0 || i == n - 1)
                          ? at(M, i, j)
                          : r * at(M, i - 1, j) + (1.0 - 2.0 * r) * at(M, i, j) + r * at(M, i + 1, j);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        at(M, i, j) = (j == 0 || j == n - 1)
                          ? at(B, i, j)
                          : r * at(B, i, j - 1) + (1.0 - 2.0 * r) * at(B, i, j) + r * at(B, i, j + 1);
    for (std::size_t i = 1; i + 1 < n; ++i) at(M, i, i) += q * diag[i];
  }
  return at(M, static_cast<std::size_t>(J), static_cast<std::size_t>(J));
}

double swe_lattice_second_moment(const ModelParams& p, const SimConfig& cfg, double t) {
  require_swe_slice(p);
  const double kappa = std::sqrt(p.nu / 2.0);
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw DomainError("dt must be positive");
  const double dx = kappa * cfg.dt;
  const std::int64_t N = step_of(t, cfg.dt);
  if (N > 200000) throw TooLarge("SWE lattice recursion limited to 2e5 steps");
  const double g2 = p.lambda * p.lambda / (4.0 * kappa * kappa) * cfg.dt * dx;
  std::vector<double> m(static_cast<std::size_t>(N) + 1);
  for (std::int64_t k = 0; k <= N; ++k) {
    const double j0 = p.u0 + p.u1 * static_cast<double>(k) * cfg.dt;
    std::vector<double> terms;
    for (std::int64_t i = 0; i < k; ++i) terms.push_back(static_cast<double>(2 * (k - 1 - i) + 1) * m[i]);
    m[k] = j0 * j0 + g2 * numerics::pairwise_sum(terms);
  }
  return m[N];
}

std::string sidecar_json(const SimSummary& s, const SimConfig& cfg) {
  nlohmann::ordered_json j;
  j["n_paths"] = cfg.n_paths;
  j["seed"] = cfg.seed;
  j["dx"] = cfg.dx;
  j["dt"] = cfg.dt;
  j["domain_half_width"] = cfg.domain_half_width;
  j["method"] = to_string(s.second.method);
  j["probes"] = s.second.t_grid;
  j["stderr"] = s.second.stderr_values;
  return j.dump(2) + "\n";
}

double wave_overlap(int dim, double eps, double t, double s, std::span<const double> a,
                    std::span<const double> b, std::span<const double> x) {
  if (dim != 1 && dim != 2) throw GeometryViolation("wave_overlap supports dim 1 and 2");
  if (!(eps > 0.0) || !std::isfinite(eps)) throw GeometryViolation("eps must be positive");
  const auto d = static_cast<std::size_t>(dim);
  if (a.size() != d || b.size() != d || x.size() != d) throw GeometryViolation("points must have dim coordinates");
  auto in_range = [&](double v) { return v >= 2.0 * eps * (1.0 - 1e-12) && v <= 12.0 * eps * (1.0 + 1e-12); };
  if (!in_range(t) || !in_range(s)) throw GeometryViolation("t and s must lie in [2 eps, 12 eps]");
  auto dist2 = [](std::span<const double> u, std::span<const double> v) {
    double r = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) r += (u[i] - v[i]) * (u[i] - v[i]);
    return r;
  };
  const double lim = eps * eps * (1.0 + 1e-12);
  if (dist2(a, x) > lim || dist2(b, x) > lim) throw GeometryViolation("a and b must lie in B_eps(x)");

  if (dim == 1) {
    // Length of B_eps(x) intersected with both cones, times (1/2)(1/2).
    const double lo = std::max({x[0] - eps, a[0] - t, b[0] - s});
    const double hi = std::min({x[0] + eps, a[0] + t, b[0] + s});
    return 0.25 * std::max(0.0, hi - lo);
  }
  const double inv = 1.0 / (4.0 * std::numbers::pi * std::numbers::pi);
  auto radial = [&](double rho) {
    auto angular = [&](double phi) {
      const double y0 = x[0] + rho * std::cos(phi);
      const double y1 = x[1] + rho * std::sin(phi);
      const double ra = (y0 - a[0]) * (y0 - a[0]) + (y1 - a[1]) * (y1 - a[1]);
      const double rb = (y0 - b[0]) * (y0 - b[0]) + (y1 - b[1]) * (y1 - b[1]);
      const double prod = std::max(0.0, t * t - ra) * std::max(0.0, s * s - rb);
      return prod > 0.0 ? inv / std::sqrt(prod) : 0.0;
    };
    return rho * numerics::integrate(angular, 0.0, 2.0 * std::numbers::pi, 1e-10).value;
  };
  return numerics::integrate(radial, 0.0, eps, 1e-9).value;
}

double wave_overlap_lower_bound(int dim, double eps, double t, double s) {
  constexpr double c = 12.0;
  if (dim == 1) return t * s / (eps * 2.0 * c * c);
  if (dim == 2) return t * s / (eps * eps * 4.0 * std::numbers::pi * c * c * c * c);
  throw GeometryViolation("wave_overlap supports dim 1 and 2");
}

}  // namespace spde
