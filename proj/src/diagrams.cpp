#include "spde/diagrams.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "spde/errors.hpp"
#include "spde/numerics.hpp"
#include "spde/rng.hpp"
#include "spde/specialfn.hpp"

namespace spde {
namespace {

void check_partition(const Partition& n) {
  if (n.n.empty()) throw DomainError("partition must be non-empty");
  for (int x : n.n)
    if (x < 1) throw DomainError("partition entries must be >= 1");
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a)
    throw TooLarge("count overflows 64 bits");
  return a * b;
}

std::uint64_t factorial_u64(int n) {
  std::uint64_t f = 1;
  for (int i = 2; i <= n; ++i) f = checked_mul(f, static_cast<std::uint64_t>(i));
  return f;
}

// Flat vertex index: offset[k-1] + (l-1).
std::vector<int> column_offsets(const Partition& n) {
  std::vector<int> off(n.n.size() + 1, 0);
  for (std::size_t i = 0; i < n.n.size(); ++i) off[i + 1] = off[i] + n.n[i];
  return off;
}

// Levels available on each side, for the per-level bijections.
struct LevelSides {
  std::vector<std::vector<int>> left, right;  // columns (1-based) holding level l+1
};

LevelSides level_sides(const Partition& n, int p) {
  LevelSides s;
  const int top = *std::max_element(n.n.begin(), n.n.end());
  s.left.resize(top);
  s.right.resize(top);
  for (int k = 1; k <= p; ++k)
    for (int l = 1; l <= n.n[k - 1]; ++l) (k <= p / 2 ? s.left : s.right)[l - 1].push_back(k);
  return s;
}

}  // namespace

int Partition::total() const { return std::accumulate(n.begin(), n.end(), 0); }

FeynmanDiagram make_diagram(Partition n, std::vector<Edge> edges) {
  for (Edge& e : edges) {
    if (e.from.k > e.to.k) std::swap(e.from, e.to);
    if (e.from.k == e.to.k) throw DomainError("edge joins a column to itself");
  }
  std::sort(edges.begin(), edges.end());
  return {std::move(n), std::move(edges)};
}

bool is_admissible(const FeynmanDiagram& d) {
  const Partition& n = d.partition;
  if (n.n.empty()) return false;
  const std::vector<int> off = column_offsets(n);
  std::vector<int> seen(off.back(), 0);
  auto mark = [&](const Vertex& v) {
    if (v.k < 1 || v.k > n.columns() || v.l < 1 || v.l > n.n[v.k - 1]) return false;
    ++seen[off[v.k - 1] + v.l - 1];
    return true;
  };
  for (const Edge& e : d.edges) {
    if (!(e.from.k < e.to.k)) return false;
    if (!mark(e.from) || !mark(e.to)) return false;
  }
  return std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; });
}

std::vector<FeynmanDiagram> enumerate_admissible(const Partition& n) {
  check_partition(n);
  const int total = n.total();
  if (total % 2 != 0) throw DomainError("partition total must be even");
  if (total > kMaxDiagramVertices) throw TooLarge("partition total exceeds the enumeration cap");

  std::vector<Vertex> verts;
  for (int k = 1; k <= n.columns(); ++k)
    for (int l = 1; l <= n.n[k - 1]; ++l) verts.push_back({k, l});
  std::vector<bool> used(verts.size(), false);
  std::vector<Edge> edges;
  std::vector<FeynmanDiagram> out;

  // The lowest unmatched vertex is always matched next, so each matching is
  // produced exactly once.
  std::function<void()> rec = [&]() {
    std::size_t i = 0;
    while (i < verts.size() && used[i]) ++i;
    if (i == verts.size()) {
      out.push_back(make_diagram(n, edges));
      return;
    }
    used[i] = true;
    for (std::size_t j = i + 1; j < verts.size(); ++j) {
      if (used[j] || verts[j].k == verts[i].k) continue;
      used[j] = true;
      edges.push_back({verts[i], verts[j]});
      rec();
      edges.pop_back();
      used[j] = false;
    }
    used[i] = false;
  };
  rec();
  std::sort(out.begin(), out.end(),
            [](const FeynmanDiagram& a, const FeynmanDiagram& b) { return a.edges < b.edges; });
  return out;
}

bool is_balanced_partition(const Partition& n, int p, int m) {
  if (p < 2 || p % 2 != 0) throw DomainError("p must be a positive even integer");
  if (n.columns() != p) throw DomainError("partition length must equal p");
  if (n.total() != 2 * m) return false;
  const int mp = (2 * m) / p;
  for (int x : n.n)
    if (x != mp && x != mp + 1) return false;
  return std::accumulate(n.n.begin(), n.n.begin() + p / 2, 0) == m;
}

std::vector<Partition> balanced_partitions(int p, int m) {
  if (p < 2 || p % 2 != 0) throw DomainError("p must be a positive even integer");
  if (m < 1) throw DomainError("m must be >= 1");
  const int mp = (2 * m) / p;
  std::vector<Partition> out;
  if (mp < 1) return out;
  Partition cur;
  cur.n.assign(p, mp);
  std::function<void(int)> rec = [&](int i) {
    if (i == p) {
      if (is_balanced_partition(cur, p, m)) out.push_back(cur);
      return;
    }
    for (int v : {mp, mp + 1}) {
      cur.n[i] = v;
      rec(i + 1);
    }
  };
  rec(0);
  return out;
}

std::uint64_t count_balanced(const Partition& n, int p, int m) {
  if (!is_balanced_partition(n, p, m)) throw NotBalanced("partition is not balanced");
  const LevelSides s = level_sides(n, p);
  std::uint64_t c = 1;
  for (std::size_t l = 0; l < s.left.size(); ++l) {
    if (s.left[l].size() != s.right[l].size()) return 0;
    c = checked_mul(c, factorial_u64(static_cast<int>(s.left[l].size())));
  }
  return c;
}

std::vector<FeynmanDiagram> enumerate_balanced(const Partition& n, int p, int m) {
  const std::uint64_t count = count_balanced(n, p, m);
  if (count > 10'000'000) throw TooLarge("too many balanced diagrams to list");
  std::vector<FeynmanDiagram> out;
  if (count == 0) return out;
  const LevelSides s = level_sides(n, p);
  std::vector<std::vector<int>> perm = s.right;  // current bijection per level
  for (auto& v : perm) std::sort(v.begin(), v.end());
  // Odometer over the per-level permutations.
  for (;;) {
    std::vector<Edge> edges;
    for (std::size_t l = 0; l < s.left.size(); ++l)
      for (std::size_t i = 0; i < s.left[l].size(); ++i) {
        const int lev = static_cast<int>(l) + 1;
        edges.push_back({{s.left[l][i], lev}, {perm[l][i], lev}});
      }
    out.push_back(make_diagram(n, std::move(edges)));
    std::size_t l = 0;
    while (l < perm.size() && !std::next_permutation(perm[l].begin(), perm[l].end())) ++l;
    if (l == perm.size()) break;
  }
  return out;
}

std::uint64_t count_lower_bound(int p, int m) {
  if (p < 2 || p % 2 != 0) throw DomainError("p must be a positive even integer");
  if (m < p / 2) throw DomainError("count_lower_bound requires m >= p/2");
  const int mp = (2 * m) / p;
  const int rp = (2 * m) % p;
  std::uint64_t c = 1;
  const std::uint64_t f = factorial_u64(p / 2);
  for (int i = 0; i < mp; ++i) c = checked_mul(c, f);
  return checked_mul(c, factorial_u64(rp / 2));
}

bool crossing_vanishes(const FeynmanDiagram& d) {
  // Link each vertex to its partner, then compare pairs rooted in one column.
  const auto& E = d.edges;
  auto partner = [&](const Vertex& v, Vertex& w) {
    for (const Edge& e : E) {
      if (e.from == v) { w = e.to; return true; }
      if (e.to == v) { w = e.from; return true; }
    }
    return false;
  };
  for (int k = 1; k <= d.partition.columns(); ++k) {
    const int nk = d.partition.n[k - 1];
    for (int l = 1; l <= nk; ++l)
      for (int l2 = l + 1; l2 <= nk; ++l2) {
        Vertex a, b;
        if (!partner({k, l}, a) || !partner({k, l2}, b)) continue;
        if (a.k == b.k && a.l > b.l) return true;
      }
  }
  return false;
}

bool simplex_consistent(const FeynmanDiagram& d) {
  // Nodes are edges (one time variable each); arcs follow column order.
  const Partition& n = d.partition;
  const std::vector<int> off = column_offsets(n);
  std::vector<int> var(off.back(), -1);
  for (std::size_t i = 0; i < d.edges.size(); ++i) {
    var[off[d.edges[i].from.k - 1] + d.edges[i].from.l - 1] = static_cast<int>(i);
    var[off[d.edges[i].to.k - 1] + d.edges[i].to.l - 1] = static_cast<int>(i);
  }
  const std::size_t V = d.edges.size();
  std::vector<std::vector<int>> adj(V);
  std::vector<int> indeg(V, 0);
  for (int k = 0; k < n.columns(); ++k)
    for (int l = 0; l + 1 < n.n[k]; ++l) {
      const int a = var[off[k] + l], b = var[off[k] + l + 1];
      if (a < 0 || b < 0) continue;
      if (a == b) return false;
      adj[a].push_back(b);
      ++indeg[b];
    }
  std::vector<int> queue;
  for (std::size_t v = 0; v < V; ++v)
    if (indeg[v] == 0) queue.push_back(static_cast<int>(v));
  std::size_t done = 0;
  while (done < queue.size()) {
    const int v = queue[done++];
    for (int w : adj[v])
      if (--indeg[w] == 0) queue.push_back(w);
  }
  return done == V;
}

std::uint64_t surrogate_weight(const FeynmanDiagram& d, int grid) {
  if (!is_admissible(d)) throw DomainError("surrogate_weight: diagram is not admissible");
  if (grid < 1) throw DomainError("surrogate_weight: grid must be >= 1");
  const Partition& n = d.partition;
  const std::vector<int> off = column_offsets(n);
  std::vector<int> var(off.back());
  for (std::size_t i = 0; i < d.edges.size(); ++i) {
    var[off[d.edges[i].from.k - 1] + d.edges[i].from.l - 1] = static_cast<int>(i);
    var[off[d.edges[i].to.k - 1] + d.edges[i].to.l - 1] = static_cast<int>(i);
  }
  const std::size_t V = d.edges.size();
  std::vector<int> tv(V, 1);
  std::uint64_t count = 0;
  for (;;) {
    bool ok = true;
    for (int k = 0; k < n.columns() && ok; ++k)
      for (int l = 0; l + 1 < n.n[k]; ++l)
        if (!(tv[var[off[k] + l]] < tv[var[off[k] + l + 1]])) {
          ok = false;
          break;
        }
    if (ok) ++count;
    std::size_t i = 0;
    while (i < V && tv[i] == grid) tv[i++] = 1;
    if (i == V) break;
    ++tv[i];
  }
  return count;
}

double chaos_term(const ModelParams& p, double t, int k) {
  validate_allow_zero_lambda(p);
  if (!dalang_satisfied(p)) throw DalangViolated("Dalang's condition fails for these parameters");
  if (p.beta > 1.0 && p.u1 != 0.0) throw DomainError("chaos_term requires u1 = 0");
  if (k < 0) throw DomainError("chaos_term requires k >= 0");
  if (!(t > 0.0)) throw DomainError("chaos_term requires t > 0");
  const double u02 = p.u0 * p.u0;
  if (k == 0) return u02;
  if (p.lambda == 0.0 || u02 == 0.0) return 0.0;
  const double a = theta(p) + 1.0;
  const double B = p.lambda * p.lambda * big_theta(p) * gamma(a);
  const double kk = k;
  return u02 * std::exp(kk * std::log(B) + kk * a * std::log(t) - log_gamma(kk * a + 1.0));
}

McEstimate chaos_term_mc(const ModelParams& p, double t, int k, std::uint64_t samples,
                         std::uint64_t seed) {
  validate_allow_zero_lambda(p);
  if (!dalang_satisfied(p)) throw DalangViolated("Dalang's condition fails for these parameters");
  if (p.beta > 1.0 && p.u1 != 0.0) throw DomainError("chaos_term_mc requires u1 = 0");
  if (k < 0 || k > 4) throw DomainError("chaos_term_mc requires 0 <= k <= 4");
  if (!(t > 0.0) || samples < 2) throw DomainError("chaos_term_mc requires t > 0, samples >= 2");
  McEstimate est;
  est.samples = samples;
  const double u02 = p.u0 * p.u0;
  if (k == 0) {
    est.value = u02;
    return est;
  }
  if (p.lambda == 0.0 || u02 == 0.0) return est;

  const double th = theta(p);
  const double pref = u02 * std::pow(p.lambda * p.lambda * big_theta(p), k);
  // Gaps (s_1, s_2 - s_1, ..., t - s_k) / t ~ Dirichlet(1, c, ..., c).
  // c = theta + 1 would be exact; c below 2(theta+1) keeps the weight variance finite.
  const double c = std::min(1.0, 1.5 * (th + 1.0));
  const double log_norm = log_gamma(1.0 + k * c) - k * log_gamma(c);

  constexpr std::uint32_t kStreams = 64;
  const std::uint64_t mixed = mix64(seed ^ 0xC4A05u);
  struct Partial {
    double sum = 0.0, sumsq = 0.0;
  };
  std::vector<Partial> parts(kStreams);
  auto run_stream = [&](std::uint32_t s) {
    PhiloxStream gen(mix64(mixed + s), s, 0x6d63u, static_cast<std::uint32_t>(k));
    std::gamma_distribution<double> g1(1.0, 1.0), gc(c, 1.0);
    std::vector<double> w;
    for (std::uint64_t i = s; i < samples; i += kStreams) {
      double gaps[5];
      double tot = gaps[0] = g1(gen);
      for (int j = 1; j <= k; ++j) tot += gaps[j] = gc(gen);
      // log of target / proposal, both on the k-simplex of (s_1..s_k).
      double lw = (k * (th + 1.0)) * std::log(t) - log_norm;
      for (int j = 1; j <= k; ++j) lw += (th - (c - 1.0)) * std::log(gaps[j] / tot);
      w.push_back(std::exp(lw));
    }
    parts[s].sum = numerics::pairwise_sum(w);
    for (double& x : w) x *= x;
    parts[s].sumsq = numerics::pairwise_sum(w);
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned nthreads = std::min<unsigned>(hw, kStreams);
  std::vector<std::thread> pool;
  for (unsigned th_i = 0; th_i < nthreads; ++th_i)
    pool.emplace_back([&, th_i] {
      for (std::uint32_t s = th_i; s < kStreams; s += nthreads) run_stream(s);
    });
  for (auto& th_w : pool) th_w.join();

  double sum = 0.0, sumsq = 0.0;
  for (const Partial& q : parts) {
    sum += q.sum;
    sumsq += q.sumsq;
  }
  const double N = static_cast<double>(samples);
  const double mean = sum / N;
  const double var = std::max(0.0, (sumsq / N - mean * mean) * N / (N - 1.0));
  est.value = pref * mean;
  est.stderr_value = pref * std::sqrt(var / N);
  return est;
}

double pair_diagram_weight(const ModelParams& p, double t, const FeynmanDiagram& d) {
  validate_allow_zero_lambda(p);
  if (!dalang_satisfied(p)) throw DalangViolated("Dalang's condition fails for these parameters");
  const Partition& n = d.partition;
  if (n.columns() != 2 || n.n[0] != n.n[1])
    throw DomainError("pair_diagram_weight requires n = (k, k)");
  if (!is_admissible(d)) throw DomainError("pair_diagram_weight: diagram is not admissible");
  if (!(t > 0.0)) throw DomainError("pair_diagram_weight requires t > 0");
  if (!simplex_consistent(d)) return 0.0;
  const int k = n.n[0];
  const double a = theta(p) + 1.0;
  const double ka = k * a;
  const double Th = big_theta(p);
  // Inner simplex integral leaves Gamma(a)^k (t - s)^{ka - 1} / Gamma(ka); v = (t - s)^{ka}.
  auto f = [&](double v) {
    const double j = j0(p, std::max(0.0, t - std::pow(v, 1.0 / ka)));
    return j * j;
  };
  const double I = numerics::integrate(f, 0.0, std::pow(t, ka), 1e-13).value;
  return std::pow(p.lambda * p.lambda * Th, k) *
         std::exp(k * log_gamma(a) - log_gamma(ka + 1.0)) * I;
}

ExpTailFacts exp_tail_facts(int n, double a) {
  if (n < 10) throw DomainError("exp_tail_facts requires n >= 10");
  if (!(a > 0.0)) throw DomainError("exp_tail_facts requires a > 0");
  const double ln = std::log(static_cast<double>(n));
  auto log_term = [&](int m) { return m * ln - log_gamma(m + 1.0); };
  // Terms increase up to m = n, so the last head term is the largest.
  std::vector<double> head;
  for (int m = 0; m < n; ++m) head.push_back(log_term(m));
  const double hmax = head.back();
  double hs = 0.0;
  for (double l : head) hs += std::exp(l - hmax);
  ExpTailFacts f;
  f.half_ratio = std::exp(hmax + std::log(hs) - n);

  const double tmax = a * log_term(n);
  double ts = 0.0;
  for (int m = n;; ++m) {
    const double l = a * log_term(m) - tmax;
    ts += std::exp(l);
    if (l < -40.0) break;
  }
  f.log_tail = tmax + std::log(ts);
  f.tail_lb_ok = f.log_tail >= a * n / 4.0;
  return f;
}

StirlingCheck stirling_check(int n) {
  if (n < 1) throw DomainError("stirling_check requires n >= 1");
  const double x = n;
  StirlingCheck s;
  s.log_factorial = log_gamma(x + 1.0);
  s.log_lower = 0.5 * std::log(2.0 * std::numbers::pi * x) + x * std::log(x) - x;
  s.log_upper = std::numbers::ln2 + s.log_lower;
  s.holds = s.log_lower < s.log_factorial && s.log_factorial < s.log_upper;
  return s;
}

std::string to_text(const FeynmanDiagram& d) {
  std::ostringstream os;
  os << d.partition.columns() << ' ' << d.partition.total() / 2 << " | ";
  for (int i = 0; i < d.partition.columns(); ++i) os << (i ? "," : "") << d.partition.n[i];
  os << " | ";
  for (std::size_t i = 0; i < d.edges.size(); ++i) {
    const Edge& e = d.edges[i];
    os << (i ? "; " : "") << '(' << e.from.k << ',' << e.from.l << ")-(" << e.to.k << ','
       << e.to.l << ')';
  }
  return os.str();
}

FeynmanDiagram diagram_from_text(const std::string& line) {
  const auto bar1 = line.find('|');
  const auto bar2 = bar1 == std::string::npos ? bar1 : line.find('|', bar1 + 1);
  if (bar2 == std::string::npos) throw DomainError("diagram text: expected two '|' separators");
  std::istringstream head(line.substr(0, bar1));
  int p = 0, m = 0;
  if (!(head >> p >> m)) throw DomainError("diagram text: bad 'p m' header");
  Partition n;
  {
    std::string body = line.substr(bar1 + 1, bar2 - bar1 - 1);
    std::replace(body.begin(), body.end(), ',', ' ');
    std::istringstream is(body);
    for (int x; is >> x;) n.n.push_back(x);
  }
  if (n.columns() != p || n.total() != 2 * m)
    throw DomainError("diagram text: header disagrees with partition");
  std::vector<Edge> edges;
  std::string rest = line.substr(bar2 + 1);
  for (char& ch : rest)
    if (ch == '(' || ch == ')' || ch == ',' || ch == '-' || ch == ';') ch = ' ';
  std::istringstream es(rest);
  for (Edge e; es >> e.from.k;) {
    if (!(es >> e.from.l >> e.to.k >> e.to.l)) throw DomainError("diagram text: truncated edge");
    edges.push_back(e);
  }
  FeynmanDiagram d = make_diagram(std::move(n), std::move(edges));
  if (!is_admissible(d)) throw DomainError("diagram text: diagram is not admissible");
  return d;
}

}  // namespace spde
