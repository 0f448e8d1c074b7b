#include "spde/numerics.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <queue>
#include <algorithm>

namespace spde::numerics {

namespace {

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

Segment rule(const std::function<double(double)>& f, double a, double b) {
  double err = 0.0;
  const double v =
      boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, a, b, 0, 0.0, &err);
  // boost reports the Gauss-Kronrod difference on [-1, 1], unscaled
  return {a, b, v, err * 0.5 * std::abs(b - a)};
}

constexpr std::size_t kMaxSegments = 200000;

}  // namespace

// Global bisection of the worst segment until the summed error estimate is
// below max(abs_tol, rel_tol * |total|).
Integral integrate_panels(const std::function<double(double)>& f, std::span<const double> nodes,
                          double rel_tol, double abs_tol) {
  Integral out;
  std::priority_queue<Segment> heap;
  long double total = 0.0L, err = 0.0L;
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (nodes[i] == nodes[i - 1]) continue;
    const Segment s = rule(f, nodes[i - 1], nodes[i]);
    total += s.value;
    err += s.error;
    heap.push(s);
  }
  const std::size_t cap = std::max(kMaxSegments, 4 * heap.size());
  while (!heap.empty() && heap.size() < cap) {
    const double target = std::max(abs_tol, rel_tol * std::abs(static_cast<double>(total)));
    if (static_cast<double>(err) <= target) break;
    const Segment worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;  // interval exhausted in double
    heap.pop();
    const Segment l = rule(f, worst.a, mid);
    const Segment r = rule(f, mid, worst.b);
    total += l.value + r.value - worst.value;
    err += l.error + r.error - worst.error;
    heap.push(l);
    heap.push(r);
  }
  // Re-sum from the leaves so the result does not carry update round-off.
  std::vector<double> v, e;
  v.reserve(heap.size());
  e.reserve(heap.size());
  std::vector<Segment> leaves;
  leaves.reserve(heap.size());
  while (!heap.empty()) {
    leaves.push_back(heap.top());
    heap.pop();
  }
  std::sort(leaves.begin(), leaves.end(), [](const Segment& x, const Segment& y) { return x.a < y.a; });
  for (const Segment& s : leaves) {
    v.push_back(s.value);
    e.push_back(s.error);
  }
  out.value = pairwise_sum(v);
  out.error = pairwise_sum(e);
  return out;
}

Integral integrate(const std::function<double(double)>& f, double a, double b, double rel_tol,
                   double abs_tol) {
  if (a == b) return {};
  const double nodes[2] = {a, b};
  return integrate_panels(f, nodes, rel_tol, abs_tol);
}

Integral wynn_epsilon(std::span<const double> s) {
  Integral out;
  const std::size_t n = s.size();
  if (n == 0) return out;
  out.value = s.back();
  out.error = n >= 2 ? std::abs(s[n - 1] - s[n - 2]) : std::abs(s[0]);
  if (n < 3) return out;
  // Columns of the epsilon table; even columns carry limit estimates.
  std::vector<double> col_prev(n + 1, 0.0);
  std::vector<double> col(s.begin(), s.end());
  double last_even = s.back();
  for (std::size_t k = 1; col.size() > 1; ++k) {
    std::vector<double> next(col.size() - 1);
    for (std::size_t i = 0; i + 1 < col.size(); ++i) {
      const double d = col[i + 1] - col[i];
      if (d == 0.0 || !std::isfinite(d)) return out;
      next[i] = col_prev[i + 1] + 1.0 / d;
    }
    col_prev = std::move(col);
    col = std::move(next);
    if (k % 2 == 0) {
      const double e = std::abs(col.back() - last_even);
      last_even = col.back();
      if (e < out.error) {
        out.value = col.back();
        out.error = e;
      }
    }
  }
  return out;
}

double pairwise_sum(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(v.subspan(0, h)) + pairwise_sum(v.subspan(h));
}

}  // namespace spde::numerics
