#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "spde/diagrams.hpp"
#include "spde/model.hpp"

namespace spde::test {

inline double rel_err(double got, double want) {
  if (want == 0.0) return std::abs(got);
  return std::abs(got - want) / std::abs(want);
}

inline std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
  return v;
}

// Every perfect matching of the vertices of n with endpoints in distinct
// columns, built by pairing the first free vertex with each later candidate.
// Shares nothing with the library enumerator beyond the Edge type.
inline std::vector<std::vector<Edge>> brute_force_matchings(const Partition& n) {
  std::vector<Vertex> verts;
  for (int k = 0; k < n.columns(); ++k)
    for (int l = 1; l <= n.n[k]; ++l) verts.push_back({k + 1, l});
  std::vector<std::vector<Edge>> out;
  std::vector<bool> used(verts.size(), false);
  std::vector<Edge> cur;
  auto rec = [&](auto&& self) -> void {
    auto first = std::find(used.begin(), used.end(), false);
    if (first == used.end()) {
      auto sorted = cur;
      std::sort(sorted.begin(), sorted.end());
      out.push_back(sorted);
      return;
    }
    const auto i = static_cast<std::size_t>(first - used.begin());
    used[i] = true;
    for (std::size_t j = i + 1; j < verts.size(); ++j) {
      if (used[j] || verts[j].k == verts[i].k) continue;
      used[j] = true;
      cur.push_back({verts[i], verts[j]});
      self(self);
      cur.pop_back();
      used[j] = false;
    }
    used[i] = false;
  };
  rec(rec);
  std::sort(out.begin(), out.end());
  return out;
}

struct SweepCase {
  const char* name;
  ModelParams p;
};

// Volterra oracle sweep: beta in {0.8, 1, 1.3, 2}, alpha in {1.5, 2, 3},
// gamma in {0, 1 - beta}. u1 = 1 wherever beta > 1 so the velocity terms count.
inline std::vector<SweepCase> volterra_sweep() {
  auto mk = [](double a, double b, double g, double u1) {
    ModelParams p;
    p.alpha = a;
    p.beta = b;
    p.gamma = g;
    p.u1 = u1;
    return p;
  };
  return {{"she", mk(2.0, 1.0, 0.0, 0.0)},          {"tf_0.8_gamma", mk(2.0, 0.8, 0.2, 0.0)},
          {"tf_1.3", mk(2.0, 1.3, 0.0, 1.0)},       {"swe", mk(2.0, 2.0, 0.0, 1.0)},
          {"sfhe_1.5", mk(1.5, 1.0, 0.0, 0.0)},     {"sfwe_3", mk(3.0, 2.0, 0.0, 1.0)}};
}

}  // namespace spde::test
