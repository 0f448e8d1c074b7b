#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spde/model.hpp"

namespace spde {

// Column sizes n_1..n_p of a product of multiple Wiener integrals.
struct Partition {
  std::vector<int> n;

  int total() const;
  int columns() const { return static_cast<int>(n.size()); }
  bool operator==(const Partition&) const = default;
};

// Vertex (k, l): column k in 1..p, level l in 1..n_k.
struct Vertex {
  int k = 0;
  int l = 0;
  auto operator<=>(const Vertex&) const = default;
};

// Directed edge with from.k < to.k.
struct Edge {
  Vertex from;
  Vertex to;
  auto operator<=>(const Edge&) const = default;
};

struct FeynmanDiagram {
  Partition partition;
  std::vector<Edge> edges;  // canonical: sorted lexicographically

  bool operator==(const FeynmanDiagram&) const = default;
};

// Largest |n| accepted by enumerate_admissible.
inline constexpr int kMaxDiagramVertices = 12;

// Sorts edges; throws DomainError on a malformed edge.
FeynmanDiagram make_diagram(Partition n, std::vector<Edge> edges);

// Every vertex in exactly one edge, every edge with from.k < to.k.
bool is_admissible(const FeynmanDiagram& d);

// All admissible diagrams of n, canonical and duplicate free.
// Throws DomainError for odd |n| or entries < 1, TooLarge past the size cap.
std::vector<FeynmanDiagram> enumerate_admissible(const Partition& n);

bool is_balanced_partition(const Partition& n, int p, int m);

// Every balanced partition of 2m into p parts, in lexicographic order.
std::vector<Partition> balanced_partitions(int p, int m);

// Balanced diagrams: horizontal edges from columns <= p/2 to columns > p/2.
// Throws NotBalanced unless is_balanced_partition(n, p, m).
std::vector<FeynmanDiagram> enumerate_balanced(const Partition& n, int p, int m);

// Size of enumerate_balanced(n, p, m) without listing it.
std::uint64_t count_balanced(const Partition& n, int p, int m);

// ((p/2)!)^{m_p} (r_p/2)! with m_p = floor(2m/p), r_p = 2m mod p.
std::uint64_t count_lower_bound(int p, int m);

// Two edges from one column whose targets share a column in reversed order.
bool crossing_vanishes(const FeynmanDiagram& d);

// Column orders t_(k,1) < ... < t_(k,n_k) after identifying edge endpoints
// admit a common assignment (no directed cycle).
bool simplex_consistent(const FeynmanDiagram& d);

// Number of assignments of one time from {1..grid} per edge satisfying every
// column's strict order: the indicator-kernel surrogate of F_D.
std::uint64_t surrogate_weight(const FeynmanDiagram& d, int grid = 4);

// k-th chaos contribution to E[u^2]: u0^2 B^k t^{k(theta+1)} / Gamma(k(theta+1)+1),
// B = lambda^2 Theta Gamma(theta+1). Requires u1 = 0 when beta > 1.
double chaos_term(const ModelParams& p, double t, int k);

struct McEstimate {
  double value = 0.0;
  double stderr_value = 0.0;
  std::uint64_t samples = 0;
};

// Importance-sampled time-simplex integral of the k-th chaos term; space is
// integrated analytically (Theta (s_{i+1} - s_i)^theta per factor). k <= 4.
McEstimate chaos_term_mc(const ModelParams& p, double t, int k, std::uint64_t samples,
                         std::uint64_t seed);

// Collapsed F_D for p = 2, n = (k, k): zero unless the diagram is simplex
// consistent, then lambda^{2k} Theta^k int J0^2(s1) prod (s_{i+1}-s_i)^theta.
double pair_diagram_weight(const ModelParams& p, double t, const FeynmanDiagram& d);

struct ExpTailFacts {
  double half_ratio = 0.0;   // e^{-n} sum_{m<n} n^m / m!
  double log_tail = 0.0;     // log sum_{m>=n} (n^m / m!)^a
  bool tail_lb_ok = false;   // log_tail >= a n / 4
};

ExpTailFacts exp_tail_facts(int n, double a);

struct StirlingCheck {
  double log_factorial = 0.0;
  double log_lower = 0.0;  // log(sqrt(2 pi n) (n/e)^n)
  double log_upper = 0.0;  // log 2 + log_lower
  bool holds = false;
};

StirlingCheck stirling_check(int n);

// "p m | n1,...,np | (k1,l1)-(k2,l2); ..." with m = |n| / 2.
std::string to_text(const FeynmanDiagram& d);
FeynmanDiagram diagram_from_text(const std::string& line);

}  // namespace spde
