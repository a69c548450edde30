#ifndef SEMGRAPH_PARAMETRIZATION_HPP
#define SEMGRAPH_PARAMETRIZATION_HPP

#include <optional>
#include <string>
#include <vector>

#include "semgraph/exact_matrix.hpp"
#include "semgraph/graph.hpp"
#include "semgraph/numerics.hpp"
#include "semgraph/polynomial.hpp"

namespace semgraph {

//! Trek from source to target: a semi-walk with no colliding arrowheads.
//! `left` is the directed walk from the top down to the source, `right` the
//! walk from the top down to the target (front() is the top end, back() the
//! endpoint). With a node top the two fronts coincide; with a bidirected top
//! {left.front(), right.front()} is the edge. Trivial trek: one node on both
//! sides, node top.
struct Trek {
  std::vector<int> left;
  std::vector<int> right;
  bool top_is_edge = false;

  int source() const { return left.back(); }
  int target() const { return right.back(); }
  int edge_count() const {
    return static_cast<int>(left.size() + right.size()) - 2 + (top_is_edge ? 1 : 0);
  }
  bool trivial() const { return !top_is_edge && left.size() == 1 && right.size() == 1; }

  NodeSet lhs() const { return make_set(left); }
  NodeSet rhs() const { return make_set(right); }

  friend bool operator==(const Trek& a, const Trek& b) {
    return a.top_is_edge == b.top_is_edge && a.left == b.left && a.right == b.right;
  }
  friend bool operator<(const Trek& a, const Trek& b) {
    int ea = a.edge_count(), eb = b.edge_count();
    if (ea != eb) return ea < eb;
    if (a.top_is_edge != b.top_is_edge) return !a.top_is_edge;
    if (a.left != b.left) return a.left < b.left;
    return a.right < b.right;
  }

  std::string describe(const MixedGraph& g) const {
    std::string s;
    for (auto it = left.rbegin(); it + 1 != left.rend(); ++it)
      s += g.label(*it) + " <- ";
    s += g.label(left.front());
    if (top_is_edge) s += " <-> " + g.label(right.front());
    for (size_t k = 1; k < right.size(); ++k) s += " -> " + g.label(right[k]);
    return s;
  }
};

//! Monomial of a trek: omega at the top times lambda over all directed edges.
inline Polynomial trek_monomial(const Trek& t) {
  std::vector<Var> vars;
  vars.push_back(Var::omega(t.left.front(), t.right.front()));
  for (size_t k = 0; k + 1 < t.left.size(); ++k)
    vars.push_back(Var::lambda(t.left[k], t.left[k + 1]));
  for (size_t k = 0; k + 1 < t.right.size(); ++k)
    vars.push_back(Var::lambda(t.right[k], t.right[k + 1]));
  return Polynomial::term(rat(1), std::move(vars));
}

namespace detail {

//! All directed walks from `from` to `to` with at most `max_edges` edges.
//! In an acyclic graph walks cannot revisit nodes, so these are the directed
//! paths; with cycles the bound keeps the enumeration finite.
inline void directed_walks(const MixedGraph& g, int from, int to, int max_edges,
                           std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (cur.back() == to) out.push_back(cur);
  if (static_cast<int>(cur.size()) - 1 >= max_edges) return;
  for (int next : g.children(cur.back())) {
    cur.push_back(next);
    directed_walks(g, from, to, max_edges, cur, out);
    cur.pop_back();
  }
}

inline std::vector<std::vector<int>> directed_walks(const MixedGraph& g, int from, int to,
                                                    int max_edges) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur{from};
  directed_walks(g, from, to, max_edges, cur, out);
  return out;
}

}  // namespace detail

//! Exhaustive trek enumeration from i to j, deterministic order (edge count,
//! then lexicographic). Acyclic graphs need no bound; cyclic graphs must pass
//! max_edges.
inline std::vector<Trek> list_treks(const MixedGraph& g, int i, int j,
                                    std::optional<int> max_edges = std::nullopt) {
  bool acyclic = topological_order(g).has_value();
  if (!acyclic && !max_edges)
    throw GraphError("list_treks: cyclic graph requires an edge bound");
  int bound = max_edges ? *max_edges : 2 * (g.node_count() - 1);
  std::vector<Trek> out;
  // node tops
  for (int top = 0; top < g.node_count(); ++top) {
    auto lefts = detail::directed_walks(g, top, i, bound);
    if (lefts.empty()) continue;
    auto rights = detail::directed_walks(g, top, j, bound);
    for (auto& l : lefts)
      for (auto& r : rights) {
        Trek t{l, r, false};
        if (t.edge_count() <= bound) out.push_back(std::move(t));
      }
  }
  // bidirected-edge tops, in both orientations
  for (auto& [a, b] : g.bidirected()) {
    for (auto [la, rb] : {std::pair{a, b}, std::pair{b, a}}) {
      auto lefts = detail::directed_walks(g, la, i, bound);
      if (lefts.empty()) continue;
      auto rights = detail::directed_walks(g, rb, j, bound);
      for (auto& l : lefts)
        for (auto& r : rights) {
          Trek t{l, r, true};
          if (t.edge_count() <= bound) out.push_back(std::move(t));
        }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

//! Trek rule: entry (i, j) of phi as the sum of trek monomials. Acyclic only;
//! the cyclic rational form lives in phi_symbolic.
inline Polynomial trek_rule_entry(const MixedGraph& g, int i, int j) {
  if (!topological_order(g).has_value())
    throw GraphError("trek_rule_entry: unsupported on cyclic graphs, use phi_symbolic");
  Polynomial sum;
  for (const Trek& t : list_treks(g, i, j)) sum += trek_monomial(t);
  return sum;
}

// ---------------------------------------------------------------------------
// Covariance parametrization
// ---------------------------------------------------------------------------

//! phi(Lambda, Omega) = (I - Lambda)^-T Omega (I - Lambda)^-1.
inline FloatMatrix phi_numeric(const MixedGraph& g, const ParamPoint& p) {
  int n = g.node_count();
  FloatMatrix iml = FloatMatrix::identity(n) - p.lambda;
  auto inv = float_inverse(iml);
  if (!inv) throw std::runtime_error("phi_numeric: I - Lambda singular");
  return inv->transpose() * p.omega * (*inv);
}

//! Omega recovery (I - Lambda)^T Sigma (I - Lambda) together with the fiber
//! residual: the largest magnitude over off-support entries of B.
struct OmegaRecovery {
  FloatMatrix omega;
  double off_support_max = 0.0;
};

inline OmegaRecovery recover_omega(const MixedGraph& g, const FloatMatrix& lambda,
                                   const FloatMatrix& sigma) {
  int n = g.node_count();
  FloatMatrix iml = FloatMatrix::identity(n) - lambda;
  OmegaRecovery out{iml.transpose() * sigma * iml, 0.0};
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (!g.has_bidirected(i, j))
        out.off_support_max = std::max(out.off_support_max, std::abs(out.omega(i, j)));
  return out;
}

//! Symbolic covariance matrix: polynomial entries for acyclic graphs,
//! rational entries with denominator det(I - Lambda)^2 otherwise.
struct SymbolicCovariance {
  ExactMatrix sigma;
  Polynomial det_i_minus_lambda;
  bool acyclic = true;

  const RationalFunction& entry(int i, int j) const { return sigma.entries[i][j]; }
};

inline ExactMatrix symbolic_omega(const MixedGraph& g) {
  int n = g.node_count();
  ExactMatrix omega = exact_zeros(n, n);
  for (int i = 0; i < n; ++i)
    omega.entries[i][i] = RationalFunction::from_var(Var::omega(i, i));
  for (auto& [i, j] : g.bidirected()) {
    auto v = RationalFunction::from_var(Var::omega(i, j));
    omega.entries[i][j] = v;
    omega.entries[j][i] = v;
  }
  return omega;
}

inline ExactMatrix symbolic_i_minus_lambda(const MixedGraph& g) {
  int n = g.node_count();
  ExactMatrix m = exact_identity(n);
  for (auto& [i, j] : g.directed())
    m.entries[i][j] = RationalFunction(Polynomial::constant(rat(0)) -
                                       Polynomial::variable(Var::lambda(i, j)));
  return m;
}

//! Full symbolic parametrization. Acyclic route: (I - Lambda)^-1 as the
//! finite geometric series I + Lambda + ... + Lambda^(n-1); cyclic route:
//! adj(I - Lambda)^T Omega adj(I - Lambda) over det(I - Lambda)^2.
inline SymbolicCovariance phi_symbolic(const MixedGraph& g, int guard = kDefaultSymbolicGuard) {
  int n = g.node_count();
  if (n > guard)
    throw SizeGuardError("phi_symbolic: " + std::to_string(n) +
                         " nodes exceeds symbolic size guard " + std::to_string(guard));
  SymbolicCovariance out;
  out.acyclic = topological_order(g).has_value();
  ExactMatrix omega = symbolic_omega(g);
  if (out.acyclic) {
    ExactMatrix lambda = exact_zeros(n, n);
    for (auto& [i, j] : g.directed())
      lambda.entries[i][j] = RationalFunction::from_var(Var::lambda(i, j));
    ExactMatrix series = exact_identity(n);
    ExactMatrix power = exact_identity(n);
    for (int k = 1; k < n; ++k) {
      power = exact_mul(power, lambda);
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) series.entries[r][c] += power.entries[r][c];
    }
    out.sigma = exact_mul(exact_mul(exact_transpose(series), omega), series);
    out.det_i_minus_lambda = Polynomial::constant(rat(1));
  } else {
    ExactMatrix iml = symbolic_i_minus_lambda(g);
    RationalFunction det = exact_det(iml, guard);
    ExactMatrix adj = exact_adjugate(iml, guard);
    ExactMatrix num = exact_mul(exact_mul(exact_transpose(adj), omega), adj);
    Polynomial det_poly = det.num();  // det of a polynomial matrix is polynomial
    out.det_i_minus_lambda = det_poly;
    out.sigma = exact_zeros(n, n);
    Polynomial den = det_poly * det_poly;
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c)
        out.sigma.entries[r][c] = RationalFunction(num.entries[r][c].num(), den);
  }
  return out;
}

//! Assignment of a ParamPoint to the lambda/omega variables (doubles).
inline std::map<Var, double> param_assignment(const MixedGraph& g, const ParamPoint& p) {
  std::map<Var, double> a;
  for (auto& [i, j] : g.directed()) a[Var::lambda(i, j)] = p.lambda(i, j);
  for (int i = 0; i < g.node_count(); ++i) a[Var::omega(i, i)] = p.omega(i, i);
  for (auto& [i, j] : g.bidirected()) a[Var::omega(i, j)] = p.omega(i, j);
  return a;
}

//! Exact rational parameter draw on the graph's support (for generic-rank
//! style evaluations; Omega symmetric on B but not necessarily PD).
struct RationalParams {
  QMatrix lambda;
  QMatrix omega;
};

inline RationalParams sample_rational_params(const MixedGraph& g, std::mt19937_64& rng) {
  int n = g.node_count();
  RationalParams p{q_zeros(n, n), q_zeros(n, n)};
  for (auto& [i, j] : g.directed()) p.lambda[i][j] = random_rational(rng);
  for (int i = 0; i < n; ++i) p.omega[i][i] = random_rational(rng);
  for (auto& [i, j] : g.bidirected()) {
    Rational v = random_rational(rng);
    p.omega[i][j] = v;
    p.omega[j][i] = v;
  }
  return p;
}

//! Exact Sigma = (I - Lambda)^-T Omega (I - Lambda)^-1 over Q. Resamples
//! internally until I - Lambda is invertible (nonzero determinant).
inline QMatrix phi_exact_at_random_point(const MixedGraph& g, std::mt19937_64& rng) {
  int n = g.node_count();
  for (int attempt = 0; attempt < 64; ++attempt) {
    RationalParams p = sample_rational_params(g, rng);
    QMatrix iml = q_identity(n);
    for (auto& [i, j] : g.directed()) iml[i][j] = -p.lambda[i][j];
    auto inv = q_inverse(iml);
    if (!inv) continue;
    return q_mul(q_mul(q_transpose(*inv), p.omega), *inv);
  }
  throw std::runtime_error("phi_exact_at_random_point: could not draw invertible I - Lambda");
}

}  // namespace semgraph

#endif
