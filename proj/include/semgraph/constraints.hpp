#ifndef SEMGRAPH_CONSTRAINTS_HPP
#define SEMGRAPH_CONSTRAINTS_HPP

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "semgraph/decomposition.hpp"
#include "semgraph/graph.hpp"
#include "semgraph/numerics.hpp"
#include "semgraph/parametrization.hpp"
#include "semgraph/separation.hpp"

namespace semgraph {

//! Rewrites every variable through fn (used to map subgraph-local sigma
//! indices back to the host graph's).
inline Polynomial rename_vars(const Polynomial& p, const std::function<Var(const Var&)>& fn) {
  Polynomial out;
  for (auto& [m, c] : p.terms()) {
    std::vector<Var> vars;
    for (auto& [v, e] : m.factors)
      for (int k = 0; k < e; ++k) vars.push_back(fn(v));
    out += Polynomial::term(c, std::move(vars));
  }
  return out;
}

//! Substitutes rational functions for variables.
inline RationalFunction substitute(const Polynomial& p,
                                   const std::function<RationalFunction(const Var&)>& fn) {
  RationalFunction out;
  for (auto& [m, c] : p.terms()) {
    RationalFunction term = RationalFunction::constant(c);
    for (auto& [v, e] : m.factors) {
      RationalFunction sub = fn(v);
      for (int k = 0; k < e; ++k) term *= sub;
    }
    out += term;
  }
  return out;
}

enum class ConstraintKind { ci_minor, minor, verma };

inline const char* to_string(ConstraintKind k) {
  switch (k) {
    case ConstraintKind::ci_minor: return "almost-principal-minor";
    case ConstraintKind::minor: return "minor";
    case ConstraintKind::verma: return "verma";
  }
  return "?";
}

struct CertificationRecord {
  bool ran = false;
  bool certified = false;
  double on_model_max_rel = 0.0;
  int off_model_nonzero = 0;
  int on_model_trials = 0;
  int off_model_trials = 0;
};

//! Polynomial constraint on the model's covariance matrices, with its
//! derivation trace and optional numeric certification.
struct Constraint {
  ConstraintKind kind;
  NodeSet rows, cols;  // index sets for minor kinds (empty for verma)
  Polynomial payload;  // sigma polynomial, primitive
  std::string provenance;
  CertificationRecord certification;
};

//! Scalar-multiple test by exact evaluation at shared random points:
//! p ~ q iff p(x) q(x0) == q(x) p(x0) for a reference point x0 with
//! q(x0) != 0, across all sampled points.
class ScalarMultipleTester {
 public:
  ScalarMultipleTester(int n_nodes, std::uint64_t seed, int points = 10) {
    auto rng = rng_for(seed, 0x5ca1a);
    for (int k = 0; k < points; ++k) {
      VarAssignment a;
      for (int i = 0; i < n_nodes; ++i)
        for (int j = i; j < n_nodes; ++j) a[Var::sigma(i, j)] = random_rational(rng);
      points_.push_back(std::move(a));
    }
  }

  bool same_up_to_scalar(const Polynomial& p, const Polynomial& q) const {
    std::vector<Rational> pv, qv;
    for (auto& a : points_) {
      pv.push_back(p.eval(a));
      qv.push_back(q.eval(a));
    }
    int ref = -1;
    for (size_t k = 0; k < qv.size(); ++k)
      if (!is_zero(qv[k])) {
        ref = static_cast<int>(k);
        break;
      }
    if (ref < 0) {
      for (auto& v : pv)
        if (!is_zero(v)) return false;
      return true;
    }
    for (size_t k = 0; k < qv.size(); ++k)
      if (pv[k] * qv[ref] != qv[k] * pv[ref]) return false;
    return true;
  }

 private:
  std::vector<VarAssignment> points_;
};

// ---------------------------------------------------------------------------
// CI and minor constraints
// ---------------------------------------------------------------------------

inline std::string node_list_string(const MixedGraph& g, const NodeSet& s) {
  std::string out;
  for (size_t k = 0; k < s.size(); ++k) out += (k ? "," : "") + g.label(s[k]);
  return out;
}

//! One almost-principal minor det(Sigma_{iS x jS}) per d-separation.
inline std::vector<Constraint> ci_constraints(const MixedGraph& g, int max_cond) {
  std::vector<Constraint> out;
  for (const CiStatement& st : ci_statements(g, max_cond)) {
    Constraint c;
    c.kind = ConstraintKind::ci_minor;
    c.rows = {st.i};
    c.cols = {st.j};
    for (int v : st.conditioning) {
      c.rows.push_back(v);
      c.cols.push_back(v);
    }
    c.payload = ci_minor(st);
    c.payload.make_primitive();
    c.provenance = g.label(st.i) + " _||_ " + g.label(st.j) + " | {" +
                   node_list_string(g, st.conditioning) + "}";
    out.push_back(std::move(c));
  }
  return out;
}

namespace detail {

inline void subsets_of_size(int n, int k, const std::function<void(const NodeSet&)>& fn) {
  NodeSet cur;
  std::function<void(int)> rec = [&](int start) {
    if (static_cast<int>(cur.size()) == k) {
      fn(cur);
      return;
    }
    for (int v = start; v < n; ++v) {
      cur.push_back(v);
      rec(v + 1);
      cur.pop_back();
    }
  };
  rec(0);
}

}  // namespace detail

//! Vanishing k x k minors det(Sigma_{A x C}) found through trek separation,
//! smallest first; minors whose index sets contain an already-binding smaller
//! separation are skipped. Universes restrict the scanned row/column sets.
inline std::vector<Constraint> minor_constraints(const MixedGraph& g, int max_minor_size,
                                                 std::optional<NodeSet> rows_universe = {},
                                                 std::optional<NodeSet> cols_universe = {}) {
  NodeSet all;
  for (int i = 0; i < g.node_count(); ++i) all.push_back(i);
  NodeSet rows_u = rows_universe.value_or(all);
  NodeSet cols_u = cols_universe.value_or(all);
  std::vector<Constraint> out;
  std::vector<std::pair<NodeSet, NodeSet>> binding;  // emitted index pairs
  for (int k = 1; k <= max_minor_size; ++k) {
    std::vector<NodeSet> row_sets, col_sets;
    detail::subsets_of_size(static_cast<int>(rows_u.size()), k, [&](const NodeSet& idx) {
      NodeSet s;
      for (int i : idx) s.push_back(rows_u[i]);
      row_sets.push_back(s);
    });
    detail::subsets_of_size(static_cast<int>(cols_u.size()), k, [&](const NodeSet& idx) {
      NodeSet s;
      for (int i : idx) s.push_back(cols_u[i]);
      col_sets.push_back(s);
    });
    for (auto& a : row_sets)
      for (auto& c : col_sets) {
        if (a > c) continue;  // det(Sigma_{A,C}) = +/- det(Sigma_{C,A})
        bool implied = false;
        for (auto& [ba, bc] : binding)
          if ((set_subset(ba, a) && set_subset(bc, c)) ||
              (set_subset(ba, c) && set_subset(bc, a))) {
            implied = true;
            break;
          }
        if (implied) continue;
        TrekSepCertificate cert = trek_separation_rank(g, a, c);
        if (cert.rank >= k) continue;
        binding.push_back({a, c});
        Constraint con;
        con.kind = ConstraintKind::minor;
        con.rows = a;
        con.cols = c;
        ExactMatrix m = exact_zeros(k, k);
        for (int r = 0; r < k; ++r)
          for (int cc = 0; cc < k; ++cc)
            m.entries[r][cc] = RationalFunction::from_var(Var::sigma(a[r], c[cc]));
        con.payload = exact_det(m, std::max(k, kDefaultSymbolicGuard)).num();
        con.payload.make_primitive();
        con.provenance = "trek separation rank " + std::to_string(cert.rank) + " of {" +
                         node_list_string(g, a) + "} x {" + node_list_string(g, c) +
                         "} via (S_A={" + node_list_string(g, cert.s_a) + "}, S_C={" +
                         node_list_string(g, cert.s_c) + "})";
        out.push_back(std::move(con));
      }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Verma-type constraints
// ---------------------------------------------------------------------------

//! True when some trek connects i and j: a common directed ancestor, or a
//! bidirected edge bridging the two ancestor sets.
inline bool trek_connected(const MixedGraph& g, int i, int j) {
  auto ancestors = [&](int v) {
    std::vector<bool> seen(g.node_count(), false);
    std::vector<int> frontier{v};
    seen[v] = true;
    while (!frontier.empty()) {
      int x = frontier.back();
      frontier.pop_back();
      for (int p : g.parents(x))
        if (!seen[p]) {
          seen[p] = true;
          frontier.push_back(p);
        }
    }
    return seen;
  };
  auto ai = ancestors(i), aj = ancestors(j);
  for (int v = 0; v < g.node_count(); ++v)
    if (ai[v] && aj[v]) return true;
  for (auto& [a, b] : g.bidirected())
    if ((ai[a] && aj[b]) || (ai[b] && aj[a])) return true;
  return false;
}

//! Ancestral sets reachable by chains of single sink removals, largest
//! first, capped. Includes the full vertex set.
inline std::vector<NodeSet> enumerate_ancestral_sets(const MixedGraph& g, int cap = 64) {
  NodeSet full;
  for (int i = 0; i < g.node_count(); ++i) full.push_back(i);
  std::vector<NodeSet> out;
  std::set<NodeSet> seen;
  std::deque<NodeSet> queue{full};
  seen.insert(full);
  while (!queue.empty() && static_cast<int>(out.size()) < cap) {
    NodeSet cur = queue.front();
    queue.pop_front();
    out.push_back(cur);
    MixedGraph h = induced_subgraph(g, cur);
    for (int s_local : sinks(h)) {
      NodeSet next;
      for (int v : cur)
        if (v != cur[s_local]) next.push_back(v);
      if (next.empty() || seen.count(next)) continue;
      seen.insert(next);
      queue.push_back(next);
    }
  }
  std::sort(out.begin(), out.end(), [](const NodeSet& a, const NodeSet& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a < b;
  });
  return out;
}

struct VermaOptions {
  int max_depth = 2;
  int ancestral_cap = 64;
  int symbolic_guard = kDefaultSymbolicGuard;
  std::uint64_t dedup_seed = 1234577;
};

namespace detail {

//! Block of a component in the indices of the graph hosting `host_nodes`
//! (comp lives in the induced subgraph whose node k is host_nodes[k]).
inline NodeSet make_block_global(const MixedComponent& comp, const NodeSet& host_nodes) {
  NodeSet out;
  for (int v : comp.block) out.push_back(host_nodes[v]);
  return make_set(out);
}

//! sigma_expr maps this level's covariance entries to rational functions of
//! the top-level sigma variables (identity at the root, composed through
//! tau maps when recursing into components).
inline void verma_recurse(const MixedGraph& g,
                          const std::vector<std::vector<RationalFunction>>& sigma_expr,
                          int depth, const VermaOptions& opt, const std::string& trail,
                          const ScalarMultipleTester& tester, std::vector<Constraint>& out) {
  if (depth > opt.max_depth) return;
  auto add_constraint = [&](Polynomial payload, const std::string& provenance) {
    payload.make_primitive();
    if (payload.is_zero() || payload.is_constant()) return;
    for (const Constraint& c : out)
      if (tester.same_up_to_scalar(c.payload, payload)) return;
    Constraint con;
    con.kind = ConstraintKind::verma;
    con.payload = std::move(payload);
    con.provenance = provenance;
    out.push_back(std::move(con));
  };
  for (const NodeSet& a : enumerate_ancestral_sets(g, opt.ancestral_cap)) {
    if (a.size() < 2) continue;
    MixedGraph h = induced_subgraph(g, a);
    Decomposition d = mixed_components(h);
    for (const MixedComponent& comp : d.components) {
      if (comp.vertex_set.size() < 2) continue;
      // pairs of V[C] with no trek inside the component graph
      std::vector<std::pair<int, int>> dead_pairs;
      for (size_t r = 0; r < comp.vertex_set.size(); ++r)
        for (size_t c = r + 1; c < comp.vertex_set.size(); ++c)
          if (!trek_connected(comp.graph, static_cast<int>(r), static_cast<int>(c)))
            dead_pairs.emplace_back(static_cast<int>(r), static_cast<int>(c));
      bool recurse_here = depth < opt.max_depth &&
                          comp.graph.node_count() < g.node_count();
      if (dead_pairs.empty() && !recurse_here) continue;
      ExactMatrix tau = tau_symbolic(h, comp, opt.symbolic_guard);
      // tau is written in h-local sigma variables; compose with this level's
      // expressions to reach the top-level sigma ring
      auto compose_entry = [&](const RationalFunction& rf) {
        auto subst = [&](const Var& v) -> RationalFunction {
          if (v.kind != Var::Sigma) throw std::runtime_error("verma: unexpected variable kind");
          return sigma_expr[a[v.i]][a[v.j]];
        };
        RationalFunction num = substitute(rf.num(), subst);
        RationalFunction den = substitute(rf.den_expanded(), subst);
        return divide(num, den);
      };
      for (auto& [r, c] : dead_pairs) {
        if (tau.entries[r][c].is_zero()) continue;
        RationalFunction composed = compose_entry(tau.entries[r][c]);
        if (composed.is_zero()) continue;
        std::string prov = trail + "ancestral {" + node_list_string(g, a) + "} block {" +
                           node_list_string(g, make_block_global(comp, a)) + "} entry (" +
                           comp.graph.label(r) + "," + comp.graph.label(c) + ")";
        add_constraint(composed.num(), prov);
      }
      if (recurse_here) {
        // covariance entries of the component model, in top-level sigma terms
        int m = static_cast<int>(comp.vertex_set.size());
        std::vector<std::vector<RationalFunction>> child_expr(
            m, std::vector<RationalFunction>(m));
        for (int r = 0; r < m; ++r)
          for (int c = 0; c < m; ++c) child_expr[r][c] = compose_entry(tau.entries[r][c]);
        std::string child_trail = trail + "ancestral {" + node_list_string(g, a) +
                                  "} component {" +
                                  node_list_string(g, make_block_global(comp, a)) + "} > ";
        verma_recurse(comp.graph, child_expr, depth + 1, opt, child_trail, tester, out);
      }
    }
  }
}

}  // namespace detail

//! Verma-type constraints: alternate between ancestral restriction and Tian
//! decomposition; every trek-disconnected pair inside a component yields the
//! numerator of the corresponding tau entry. Acyclic graphs only.
inline std::vector<Constraint> verma_constraints(const MixedGraph& g,
                                                 const VermaOptions& opt = {}) {
  if (!topological_order(g).has_value())
    throw GraphError("verma_constraints: acyclic graphs only");
  std::vector<Constraint> out;
  int n = g.node_count();
  std::vector<std::vector<RationalFunction>> sigma_expr(n, std::vector<RationalFunction>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      sigma_expr[i][j] = RationalFunction::from_var(Var::sigma(i, j));
  ScalarMultipleTester tester(n, opt.dedup_seed);
  detail::verma_recurse(g, sigma_expr, 1, opt, "", tester, out);
  return out;
}

// ---------------------------------------------------------------------------
// Certification and the combined pipeline
// ---------------------------------------------------------------------------

struct CertifyOptions {
  int on_model_trials = 20;
  int off_model_trials = 5;
  double vanish_rel_tol = 1e-8;
  std::uint64_t seed = 99991;
};

//! Numeric stand-in for ideal membership: the payload must vanish on sampled
//! model covariances (relative to the evaluated term magnitudes) and be
//! nonzero at exact rational PD matrices away from the model (A A^T + I).
inline CertificationRecord certify_constraint(const MixedGraph& g, const Constraint& c,
                                              const CertifyOptions& opt = {}) {
  CertificationRecord rec;
  rec.ran = true;
  rec.on_model_trials = opt.on_model_trials;
  rec.off_model_trials = opt.off_model_trials;
  const int n = g.node_count();
  for (int t = 0; t < opt.on_model_trials; ++t) {
    ParamPoint p = sample_params(g, mix_seed(opt.seed, 0xce27, t));
    FloatMatrix sigma = phi_numeric(g, p);
    std::map<Var, double> a;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) a[Var::sigma(i, j)] = sigma(i, j);
    double val = std::abs(c.payload.eval_double(a));
    double scale = std::max(c.payload.eval_double_abs(a), 1e-300);
    rec.on_model_max_rel = std::max(rec.on_model_max_rel, val / scale);
  }
  for (int t = 0; t < opt.off_model_trials; ++t) {
    auto rng = rng_for(opt.seed, 0x0ff, t);
    QMatrix root = q_zeros(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) root[i][j] = random_rational(rng);
    QMatrix sigma = q_mul(root, q_transpose(root));
    for (int i = 0; i < n; ++i) sigma[i][i] += rat(1);
    VarAssignment a;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) a[Var::sigma(i, j)] = sigma[i][j];
    if (!is_zero(c.payload.eval(a))) ++rec.off_model_nonzero;
  }
  rec.certified = rec.on_model_max_rel < opt.vanish_rel_tol &&
                  rec.off_model_nonzero == rec.off_model_trials;
  return rec;
}

struct DiscoveryOptions {
  int max_cond = -1;        // default |V| - 2
  int max_minor_size = 3;
  VermaOptions verma;
  CertifyOptions certify;
  bool run_verma = true;
  bool run_certify = true;
};

//! Combined discovery: CI minors, trek-separation minors, then the Verma
//! recursion; duplicates (up to scalar) keep their earliest kind.
inline std::vector<Constraint> discover_constraints(const MixedGraph& g,
                                                    const DiscoveryOptions& opt = {}) {
  int max_cond = opt.max_cond >= 0 ? opt.max_cond : std::max(0, g.node_count() - 2);
  std::vector<Constraint> out = ci_constraints(g, max_cond);
  ScalarMultipleTester tester(g.node_count(), opt.verma.dedup_seed);
  auto add_unique = [&](Constraint c) {
    for (const Constraint& prev : out)
      if (tester.same_up_to_scalar(prev.payload, c.payload)) return;
    out.push_back(std::move(c));
  };
  for (Constraint& c : minor_constraints(g, opt.max_minor_size)) add_unique(std::move(c));
  if (opt.run_verma && topological_order(g).has_value())
    for (Constraint& c : verma_constraints(g, opt.verma)) add_unique(std::move(c));
  if (opt.run_certify)
    for (Constraint& c : out) c.certification = certify_constraint(g, c, opt.certify);
  return out;
}

}  // namespace semgraph

#endif
