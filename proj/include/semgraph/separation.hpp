#ifndef SEMGRAPH_SEPARATION_HPP
#define SEMGRAPH_SEPARATION_HPP

#include <queue>
#include <vector>

#include "semgraph/exact_matrix.hpp"
#include "semgraph/graph.hpp"
#include "semgraph/parametrization.hpp"

namespace semgraph {

//! Conditional independence statement i _||_ j | S.
struct CiStatement {
  int i, j;
  NodeSet conditioning;

  friend bool operator==(const CiStatement& a, const CiStatement& b) {
    return a.i == b.i && a.j == b.j && a.conditioning == b.conditioning;
  }
  friend bool operator<(const CiStatement& a, const CiStatement& b) {
    if (a.i != b.i) return a.i < b.i;
    if (a.j != b.j) return a.j < b.j;
    if (a.conditioning.size() != b.conditioning.size())
      return a.conditioning.size() < b.conditioning.size();
    return a.conditioning < b.conditioning;
  }
};

namespace detail {

//! Directed graph obtained by subdividing every bidirected edge i <-> j into
//! a fresh source node with edges to i and j. Walk semantics over the result
//! match the mixed graph's, so d-separation needs no bidirected special case.
struct SubdividedDigraph {
  int n_original;
  int n_total;
  std::vector<std::vector<int>> children;
  std::vector<std::vector<int>> parents;

  explicit SubdividedDigraph(const MixedGraph& g) {
    n_original = g.node_count();
    n_total = n_original + static_cast<int>(g.bidirected().size());
    children.assign(n_total, {});
    parents.assign(n_total, {});
    for (auto& [a, b] : g.directed()) {
      children[a].push_back(b);
      parents[b].push_back(a);
    }
    int next = n_original;
    for (auto& [a, b] : g.bidirected()) {
      children[next] = {a, b};
      parents[a].push_back(next);
      parents[b].push_back(next);
      ++next;
    }
  }
};

}  // namespace detail

//! Semi-walk d-separation: i and j are d-connected by S when some walk has
//! every collider in S and every non-collider outside S. Reachability over
//! states (node, arrived-with-arrowhead) on the subdivided digraph decides
//! this for walks, cyclic graphs included.
inline bool d_separated(const MixedGraph& g, int i, int j, const NodeSet& s) {
  if (i == j) throw GraphError("d_separated: endpoints must differ");
  if (set_contains(s, i) || set_contains(s, j))
    throw GraphError("d_separated: conditioning set overlaps the endpoints");
  detail::SubdividedDigraph d(g);
  auto in_s = [&](int v) { return v < d.n_original && set_contains(s, v); };
  // state: node * 2 + (1 if arrived through an arrowhead at the node)
  std::vector<bool> seen(static_cast<size_t>(d.n_total) * 2, false);
  std::queue<std::pair<int, bool>> queue;
  auto push = [&](int v, bool head) {
    if (v == j) return true;
    size_t key = static_cast<size_t>(v) * 2 + (head ? 1 : 0);
    if (!seen[key]) {
      seen[key] = true;
      queue.push({v, head});
    }
    return false;
  };
  for (int c : d.children[i])
    if (push(c, true)) return false;
  for (int p : d.parents[i])
    if (push(p, false)) return false;
  while (!queue.empty()) {
    auto [v, head] = queue.front();
    queue.pop();
    // leave through a tail at v: v is a non-collider
    if (!in_s(v))
      for (int c : d.children[v])
        if (push(c, true)) return false;
    // leave through a head at v: collider iff we arrived through a head
    bool collider = head;
    if (collider ? in_s(v) : !in_s(v))
      for (int p : d.parents[v])
        if (push(p, false)) return false;
  }
  return true;
}

//! All d-separations with |S| <= max_cond, deduplicated (i < j),
//! deterministic order.
inline std::vector<CiStatement> ci_statements(const MixedGraph& g, int max_cond) {
  int n = g.node_count();
  std::vector<CiStatement> out;
  std::vector<int> others;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      others.clear();
      for (int v = 0; v < n; ++v)
        if (v != i && v != j) others.push_back(v);
      int m = static_cast<int>(others.size());
      for (int mask = 0; mask < (1 << m); ++mask) {
        if (__builtin_popcount(static_cast<unsigned>(mask)) > max_cond) continue;
        NodeSet s;
        for (int b = 0; b < m; ++b)
          if (mask & (1 << b)) s.push_back(others[b]);
        if (d_separated(g, i, j, s)) out.push_back({i, j, s});
      }
    }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Trek separation
// ---------------------------------------------------------------------------

//! Certificate that (S_A, S_C) intercepts every trek from A to C on the left
//! respectively right side, with rank = |S_A| + |S_C| the generic rank of the
//! A x C covariance block.
struct TrekSepCertificate {
  NodeSet a, c;
  int rank = 0;
  NodeSet s_a, s_c;
};

namespace detail {

//! Unit-capacity max-flow (BFS augmenting paths) on an adjacency-list graph
//! with integer capacities.
struct FlowNetwork {
  struct Arc {
    int to, rev, cap;
  };
  std::vector<std::vector<Arc>> adj;

  explicit FlowNetwork(int n) : adj(n) {}

  void add_edge(int from, int to, int cap) {
    adj[from].push_back({to, static_cast<int>(adj[to].size()), cap});
    adj[to].push_back({from, static_cast<int>(adj[from].size()) - 1, 0});
  }

  int max_flow(int s, int t) {
    int flow = 0;
    while (true) {
      std::vector<std::pair<int, int>> pred(adj.size(), {-1, -1});
      std::queue<int> q;
      q.push(s);
      pred[s] = {s, -1};
      while (!q.empty() && pred[t].first < 0) {
        int v = q.front();
        q.pop();
        for (size_t k = 0; k < adj[v].size(); ++k) {
          const Arc& a = adj[v][k];
          if (a.cap > 0 && pred[a.to].first < 0) {
            pred[a.to] = {v, static_cast<int>(k)};
            q.push(a.to);
          }
        }
      }
      if (pred[t].first < 0) break;
      for (int v = t; v != s;) {
        auto [u, k] = pred[v];
        adj[u][k].cap -= 1;
        adj[adj[u][k].to][adj[u][k].rev].cap += 1;
        v = u;
      }
      ++flow;
    }
    return flow;
  }

  std::vector<bool> reachable_from(int s) const {
    std::vector<bool> seen(adj.size(), false);
    std::queue<int> q;
    q.push(s);
    seen[s] = true;
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      for (const Arc& a : adj[v])
        if (a.cap > 0 && !seen[a.to]) {
          seen[a.to] = true;
          q.push(a.to);
        }
    }
    return seen;
  }
};

}  // namespace detail

//! Generic rank of the A x C covariance block with a trek-separating
//! certificate, via max-flow/min-vertex-cut in the doubled digraph: a left
//! copy with directed edges reversed, a right copy forward, crossings
//! L(v) -> R(v) for every node and L(i) -> R(j), L(j) -> R(i) for every
//! bidirected edge. A source-to-sink path is exactly a trek from A to C;
//! unit vertex capacities make flows vertex-disjoint sided trek systems, and
//! the min cut splits into (S_A, S_C) by copy.
inline TrekSepCertificate trek_separation_rank(const MixedGraph& g, const NodeSet& a,
                                               const NodeSet& c) {
  if (a.empty() || c.empty()) throw GraphError("trek_separation_rank: empty node set");
  const int n = g.node_count();
  const int inf = n + 1;
  // node ids: L-in(v)=4v, L-out(v)=4v+1, R-in(v)=4v+2, R-out(v)=4v+3
  auto lin = [](int v) { return 4 * v; };
  auto lout = [](int v) { return 4 * v + 1; };
  auto rin = [](int v) { return 4 * v + 2; };
  auto rout = [](int v) { return 4 * v + 3; };
  const int s = 4 * n, t = 4 * n + 1;
  detail::FlowNetwork net(4 * n + 2);
  for (int v = 0; v < n; ++v) {
    net.add_edge(lin(v), lout(v), 1);
    net.add_edge(rin(v), rout(v), 1);
    net.add_edge(lout(v), rin(v), inf);  // node top
  }
  for (auto& [u, v] : g.directed()) {
    net.add_edge(lout(v), lin(u), inf);  // reversed on the left copy
    net.add_edge(rout(u), rin(v), inf);
  }
  for (auto& [u, v] : g.bidirected()) {
    net.add_edge(lout(u), rin(v), inf);
    net.add_edge(lout(v), rin(u), inf);
  }
  for (int v : a) net.add_edge(s, lin(v), inf);
  for (int v : c) net.add_edge(rout(v), t, inf);

  TrekSepCertificate cert;
  cert.a = a;
  cert.c = c;
  cert.rank = net.max_flow(s, t);
  auto reach = net.reachable_from(s);
  for (int v = 0; v < n; ++v) {
    if (reach[lin(v)] && !reach[lout(v)]) cert.s_a.push_back(v);
    if (reach[rin(v)] && !reach[rout(v)]) cert.s_c.push_back(v);
  }
  return cert;
}

//! Bounded certificate check: every enumerated trek from A to C must hit S_A
//! on the left or S_C on the right. Complete for acyclic graphs (treks have
//! at most 2(|V|-1) edges); sound but partial for cyclic ones.
inline bool verify_trek_certificate(const MixedGraph& g, const TrekSepCertificate& cert,
                                    std::optional<int> max_edges = std::nullopt) {
  int bound = max_edges ? *max_edges : 2 * g.node_count();
  for (int i : cert.a)
    for (int j : cert.c)
      for (const Trek& t : list_treks(g, i, j, bound)) {
        if (!set_intersect(t.lhs(), cert.s_a).empty()) continue;
        if (!set_intersect(t.rhs(), cert.s_c).empty()) continue;
        return false;
      }
  return true;
}

//! Independent oracle for the trek-separation rank: exact rank of the A x C
//! block of Sigma evaluated at random rational parameters (3 draws, max).
inline int generic_rank_numeric(const MixedGraph& g, const NodeSet& a, const NodeSet& c,
                                std::uint64_t seed = 20240801, int draws = 3) {
  if (a.empty() || c.empty()) throw GraphError("generic_rank_numeric: empty node set");
  int best = 0;
  for (int d = 0; d < draws; ++d) {
    auto rng = rng_for(seed, 0x7e5e9, d);
    QMatrix sigma = phi_exact_at_random_point(g, rng);
    best = std::max(best, q_rank(q_submatrix(sigma, a, c)));
  }
  return best;
}

//! Almost-principal minor det(Sigma_{iS x jS}) as a sigma-polynomial.
inline Polynomial ci_minor(const CiStatement& st, int guard = 12) {
  NodeSet rows{st.i}, cols{st.j};
  for (int v : st.conditioning) {
    rows.push_back(v);
    cols.push_back(v);
  }
  int k = static_cast<int>(rows.size());
  ExactMatrix m = exact_zeros(k, k);
  for (int r = 0; r < k; ++r)
    for (int cc = 0; cc < k; ++cc)
      m.entries[r][cc] = RationalFunction::from_var(Var::sigma(rows[r], cols[cc]));
  return exact_det(m, guard).num();
}

}  // namespace semgraph

#endif
