#ifndef SEMGRAPH_DECOMPOSITION_HPP
#define SEMGRAPH_DECOMPOSITION_HPP

#include <map>
#include <vector>

#include "semgraph/exact_matrix.hpp"
#include "semgraph/graph.hpp"
#include "semgraph/numerics.hpp"
#include "semgraph/parametrization.hpp"

namespace semgraph {

//! Mixed component G[C] = (V[C], D[C], B[C]): the block C plus its parents,
//! directed edges with head in C, bidirected edges inside C. Nodes of
//! V[C] \ C are sources of G[C].
struct MixedComponent {
  NodeSet block;       // C, global indices
  NodeSet vertex_set;  // V[C] = C + parents, global indices; local order
  MixedGraph graph;    // on vertex_set, original labels

  int local_index(int global) const {
    auto it = std::lower_bound(vertex_set.begin(), vertex_set.end(), global);
    return it != vertex_set.end() && *it == global
               ? static_cast<int>(it - vertex_set.begin())
               : -1;
  }
};

struct Decomposition {
  std::vector<NodeSet> blocks;  // finest common coarsening C(G)
  std::vector<MixedComponent> components;
};

//! Topological order of the strongly connected components of the directed
//! part: at each step the remaining block with no incoming edges and the
//! least member. Block-LDL uniqueness is per-order, so the order is fixed.
inline std::vector<NodeSet> scc_blocks_topological(const MixedGraph& g) {
  auto sccs = strongly_connected_components(g);
  int k = static_cast<int>(sccs.size());
  std::vector<int> block_of(g.node_count());
  for (int b = 0; b < k; ++b)
    for (int v : sccs[b]) block_of[v] = b;
  std::vector<std::vector<bool>> adj(k, std::vector<bool>(k, false));
  std::vector<int> indeg(k, 0);
  for (auto& [a, b] : g.directed()) {
    int ba = block_of[a], bb = block_of[b];
    if (ba != bb && !adj[ba][bb]) {
      adj[ba][bb] = true;
      ++indeg[bb];
    }
  }
  std::vector<NodeSet> order;
  std::vector<bool> used(k, false);
  for (int step = 0; step < k; ++step) {
    int pick = -1;
    for (int b = 0; b < k; ++b)
      if (!used[b] && indeg[b] == 0 && (pick < 0 || sccs[b].front() < sccs[pick].front()))
        pick = b;
    if (pick < 0) throw GraphError("scc_blocks_topological: cycle among blocks");
    used[pick] = true;
    order.push_back(sccs[pick]);
    for (int b = 0; b < k; ++b)
      if (adj[pick][b]) --indeg[b];
  }
  return order;
}

//! Finest common coarsening of the bidirected components and the strongly
//! connected components, with the component graphs.
inline Decomposition mixed_components(const MixedGraph& g) {
  const int n = g.node_count();
  std::vector<int> parent(n);
  for (int i = 0; i < n; ++i) parent[i] = i;
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  auto unite = [&](int a, int b) {
    int ra = find(a), rb = find(b);
    if (ra == rb) return;
    if (ra > rb) std::swap(ra, rb);
    parent[rb] = ra;
  };
  for (auto& part : {strongly_connected_components(g), bidirected_components(g)})
    for (auto& blk : part)
      for (size_t i = 1; i < blk.size(); ++i) unite(blk[0], blk[i]);
  std::map<int, NodeSet> by_root;
  for (int i = 0; i < n; ++i) by_root[find(i)].push_back(i);

  Decomposition d;
  for (auto& [root, block] : by_root) {
    d.blocks.push_back(block);
    MixedComponent comp;
    comp.block = block;
    NodeSet vs = block;
    for (int v : block)
      for (int p : g.parents(v)) vs.push_back(p);
    comp.vertex_set = make_set(vs);
    std::vector<int> local(n, -1);
    std::vector<std::string> labels;
    for (size_t l = 0; l < comp.vertex_set.size(); ++l) {
      local[comp.vertex_set[l]] = static_cast<int>(l);
      labels.push_back(g.label(comp.vertex_set[l]));
    }
    std::vector<std::pair<int, int>> dir, bidir;
    for (auto& [a, b] : g.directed())
      if (set_contains(block, b)) dir.emplace_back(local[a], local[b]);
    for (auto& [a, b] : g.bidirected())
      if (set_contains(block, a) && set_contains(block, b))
        bidir.emplace_back(local[a], local[b]);
    comp.graph = MixedGraph(std::move(labels), std::move(dir), std::move(bidir));
    d.components.push_back(std::move(comp));
  }
  return d;
}

//! Parameter projection pi_C: lambda columns kept for heads in C, omega kept
//! on C x C with unit variances added for the component's source nodes.
inline ParamPoint project_component(const MixedGraph& g, const ParamPoint& p,
                                    const MixedComponent& comp) {
  if (p.lambda.rows() != g.node_count() || p.omega.rows() != g.node_count())
    throw GraphError("project_component: parameter dimensions do not match the graph");
  int m = static_cast<int>(comp.vertex_set.size());
  ParamPoint out{FloatMatrix(m, m), FloatMatrix(m, m)};
  for (int r = 0; r < m; ++r) {
    int gr = comp.vertex_set[r];
    for (int c = 0; c < m; ++c) {
      int gc = comp.vertex_set[c];
      if (set_contains(comp.block, gc)) out.lambda(r, c) = p.lambda(gr, gc);
      if (set_contains(comp.block, gr) && set_contains(comp.block, gc))
        out.omega(r, c) = p.omega(gr, gc);
    }
    if (!set_contains(comp.block, gr)) out.omega(r, r) = 1.0;
  }
  return out;
}

//! Tian's tau_C: from the block-LDL factors (A, Delta) of Sigma over the
//! topologically ordered strong components, assemble
//! (I - M)^-T diag(I, Delta_CC) (I - M)^-1 with M the A-columns over C.
inline FloatMatrix tian_tau(const MixedGraph& g, const FloatMatrix& sigma,
                            const MixedComponent& comp) {
  BlockLdl f = block_ldl(sigma, scc_blocks_topological(g));
  int m = static_cast<int>(comp.vertex_set.size());
  FloatMatrix i_minus_m = FloatMatrix::identity(m);
  FloatMatrix dtilde = FloatMatrix::identity(m);
  for (int r = 0; r < m; ++r) {
    int gr = comp.vertex_set[r];
    for (int c = 0; c < m; ++c) {
      int gc = comp.vertex_set[c];
      if (set_contains(comp.block, gc)) i_minus_m(r, c) -= f.a(gr, gc);
      if (set_contains(comp.block, gr) && set_contains(comp.block, gc))
        dtilde(r, c) = f.delta(gr, gc);
    }
    if (!set_contains(comp.block, gr)) dtilde(r, r) = 1.0;
  }
  auto inv = float_inverse(i_minus_m);
  if (!inv) throw DecompositionError("tian_tau: I - M singular");
  return inv->transpose() * dtilde * (*inv);
}

//! Inverse of the decomposition: from all component images tau_C(Sigma),
//! recover A and Delta columns per block and rebuild Sigma.
inline FloatMatrix tian_tau_inverse(const MixedGraph& g,
                                    const Decomposition& d,
                                    const std::vector<FloatMatrix>& taus) {
  int n = g.node_count();
  FloatMatrix a(n, n), delta(n, n);
  auto topo_blocks = scc_blocks_topological(g);
  for (size_t ci = 0; ci < d.components.size(); ++ci) {
    const MixedComponent& comp = d.components[ci];
    // ordered blocks for the local factorization: the sources as one leading
    // block, then the strong components inside C in topological order
    NodeSet cbar_local;
    for (size_t l = 0; l < comp.vertex_set.size(); ++l)
      if (!set_contains(comp.block, comp.vertex_set[l]))
        cbar_local.push_back(static_cast<int>(l));
    std::vector<NodeSet> blocks;
    if (!cbar_local.empty()) blocks.push_back(cbar_local);
    for (auto& blk : topo_blocks) {
      if (!set_subset(blk, comp.block)) continue;
      NodeSet local;
      for (int v : blk) local.push_back(comp.local_index(v));
      blocks.push_back(make_set(local));
    }
    BlockLdl f = block_ldl(taus[ci], blocks);
    for (size_t r = 0; r < comp.vertex_set.size(); ++r)
      for (size_t c = 0; c < comp.vertex_set.size(); ++c) {
        int gr = comp.vertex_set[r], gc = comp.vertex_set[c];
        if (set_contains(comp.block, gc))
          a(gr, gc) = f.a(static_cast<int>(r), static_cast<int>(c));
        if (set_contains(comp.block, gr) && set_contains(comp.block, gc))
          delta(gr, gc) = f.delta(static_cast<int>(r), static_cast<int>(c));
      }
  }
  FloatMatrix iml = FloatMatrix::identity(n) - a;
  auto inv = float_inverse(iml);
  if (!inv) throw DecompositionError("tian_tau_inverse: I - A singular");
  return inv->transpose() * delta * (*inv);
}

//! Symbolic tau_C over the fraction field of Q[sigma]; acyclic graphs only
//! (singleton blocks in the deterministic topological order). Denominators
//! are leading principal minors in that order.
inline ExactMatrix tau_symbolic(const MixedGraph& g, const MixedComponent& comp,
                                int guard = kDefaultSymbolicGuard) {
  int n = g.node_count();
  auto topo = topological_order(g);
  if (!topo) throw GraphError("tau_symbolic: cyclic graphs unsupported");
  if (n > guard)
    throw SizeGuardError("tau_symbolic: " + std::to_string(n) +
                         " nodes exceeds symbolic size guard " + std::to_string(guard));
  // symbolic Sigma
  ExactMatrix sig = exact_zeros(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) sig.entries[i][j] = RationalFunction::from_var(Var::sigma(i, j));
  // regression coefficients: A column j solves Sigma_PP x = Sigma_Pj over the
  // predecessors P of j in the order; Delta_jj is the residual variance
  std::vector<std::vector<RationalFunction>> a(n, std::vector<RationalFunction>(n));
  std::vector<RationalFunction> delta(n);
  std::vector<int> pred;
  for (int j : *topo) {
    if (!pred.empty()) {
      ExactMatrix spp = exact_zeros(static_cast<int>(pred.size()), static_cast<int>(pred.size()));
      std::vector<RationalFunction> spj(pred.size());
      for (size_t r = 0; r < pred.size(); ++r) {
        for (size_t c = 0; c < pred.size(); ++c) spp.entries[r][c] = sig.entries[pred[r]][pred[c]];
        spj[r] = sig.entries[pred[r]][j];
      }
      auto x = exact_solve(spp, spj, guard);
      RationalFunction resid = sig.entries[j][j];
      for (size_t r = 0; r < pred.size(); ++r) {
        a[pred[r]][j] = x[r];
        resid -= sig.entries[j][pred[r]] * x[r];
      }
      delta[j] = resid;
    } else {
      delta[j] = sig.entries[j][j];
    }
    pred.push_back(j);
  }
  // assemble tau = F^T Dtilde F with F = (I - M)^-1 = sum of powers of M
  int m = static_cast<int>(comp.vertex_set.size());
  ExactMatrix mm = exact_zeros(m, m);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) {
      int gr = comp.vertex_set[r], gc = comp.vertex_set[c];
      if (set_contains(comp.block, gc)) mm.entries[r][c] = a[gr][gc];
    }
  ExactMatrix f = exact_identity(m);
  ExactMatrix power = exact_identity(m);
  for (int k = 1; k <= static_cast<int>(comp.block.size()); ++k) {
    power = exact_mul(power, mm);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c) f.entries[r][c] += power.entries[r][c];
  }
  ExactMatrix dtilde = exact_identity(m);
  for (int r = 0; r < m; ++r) {
    int gr = comp.vertex_set[r];
    if (set_contains(comp.block, gr)) dtilde.entries[r][r] = delta[gr];
  }
  ExactMatrix tau = exact_mul(exact_mul(exact_transpose(f), dtilde), f);
  tau.row_nodes = comp.vertex_set;
  tau.col_nodes = comp.vertex_set;
  return tau;
}

}  // namespace semgraph

#endif
