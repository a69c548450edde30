#ifndef SEMGRAPH_IDENTIFIABILITY_HPP
#define SEMGRAPH_IDENTIFIABILITY_HPP

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

// ---------------------------------------------------------------------------
// Global identifiability
// ---------------------------------------------------------------------------

//! Verdict on injectivity of phi. The witness, present only for acyclic
//! simple graphs that fail, is a node set that is connected in the bidirected
//! part and whose induced directed part has a unique sink.
struct GlobalIdVerdict {
  bool injective = false;
  std::optional<NodeSet> witness;
  std::string note;
};

inline bool check_global_witness(const MixedGraph& g, const NodeSet& s) {
  if (s.size() < 2) return false;
  MixedGraph h = induced_subgraph(g, s);
  if (bidirected_components(h).size() != 1) return false;
  return sinks(h).size() == 1;
}

namespace detail {

//! Largest witness with designated sink `s`, or empty. Fixpoint: restrict to
//! the bidirected component of s, drop nodes other than s with no directed
//! out-neighbor inside, repeat. Induced directed edges suffice: deleting
//! directed edges only enlarges the sink set, so if any subgraph on S is a
//! witness the induced one is too. In an acyclic graph the fixpoint cannot
//! retain an out-neighborless violation at s itself (that would close a
//! cycle), so s is the unique sink whenever the fixpoint keeps two nodes.
inline NodeSet unique_sink_fixpoint(const MixedGraph& g, int s) {
  NodeSet cur;
  for (int i = 0; i < g.node_count(); ++i) cur.push_back(i);
  while (true) {
    // restrict to the bidirected component of s
    MixedGraph h = induced_subgraph(g, cur);
    int s_local = h.index_of(g.label(s));
    if (s_local < 0) return {};
    NodeSet comp_local;
    for (auto& blk : bidirected_components(h))
      if (set_contains(blk, s_local)) comp_local = blk;
    NodeSet next;
    for (int v : comp_local) next.push_back(g.require_node(h.label(v)));
    // drop nodes (other than s) with no directed out-neighbor inside
    NodeSet kept;
    for (int v : next) {
      if (v == s) {
        kept.push_back(v);
        continue;
      }
      bool has_out = false;
      for (int c : g.children(v))
        if (set_contains(next, c)) {
          has_out = true;
          break;
        }
      if (has_out) kept.push_back(v);
    }
    if (kept == cur) return kept.size() >= 2 ? kept : NodeSet{};
    cur = kept;
    if (cur.size() < 2) return {};
  }
}

}  // namespace detail

//! Polynomial-time decision of injectivity of phi. Non-simple or cyclic
//! graphs fail immediately; otherwise phi is injective iff no node set is
//! bidirected-connected with a unique sink in its induced directed part.
inline GlobalIdVerdict global_id(const MixedGraph& g) {
  GlobalIdVerdict v;
  for (auto& [i, j] : g.bidirected())
    if (g.has_directed(i, j) || g.has_directed(j, i)) {
      v.note = "not simple: two edges between " + g.label(i) + " and " + g.label(j);
      // with a single directed edge the pair itself is a unique-sink witness:
      // bidirected-connected, one sink
      if (g.has_directed(i, j) != g.has_directed(j, i)) v.witness = NodeSet{i, j};
      return v;
    }
  for (auto& [i, j] : g.directed())
    if (g.has_directed(j, i)) {
      v.note = "not simple: two edges between " + g.label(i) + " and " + g.label(j);
      return v;
    }
  if (!topological_order(g).has_value()) {
    v.note = "directed part has a cycle";
    return v;
  }
  for (int s = 0; s < g.node_count(); ++s) {
    NodeSet w = detail::unique_sink_fixpoint(g, s);
    if (!w.empty()) {
      v.injective = false;
      v.witness = w;
      v.note = "unique-sink witness with sink " + g.label(s);
      return v;
    }
  }
  v.injective = true;
  return v;
}

//! Brute-force oracle: enumerate all node subsets of size >= 2. Usable for
//! small graphs only; the property tests compare it against global_id.
inline GlobalIdVerdict global_id_brute(const MixedGraph& g) {
  GlobalIdVerdict v;
  if (!is_simple(g)) {
    v.note = "not simple";
    return v;
  }
  if (!topological_order(g).has_value()) {
    v.note = "directed part has a cycle";
    return v;
  }
  int n = g.node_count();
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    if (__builtin_popcount(mask) < 2) continue;
    NodeSet s;
    for (int b = 0; b < n; ++b)
      if (mask & (1u << b)) s.push_back(b);
    if (check_global_witness(g, s)) {
      v.witness = s;
      return v;
    }
  }
  v.injective = true;
  return v;
}

// ---------------------------------------------------------------------------
// Half-trek machinery
// ---------------------------------------------------------------------------

//! Nodes j reachable from i by a half-trek: first step a directed edge out of
//! i or a bidirected edge at i, then directed edges forward.
inline NodeSet half_trek_reachable(const MixedGraph& g, int i) {
  std::vector<bool> seen(g.node_count(), false);
  std::vector<int> frontier;
  for (int c : g.children(i))
    if (!seen[c]) {
      seen[c] = true;
      frontier.push_back(c);
    }
  for (int w : g.siblings(i))
    if (!seen[w]) {
      seen[w] = true;
      frontier.push_back(w);
    }
  while (!frontier.empty()) {
    int v = frontier.back();
    frontier.pop_back();
    for (int c : g.children(v))
      if (!seen[c]) {
        seen[c] = true;
        frontier.push_back(c);
      }
  }
  NodeSet out;
  for (int v = 0; v < g.node_count(); ++v)
    if (seen[v]) out.push_back(v);
  return out;
}

//! Flow check of the half-trek criterion: is there Y inside `allowed` with
//! |Y| = |pa(i)| and a half-trek system to pa(i) without sided intersection?
//! Network: source -> chooser L(y); L(y) -> in(y) (trek with top y, so y sits
//! on its own right side) and L(y) -> in(w) for y <-> w (bidirected start);
//! out(u) -> in(v) along directed edges; out(p) -> sink for parents p. Unit
//! vertex capacities make the right sides vertex-disjoint.
inline std::optional<NodeSet> htc_flow_check(const MixedGraph& g, int i, const NodeSet& allowed) {
  for (int y : allowed)
    if (y == i || g.has_bidirected(i, y))
      throw GraphError("htc_flow_check: allowed set touches the node or its siblings");
  const auto& pa = g.parents(i);
  if (pa.empty()) return NodeSet{};
  if (allowed.size() < pa.size()) return std::nullopt;
  const int n = g.node_count();
  const int na = static_cast<int>(allowed.size());
  const int s = 0, t = 1;
  auto chooser = [&](int k) { return 2 + k; };
  auto in = [&](int v) { return 2 + na + 2 * v; };
  auto out = [&](int v) { return 2 + na + 2 * v + 1; };
  detail::FlowNetwork net(2 + na + 2 * n);
  const int inf = n + 1;
  for (int v = 0; v < n; ++v) net.add_edge(in(v), out(v), 1);
  for (auto& [u, v] : g.directed()) net.add_edge(out(u), in(v), inf);
  std::vector<int> source_arc(na);
  for (int k = 0; k < na; ++k) {
    int y = allowed[k];
    source_arc[k] = static_cast<int>(net.adj[s].size());
    net.add_edge(s, chooser(k), 1);
    net.add_edge(chooser(k), in(y), inf);
    for (int w : g.siblings(y)) net.add_edge(chooser(k), in(w), inf);
  }
  for (int p : pa) net.add_edge(out(p), t, 1);
  int flow = net.max_flow(s, t);
  if (flow != static_cast<int>(pa.size())) return std::nullopt;
  NodeSet y_set;
  for (int k = 0; k < na; ++k)
    if (net.adj[s][source_arc[k]].cap == 0) y_set.push_back(allowed[k]);
  return y_set;
}

//! Half-trek: directed walk from y, or bidirected step then a directed walk.
//! rhs includes y itself exactly when the trek has node top y.
struct HalfTrek {
  int source;
  std::vector<int> right;  // walk from the top end to the target
  bool top_is_edge = false;

  int target() const { return right.back(); }
  NodeSet rhs() const { return make_set(right); }
};

inline std::vector<HalfTrek> enumerate_half_treks(const MixedGraph& g, int y, int target,
                                                  int max_edges) {
  std::vector<HalfTrek> out;
  for (auto& walk : detail::directed_walks(g, y, target, max_edges))
    out.push_back(HalfTrek{y, walk, false});
  for (int w : g.siblings(y))
    for (auto& walk : detail::directed_walks(g, w, target, max_edges - 1))
      out.push_back(HalfTrek{y, walk, true});
  return out;
}

//! Exhaustive re-verification of one HTC set: search directly for a system
//! of half-treks Y => pa(i) with pairwise vertex-disjoint right sides.
//! Intended for |pa(i)| <= 3 (certificate soundness checks).
inline bool htc_system_exists_exhaustive(const MixedGraph& g, int i, const NodeSet& y_set,
                                         int max_edges = -1) {
  const auto& pa = g.parents(i);
  if (y_set.size() != pa.size()) return false;
  if (max_edges < 0) max_edges = 2 * g.node_count();
  std::function<bool(size_t, std::vector<bool>&, NodeSet&)> assign =
      [&](size_t k, std::vector<bool>& target_used, NodeSet& rhs_used) {
        if (k == y_set.size()) return true;
        int y = y_set[k];
        for (size_t pi = 0; pi < pa.size(); ++pi) {
          if (target_used[pi]) continue;
          for (const HalfTrek& ht : enumerate_half_treks(g, y, pa[pi], max_edges)) {
            NodeSet rhs = ht.rhs();
            if (ht.top_is_edge == false && !set_contains(rhs, y)) rhs.push_back(y);
            rhs = make_set(rhs);
            if (!set_intersect(rhs, rhs_used).empty()) continue;
            target_used[pi] = true;
            NodeSet merged = set_union(rhs_used, rhs);
            std::swap(merged, rhs_used);
            if (assign(k + 1, target_used, rhs_used)) return true;
            std::swap(merged, rhs_used);
            target_used[pi] = false;
          }
        }
        return false;
      };
  std::vector<bool> target_used(pa.size(), false);
  NodeSet rhs_used;
  return assign(0, target_used, rhs_used);
}

//! Certificate of the sufficient half-trek criterion on one graph.
struct HtcCertificate {
  std::map<int, NodeSet> y_sets;  // node -> Y_i (nodes with parents only)
  std::vector<int> order;         // solve order; respects the half-trek constraint
};

//! Checks a certificate: each Y_i satisfies the HTC with respect to i
//! (flow-verified, plus exhaustive system search for |pa(i)| <= 3) and the
//! ordering puts j before i whenever j is in Y_i with a half-trek from i to j.
inline bool verify_htc_certificate(const MixedGraph& g, const HtcCertificate& cert,
                                   std::string* why = nullptr) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  std::map<int, size_t> position;
  for (size_t k = 0; k < cert.order.size(); ++k) position[cert.order[k]] = k;
  for (int i = 0; i < g.node_count(); ++i) {
    if (g.parents(i).empty()) continue;
    auto it = cert.y_sets.find(i);
    if (it == cert.y_sets.end()) return fail("missing Y set for node " + g.label(i));
    const NodeSet& y = it->second;
    if (y.size() != g.parents(i).size()) return fail("wrong |Y| at node " + g.label(i));
    for (int v : y)
      if (v == i || g.has_bidirected(i, v))
        return fail("Y set touches node or sibling at " + g.label(i));
    auto flow = htc_flow_check(g, i, y);
    if (!flow || *flow != y) return fail("no half-trek system at node " + g.label(i));
    if (g.parents(i).size() <= 3 && !htc_system_exists_exhaustive(g, i, y))
      return fail("exhaustive system search failed at node " + g.label(i));
    if (!position.count(i)) return fail("node missing from ordering: " + g.label(i));
    NodeSet htr = half_trek_reachable(g, i);
    for (int j : y)
      if (set_contains(htr, j)) {
        if (!position.count(j)) return fail("ordering misses " + g.label(j));
        if (position[j] >= position[i])
          return fail("ordering violates " + g.label(j) + " before " + g.label(i));
      }
  }
  return true;
}

//! One-graph HTC sufficient fixpoint (no decomposition): allowed(i) is
//! everything outside {i} and its siblings that is either already solved or
//! not half-trek reachable from i. Unsolved nodes are retried in ascending
//! index until no round makes progress.
struct HtcFixpointResult {
  bool all_solved = false;
  HtcCertificate certificate;
  NodeSet unsolved;
};

inline HtcFixpointResult htc_sufficient_fixpoint(const MixedGraph& g) {
  const int n = g.node_count();
  HtcFixpointResult res;
  std::vector<bool> solved(n, false);
  for (int i = 0; i < n; ++i)
    if (g.parents(i).empty()) {
      solved[i] = true;
      res.certificate.order.push_back(i);
    }
  bool progress = true;
  while (progress) {
    progress = false;
    for (int i = 0; i < n; ++i) {
      if (solved[i] || g.parents(i).empty()) continue;
      NodeSet htr = half_trek_reachable(g, i);
      NodeSet allowed;
      for (int v = 0; v < n; ++v) {
        if (v == i || g.has_bidirected(i, v)) continue;
        if (solved[v] || !set_contains(htr, v)) allowed.push_back(v);
      }
      auto y = htc_flow_check(g, i, allowed);
      if (y) {
        solved[i] = true;
        res.certificate.y_sets[i] = *y;
        res.certificate.order.push_back(i);
        progress = true;
      }
    }
  }
  for (int i = 0; i < n; ++i)
    if (!solved[i]) res.unsolved.push_back(i);
  res.all_solved = res.unsolved.empty();
  return res;
}

// ---------------------------------------------------------------------------
// Necessary condition (Theorem HTC (ii))
// ---------------------------------------------------------------------------

enum class NecessaryStatus { passes, fails, budget_exceeded };

//! Backtracking search for a family {Y_i} where every Y_i satisfies the HTC
//! with respect to i and j in Y_i implies i not in Y_j. Exponential worst
//! case; bounded to |V| <= max_nodes.
inline NecessaryStatus htc_necessary(const MixedGraph& g, int max_nodes = 8,
                                     long backtrack_budget = 1000000) {
  const int n = g.node_count();
  if (n > max_nodes) return NecessaryStatus::budget_exceeded;
  std::vector<std::vector<NodeSet>> options(n);
  std::vector<int> active;
  for (int i = 0; i < n; ++i) {
    size_t need = g.parents(i).size();
    if (need == 0) continue;
    NodeSet universe;
    for (int v = 0; v < n; ++v)
      if (v != i && !g.has_bidirected(i, v)) universe.push_back(v);
    if (universe.size() < need) return NecessaryStatus::fails;
    // enumerate candidate subsets of the right size, keep the flow-feasible
    std::vector<int> idx(universe.size());
    std::vector<NodeSet> feas;
    std::function<void(size_t, NodeSet&)> rec = [&](size_t start, NodeSet& cur) {
      if (cur.size() == need) {
        auto y = htc_flow_check(g, i, cur);
        if (y && *y == cur) feas.push_back(cur);
        return;
      }
      for (size_t k = start; k < universe.size(); ++k) {
        cur.push_back(universe[k]);
        rec(k + 1, cur);
        cur.pop_back();
      }
    };
    NodeSet cur;
    rec(0, cur);
    if (feas.empty()) return NecessaryStatus::fails;
    options[i] = std::move(feas);
    active.push_back(i);
  }
  // fewest options first
  std::sort(active.begin(), active.end(), [&](int a, int b) {
    if (options[a].size() != options[b].size()) return options[a].size() < options[b].size();
    return a < b;
  });
  std::vector<const NodeSet*> chosen(n, nullptr);
  long budget = backtrack_budget;
  std::function<bool(size_t)> search = [&](size_t k) -> bool {
    if (k == active.size()) return true;
    if (--budget < 0) throw SizeGuardError("htc_necessary: backtrack budget exceeded");
    int i = active[k];
    for (const NodeSet& y : options[i]) {
      bool ok = true;
      for (size_t k2 = 0; k2 < k && ok; ++k2) {
        int j = active[k2];
        if (set_contains(y, j) && set_contains(*chosen[j], i)) ok = false;
      }
      if (!ok) continue;
      chosen[i] = &y;
      if (search(k + 1)) return true;
      chosen[i] = nullptr;
    }
    return false;
  };
  try {
    return search(0) ? NecessaryStatus::passes : NecessaryStatus::fails;
  } catch (const SizeGuardError&) {
    return NecessaryStatus::budget_exceeded;
  }
}

//! One-graph half-trek verdict: the sufficient fixpoint and the necessary
//! family search together.
struct HtcReport {
  HtcFixpointResult sufficient;
  NecessaryStatus necessary = NecessaryStatus::passes;
};

inline HtcReport htc_identifiable(const MixedGraph& g, int necessary_max_nodes = 8) {
  HtcReport r;
  r.sufficient = htc_sufficient_fixpoint(g);
  r.necessary = htc_necessary(g, necessary_max_nodes);
  return r;
}

// ---------------------------------------------------------------------------
// Recursive certification and recovery
// ---------------------------------------------------------------------------

struct DegenerateSigmaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

//! Where and how one lambda column was certified.
struct NodeCertificate {
  NodeSet y_set;      // global ids
  NodeSet subgraph;   // global node set of the subgraph where the solve happened
  std::string provenance;
};

enum class IdStatus { globally_identifiable, htc_identifiable, generically_infinite, undecided };

struct ComponentReport {
  NodeSet block;
  NodeSet vertex_set;
  GlobalIdVerdict global;
  NecessaryStatus necessary = NecessaryStatus::passes;
  bool htc_certified = false;
};

struct IdentifiabilityReport {
  IdStatus status = IdStatus::undecided;
  GlobalIdVerdict global;
  NecessaryStatus necessary = NecessaryStatus::passes;
  std::vector<ComponentReport> components;
  std::map<int, NodeCertificate> node_certs;  // per head node with parents
  std::vector<int> solve_order;               // chronological, global ids
  NodeSet unsolved;                           // heads never certified
  int subgraphs_explored = 0;
  bool sink_removal_used = false;
  std::optional<int> degree_estimate;

  HtcCertificate top_certificate(const MixedGraph& g) const {
    HtcCertificate c;
    c.order = solve_order;
    for (auto& [node, cert] : node_certs) c.y_sets[node] = cert.y_set;
    (void)g;
    return c;
  }
};

namespace detail {

struct SubgraphJob {
  MixedGraph graph;
  NodeSet nodes;      // global ids, sorted; local index = position
  NodeSet true_cols;  // global ids whose full parent set is present here
  std::string provenance;
  std::optional<FloatMatrix> sigma;  // model covariance of this subgraph
};

//! Runs the HTC fixpoint inside one job, marking global certificates and,
//! when recovering, solving the linear systems against the job's Sigma.
//! Non-true columns of the job (component sources) are parentless there and
//! count as known immediately.
inline bool job_htc_pass(const SubgraphJob& job,
                         std::map<int, NodeCertificate>& node_certs,
                         std::vector<int>& solve_order, FloatMatrix* lambda_global,
                         const std::map<int, NodeSet>& global_parents) {
  const MixedGraph& h = job.graph;
  const int m = h.node_count();
  bool any_progress = false;
  auto locally_known = [&](int local) {
    if (h.parents(local).empty()) return true;
    return node_certs.count(job.nodes[local]) > 0;
  };
  bool progress = true;
  while (progress) {
    progress = false;
    for (int i = 0; i < m; ++i) {
      int gi = job.nodes[i];
      if (h.parents(i).empty() || node_certs.count(gi)) continue;
      if (!set_contains(job.true_cols, gi)) continue;
      NodeSet htr = half_trek_reachable(h, i);
      NodeSet allowed;
      for (int v = 0; v < m; ++v) {
        if (v == i || h.has_bidirected(i, v)) continue;
        if (locally_known(v) || !set_contains(htr, v)) allowed.push_back(v);
      }
      auto y = htc_flow_check(h, i, allowed);
      if (!y) continue;
      // solve the linear system before committing when recovering
      if (lambda_global) {
        const auto& pa = h.parents(i);
        const int k = static_cast<int>(pa.size());
        const FloatMatrix& sig = *job.sigma;
        FloatMatrix a(k, k);
        std::vector<double> b(k);
        for (int r = 0; r < k; ++r) {
          int yv = (*y)[r];
          // row yv of (I - Lambda_partial)^T Sigma
          std::vector<double> row(m);
          for (int c = 0; c < m; ++c) row[c] = sig(yv, c);
          if (node_certs.count(job.nodes[yv])) {
            for (int p : h.parents(yv)) {
              double l = (*lambda_global)(job.nodes[p], job.nodes[yv]);
              if (l == 0.0) continue;
              for (int c = 0; c < m; ++c) row[c] -= l * sig(p, c);
            }
          }
          for (int c = 0; c < k; ++c) a(r, c) = row[pa[c]];
          b[r] = row[i];
        }
        if (!lu_solve(a, b))
          throw DegenerateSigmaError("recover: singular half-trek system at node " +
                                     h.label(i));
        for (int c = 0; c < k; ++c)
          (*lambda_global)(job.nodes[pa[c]], gi) = b[c];
      }
      NodeCertificate cert;
      for (int v : *y) cert.y_set.push_back(job.nodes[v]);
      cert.subgraph = job.nodes;
      cert.provenance = job.provenance;
      node_certs[gi] = std::move(cert);
      solve_order.push_back(gi);
      (void)global_parents;
      progress = true;
      any_progress = true;
    }
  }
  return any_progress;
}

}  // namespace detail

struct IdentifyOptions {
  int necessary_max_nodes = 8;
  int max_subgraphs = 2048;
  bool run_necessary = true;
};

struct RecoveryResult {
  FloatMatrix lambda;
  FloatMatrix omega;
  double fiber_residual = 0.0;  // off-support magnitude of recovered Omega
};

//! Full identifiability pipeline: global decision, mixed-component
//! decomposition, HTC fixpoints with recursive re-decomposition and sink
//! removal (per-node certificates), necessary condition on the original
//! components. When sigma is given, certified columns are solved numerically
//! along the way.
inline IdentifiabilityReport identify(const MixedGraph& g,
                                      const IdentifyOptions& opts = {},
                                      const FloatMatrix* sigma = nullptr,
                                      RecoveryResult* recovery = nullptr) {
  IdentifiabilityReport rep;
  rep.global = global_id(g);
  const int n = g.node_count();

  // static job universe: the graph itself, mixed components, sink removals,
  // recursively; deduplicated on (node set, edge structure)
  std::deque<detail::SubgraphJob> jobs;
  std::set<std::string> seen;
  std::vector<detail::SubgraphJob> universe;
  auto push_job = [&](detail::SubgraphJob job) {
    std::string key = job.graph.serialize();
    key += '|';
    for (int v : job.nodes) key += std::to_string(v) + ',';
    for (int v : job.true_cols) key += ';' + std::to_string(v);
    if (seen.count(key)) return;
    seen.insert(key);
    jobs.push_back(std::move(job));
  };
  {
    detail::SubgraphJob root;
    root.graph = g;
    for (int i = 0; i < n; ++i) root.nodes.push_back(i);
    root.true_cols = root.nodes;
    root.provenance = "graph";
    if (sigma) root.sigma = *sigma;
    push_job(std::move(root));
  }
  Decomposition top_decomp = mixed_components(g);
  while (!jobs.empty() && static_cast<int>(universe.size()) < opts.max_subgraphs) {
    detail::SubgraphJob job = std::move(jobs.front());
    jobs.pop_front();
    // children: mixed components (when the job actually splits)...
    Decomposition d = mixed_components(job.graph);
    if (d.blocks.size() > 1) {
      for (size_t ci = 0; ci < d.components.size(); ++ci) {
        const MixedComponent& comp = d.components[ci];
        detail::SubgraphJob child;
        child.graph = comp.graph;
        for (int local : comp.vertex_set) child.nodes.push_back(job.nodes[local]);
        NodeSet block_global;
        for (int local : comp.block) block_global.push_back(job.nodes[local]);
        child.true_cols = set_intersect(job.true_cols, block_global);
        child.provenance = job.provenance + " > component";
        if (job.sigma) child.sigma = tian_tau(job.graph, *job.sigma, comp);
        push_job(std::move(child));
      }
    }
    // ...and single-sink removals (ancestral subgraphs)
    if (job.graph.node_count() > 1) {
      for (int s : sinks(job.graph)) {
        NodeSet keep_local;
        for (int v = 0; v < job.graph.node_count(); ++v)
          if (v != s) keep_local.push_back(v);
        detail::SubgraphJob child;
        child.graph = induced_subgraph(job.graph, keep_local);
        for (int local : keep_local) child.nodes.push_back(job.nodes[local]);
        child.true_cols = set_intersect(job.true_cols, child.nodes);
        child.provenance = job.provenance + " > minus sink " + job.graph.label(s);
        if (job.sigma) child.sigma = job.sigma->submatrix(keep_local, keep_local);
        push_job(std::move(child));
      }
    }
    universe.push_back(std::move(job));
  }
  rep.subgraphs_explored = static_cast<int>(universe.size());
  rep.sink_removal_used = rep.subgraphs_explored > 1;

  FloatMatrix lambda(n, n);
  std::map<int, NodeSet> parent_map;
  for (int i = 0; i < n; ++i)
    if (!g.parents(i).empty()) parent_map[i] = g.parents(i);
  bool progress = true;
  while (progress) {
    progress = false;
    for (auto& job : universe)
      if (detail::job_htc_pass(job, rep.node_certs, rep.solve_order,
                               sigma ? &lambda : nullptr, parent_map))
        progress = true;
  }
  for (auto& [i, pa] : parent_map)
    if (!rep.node_certs.count(i)) rep.unsolved.push_back(i);

  // necessary condition: original mixed components only
  rep.necessary = NecessaryStatus::passes;
  for (size_t ci = 0; ci < top_decomp.components.size(); ++ci) {
    const MixedComponent& comp = top_decomp.components[ci];
    ComponentReport cr;
    cr.block = comp.block;
    cr.vertex_set = comp.vertex_set;
    cr.global = global_id(comp.graph);
    cr.htc_certified = true;
    for (int v : comp.block)
      if (!g.parents(v).empty() && !rep.node_certs.count(v)) cr.htc_certified = false;
    if (opts.run_necessary) {
      cr.necessary = htc_necessary(comp.graph, opts.necessary_max_nodes);
      if (cr.necessary == NecessaryStatus::fails) rep.necessary = NecessaryStatus::fails;
      else if (cr.necessary == NecessaryStatus::budget_exceeded &&
               rep.necessary == NecessaryStatus::passes)
        rep.necessary = NecessaryStatus::budget_exceeded;
    }
    rep.components.push_back(std::move(cr));
  }

  if (rep.global.injective)
    rep.status = IdStatus::globally_identifiable;
  else if (rep.unsolved.empty())
    rep.status = IdStatus::htc_identifiable;
  else if (rep.necessary == NecessaryStatus::fails)
    rep.status = IdStatus::generically_infinite;
  else
    rep.status = IdStatus::undecided;

  if (sigma && recovery && rep.unsolved.empty()) {
    OmegaRecovery om = recover_omega(g, lambda, *sigma);
    recovery->lambda = lambda;
    recovery->fiber_residual = om.off_support_max;
    // zero the off-support entries: the recovered point must lie in the model
    FloatMatrix omega = om.omega;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j && !g.has_bidirected(i, j)) omega(i, j) = 0.0;
    recovery->omega = omega;
  }
  return rep;
}

//! Rational recovery of Lambda from Sigma using a one-graph certificate:
//! visit nodes in certificate order, each step solving
//! [(I - Lambda)^T Sigma]_{Y_i, pa(i)} x = [(I - Lambda)^T Sigma]_{Y_i, i}
//! with the currently known Lambda columns.
inline FloatMatrix recover_lambda(const MixedGraph& g, const FloatMatrix& sigma,
                                  const HtcCertificate& cert) {
  const int n = g.node_count();
  FloatMatrix lambda(n, n);
  std::vector<bool> solved(n, false);
  for (int i : cert.order) {
    const auto& pa = g.parents(i);
    if (pa.empty()) {
      solved[i] = true;
      continue;
    }
    auto it = cert.y_sets.find(i);
    if (it == cert.y_sets.end())
      throw GraphError("recover_lambda: certificate misses node " + g.label(i));
    const NodeSet& y = it->second;
    if (y.size() != pa.size())
      throw GraphError("recover_lambda: |Y| != |pa| at node " + g.label(i));
    const int k = static_cast<int>(pa.size());
    FloatMatrix a(k, k);
    std::vector<double> b(k);
    for (int r = 0; r < k; ++r) {
      int yv = y[r];
      std::vector<double> row(n);
      for (int c = 0; c < n; ++c) row[c] = sigma(yv, c);
      if (solved[yv]) {
        for (int p : g.parents(yv)) {
          double l = lambda(p, yv);
          if (l == 0.0) continue;
          for (int c = 0; c < n; ++c) row[c] -= l * sigma(p, c);
        }
      }
      for (int c = 0; c < k; ++c) a(r, c) = row[pa[c]];
      b[r] = row[i];
    }
    if (!lu_solve(a, b))
      throw DegenerateSigmaError("recover_lambda: singular system at node " + g.label(i));
    for (int c = 0; c < k; ++c) lambda(pa[c], i) = b[c];
    solved[i] = true;
  }
  return lambda;
}

// ---------------------------------------------------------------------------
// Fiber degree estimation
// ---------------------------------------------------------------------------

struct DegreeEstimate {
  int modal = 0;                    // modal real fiber size across trials
  std::map<int, int> distribution;  // cluster count -> number of trials
  int trials = 0;
  int starts = 0;
  std::string note = "lower-bound estimate of the real fiber size (multistart Newton)";
};

//! Samples parameter points (coefficient magnitude up to `scale`), solves the
//! fiber equations from many random starts, clusters the solutions, and
//! reports the modal cluster count. Counts real solutions only.
inline DegreeEstimate fiber_degree_estimate(const MixedGraph& g, int trials = 20,
                                            int starts = 200, std::uint64_t seed = 7,
                                            int threads = 1,
                                            const NewtonOptions& newton = {},
                                            double scale = 1.0) {
  DegreeEstimate est;
  est.trials = trials;
  est.starts = starts;
  const int n = g.node_count();
  std::vector<int> counts(trials, 0);
  parallel_for(trials, threads, [&](int trial) {
    ParamPoint p = sample_params(g, mix_seed(seed, 0xde6, trial), scale);
    FloatMatrix sigma = phi_numeric(g, p);
    std::vector<FloatMatrix> sols;
    for (int k = 0; k < starts; ++k) {
      auto rng = rng_for(seed, 0x57a27, trial, k);
      std::uniform_real_distribution<double> unit(-1.0, 1.0);
      double radius = 0.5 * (1 << (k % 4)) * std::max(1.0, scale);  // 0.5..4 x scale
      FloatMatrix start(n, n);
      for (auto& [ti, hj] : g.directed()) start(ti, hj) = radius * unit(rng);
      auto sol = newton_fiber_solve(g, sigma, start, newton);
      if (sol) sols.push_back(std::move(*sol));
    }
    counts[trial] = static_cast<int>(cluster_solutions(sols, newton.cluster_radius).size());
  });
  for (int c : counts) est.distribution[c] += 1;
  int best = 0;
  for (auto& [count, freq] : est.distribution)
    if (freq > best || (freq == best && count < est.modal)) {
      best = freq;
      est.modal = count;
    }
  return est;
}

}  // namespace semgraph

#endif
