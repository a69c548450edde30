#ifndef SEMGRAPH_GRAPH_HPP
#define SEMGRAPH_GRAPH_HPP

#include <algorithm>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "semgraph/util.hpp"

namespace semgraph {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GraphError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

//! Node handle: dense index into the graph's node list plus its text label.
struct NodeId {
  int index = -1;
  std::string label;
  friend bool operator==(const NodeId& a, const NodeId& b) { return a.index == b.index; }
  friend bool operator<(const NodeId& a, const NodeId& b) { return a.index < b.index; }
};

//! Mixed graph G = (V, D, B): directed edges (tail, head) and bidirected
//! edges stored canonically with the smaller index first. Immutable after
//! construction; no self-loops, no duplicate edges.
class MixedGraph {
 public:
  MixedGraph() = default;

  MixedGraph(std::vector<std::string> labels,
             std::vector<std::pair<int, int>> directed,
             std::vector<std::pair<int, int>> bidirected)
      : labels_(std::move(labels)) {
    const int n = static_cast<int>(labels_.size());
    for (int i = 0; i < n; ++i) {
      if (label_to_index_.count(labels_[i]))
        throw GraphError("duplicate node label: " + labels_[i]);
      label_to_index_[labels_[i]] = i;
    }
    for (auto& e : directed) check_endpoints(e.first, e.second, false);
    for (auto& e : bidirected) {
      check_endpoints(e.first, e.second, true);
      if (e.first > e.second) std::swap(e.first, e.second);
    }
    std::sort(directed.begin(), directed.end());
    std::sort(bidirected.begin(), bidirected.end());
    if (std::adjacent_find(directed.begin(), directed.end()) != directed.end())
      throw GraphError("duplicate directed edge");
    if (std::adjacent_find(bidirected.begin(), bidirected.end()) != bidirected.end())
      throw GraphError("duplicate bidirected edge");
    directed_ = std::move(directed);
    bidirected_ = std::move(bidirected);
    parents_.assign(n, {});
    children_.assign(n, {});
    siblings_.assign(n, {});
    for (auto& [tail, head] : directed_) {
      children_[tail].push_back(head);
      parents_[head].push_back(tail);
    }
    for (auto& [i, j] : bidirected_) {
      siblings_[i].push_back(j);
      siblings_[j].push_back(i);
    }
    for (auto& v : parents_) std::sort(v.begin(), v.end());
    for (auto& v : children_) std::sort(v.begin(), v.end());
    for (auto& v : siblings_) std::sort(v.begin(), v.end());
  }

  //! Parses the graph file format: optional '#' comment lines, one
  //! "nodes:" line, then edge lines "a -> b" or "a <-> b".
  static MixedGraph parse(const std::string& text) {
    std::vector<std::string> labels;
    std::vector<std::pair<int, int>> directed, bidirected;
    std::map<std::string, int> index;
    bool have_nodes = false;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      std::istringstream ls(line);
      std::vector<std::string> tok;
      std::string t;
      while (ls >> t) tok.push_back(t);
      if (tok.empty()) continue;
      if (tok[0] == "nodes:") {
        if (have_nodes)
          throw ParseError("line " + std::to_string(line_no) + ": repeated nodes: line");
        have_nodes = true;
        for (size_t k = 1; k < tok.size(); ++k) {
          if (index.count(tok[k]))
            throw ParseError("line " + std::to_string(line_no) + ": duplicate node label '" +
                             tok[k] + "'");
          index[tok[k]] = static_cast<int>(labels.size());
          labels.push_back(tok[k]);
        }
        continue;
      }
      if (!have_nodes)
        throw ParseError("line " + std::to_string(line_no) + ": expected nodes: line first");
      if (tok.size() != 3 || (tok[1] != "->" && tok[1] != "<->"))
        throw ParseError("line " + std::to_string(line_no) + ": malformed edge line");
      auto lookup = [&](const std::string& lbl) {
        auto it = index.find(lbl);
        if (it == index.end())
          throw ParseError("line " + std::to_string(line_no) + ": unknown node label '" + lbl +
                           "'");
        return it->second;
      };
      int a = lookup(tok[0]), b = lookup(tok[2]);
      if (a == b)
        throw ParseError("line " + std::to_string(line_no) + ": self-loop at '" + tok[0] + "'");
      if (tok[1] == "->") {
        if (std::find(directed.begin(), directed.end(), std::make_pair(a, b)) != directed.end())
          throw ParseError("line " + std::to_string(line_no) + ": duplicate edge");
        directed.emplace_back(a, b);
      } else {
        auto canon = std::make_pair(std::min(a, b), std::max(a, b));
        if (std::find(bidirected.begin(), bidirected.end(), canon) != bidirected.end())
          throw ParseError("line " + std::to_string(line_no) + ": duplicate edge");
        bidirected.push_back(canon);
      }
    }
    if (!have_nodes) throw ParseError("missing nodes: line");
    return MixedGraph(std::move(labels), std::move(directed), std::move(bidirected));
  }

  //! Emits the same file format: nodes in declaration order, directed edges
  //! sorted, then bidirected edges sorted.
  std::string serialize() const {
    std::ostringstream out;
    out << "nodes:";
    for (auto& l : labels_) out << ' ' << l;
    out << '\n';
    for (auto& [a, b] : directed_) out << labels_[a] << " -> " << labels_[b] << '\n';
    for (auto& [a, b] : bidirected_) out << labels_[a] << " <-> " << labels_[b] << '\n';
    return out.str();
  }

  int node_count() const { return static_cast<int>(labels_.size()); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(int i) const { return labels_.at(i); }

  int index_of(const std::string& label) const {
    auto it = label_to_index_.find(label);
    return it == label_to_index_.end() ? -1 : it->second;
  }

  int require_node(const std::string& label) const {
    int i = index_of(label);
    if (i < 0) throw GraphError("unknown node label: " + label);
    return i;
  }

  const std::vector<std::pair<int, int>>& directed() const { return directed_; }
  const std::vector<std::pair<int, int>>& bidirected() const { return bidirected_; }

  const std::vector<int>& parents(int i) const { return parents_.at(i); }
  const std::vector<int>& children(int i) const { return children_.at(i); }
  const std::vector<int>& siblings(int i) const { return siblings_.at(i); }

  bool has_directed(int tail, int head) const {
    return std::binary_search(directed_.begin(), directed_.end(), std::make_pair(tail, head));
  }
  bool has_bidirected(int i, int j) const {
    if (i > j) std::swap(i, j);
    return std::binary_search(bidirected_.begin(), bidirected_.end(), std::make_pair(i, j));
  }

 private:
  void check_endpoints(int a, int b, bool bidir) const {
    const int n = static_cast<int>(labels_.size());
    if (a < 0 || a >= n || b < 0 || b >= n) throw GraphError("edge endpoint out of range");
    if (a == b)
      throw GraphError(std::string("self-loop at node ") + labels_[a] +
                       (bidir ? " (bidirected)" : " (directed)"));
  }

  std::vector<std::string> labels_;
  std::map<std::string, int> label_to_index_;
  std::vector<std::pair<int, int>> directed_;
  std::vector<std::pair<int, int>> bidirected_;
  std::vector<std::vector<int>> parents_, children_, siblings_;
};

//! Sinks are defined against the directed part only: every incident directed
//! edge has its head at the node. Sources are tails on all incident edges,
//! where both endpoints of a bidirected edge count as heads.
inline NodeSet sinks(const MixedGraph& g) {
  NodeSet out;
  for (int i = 0; i < g.node_count(); ++i)
    if (g.children(i).empty()) out.push_back(i);
  return out;
}

inline NodeSet sources(const MixedGraph& g) {
  NodeSet out;
  for (int i = 0; i < g.node_count(); ++i)
    if (g.parents(i).empty() && g.siblings(i).empty()) out.push_back(i);
  return out;
}

//! Deterministic topological order of the directed part: repeatedly take the
//! least-index node with no remaining parent. Empty if a directed cycle exists.
inline std::optional<std::vector<int>> topological_order(const MixedGraph& g) {
  const int n = g.node_count();
  std::vector<int> indeg(n, 0);
  for (auto& [a, b] : g.directed()) ++indeg[b];
  std::vector<int> order;
  std::vector<bool> used(n, false);
  for (int step = 0; step < n; ++step) {
    int pick = -1;
    for (int i = 0; i < n; ++i)
      if (!used[i] && indeg[i] == 0) {
        pick = i;
        break;
      }
    if (pick < 0) return std::nullopt;
    used[pick] = true;
    order.push_back(pick);
    for (int c : g.children(pick)) --indeg[c];
  }
  return order;
}

//! Tarjan SCCs of the directed part; blocks sorted internally and listed by
//! least member.
inline std::vector<NodeSet> strongly_connected_components(const MixedGraph& g) {
  const int n = g.node_count();
  std::vector<int> low(n, -1), num(n, -1), stack;
  std::vector<bool> on_stack(n, false);
  std::vector<NodeSet> comps;
  int counter = 0;
  // iterative Tarjan
  struct Frame {
    int v;
    size_t child;
  };
  for (int root = 0; root < n; ++root) {
    if (num[root] >= 0) continue;
    std::vector<Frame> frames{{root, 0}};
    num[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!frames.empty()) {
      Frame& f = frames.back();
      const auto& ch = g.children(f.v);
      if (f.child < ch.size()) {
        int w = ch[f.child++];
        if (num[w] < 0) {
          num[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          frames.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], num[w]);
        }
      } else {
        if (low[f.v] == num[f.v]) {
          NodeSet comp;
          while (true) {
            int w = stack.back();
            stack.pop_back();
            on_stack[w] = false;
            comp.push_back(w);
            if (w == f.v) break;
          }
          std::sort(comp.begin(), comp.end());
          comps.push_back(std::move(comp));
        }
        int v = f.v;
        frames.pop_back();
        if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[v]);
      }
    }
  }
  std::sort(comps.begin(), comps.end(),
            [](const NodeSet& a, const NodeSet& b) { return a.front() < b.front(); });
  return comps;
}

inline std::vector<NodeSet> bidirected_components(const MixedGraph& g) {
  const int n = g.node_count();
  std::vector<int> comp(n, -1);
  std::vector<NodeSet> comps;
  for (int i = 0; i < n; ++i) {
    if (comp[i] >= 0) continue;
    NodeSet cur{i};
    comp[i] = static_cast<int>(comps.size());
    std::vector<int> frontier{i};
    while (!frontier.empty()) {
      int v = frontier.back();
      frontier.pop_back();
      for (int w : g.siblings(v))
        if (comp[w] < 0) {
          comp[w] = comp[i];
          cur.push_back(w);
          frontier.push_back(w);
        }
    }
    std::sort(cur.begin(), cur.end());
    comps.push_back(std::move(cur));
  }
  std::sort(comps.begin(), comps.end(),
            [](const NodeSet& a, const NodeSet& b) { return a.front() < b.front(); });
  return comps;
}

struct GraphProperties {
  bool acyclic = false;
  bool simple = false;
  NodeSet sinks;
  NodeSet sources;
};

inline bool is_simple(const MixedGraph& g) {
  for (auto& [i, j] : g.bidirected())
    if (g.has_directed(i, j) || g.has_directed(j, i)) return false;
  for (auto& [i, j] : g.directed())
    if (g.has_directed(j, i)) return false;
  return true;
}

inline GraphProperties properties(const MixedGraph& g) {
  GraphProperties p;
  p.acyclic = topological_order(g).has_value();
  p.simple = is_simple(g);
  p.sinks = sinks(g);
  p.sources = sources(g);
  return p;
}

//! Smallest ancestral superset of A: add parents until fixpoint.
inline NodeSet ancestral_closure(const MixedGraph& g, NodeSet a) {
  std::vector<bool> in(g.node_count(), false);
  for (int v : a) in.at(v) = true;
  std::vector<int> frontier(a.begin(), a.end());
  while (!frontier.empty()) {
    int v = frontier.back();
    frontier.pop_back();
    for (int p : g.parents(v))
      if (!in[p]) {
        in[p] = true;
        frontier.push_back(p);
      }
  }
  NodeSet out;
  for (int i = 0; i < g.node_count(); ++i)
    if (in[i]) out.push_back(i);
  return out;
}

inline bool is_ancestral(const MixedGraph& g, const NodeSet& a) {
  for (int v : a)
    for (int p : g.parents(v))
      if (!set_contains(a, p)) return false;
  return true;
}

//! Induced subgraph on `keep`: exactly the edges with both endpoints inside.
//! Node labels are preserved; relative order follows the original graph.
inline MixedGraph induced_subgraph(const MixedGraph& g, const NodeSet& keep) {
  std::vector<int> remap(g.node_count(), -1);
  std::vector<std::string> labels;
  for (int v : keep) {
    if (v < 0 || v >= g.node_count()) throw GraphError("induced_subgraph: node out of range");
    remap[v] = static_cast<int>(labels.size());
    labels.push_back(g.label(v));
  }
  std::vector<std::pair<int, int>> dir, bidir;
  for (auto& [a, b] : g.directed())
    if (remap[a] >= 0 && remap[b] >= 0) dir.emplace_back(remap[a], remap[b]);
  for (auto& [a, b] : g.bidirected())
    if (remap[a] >= 0 && remap[b] >= 0) bidir.emplace_back(remap[a], remap[b]);
  return MixedGraph(std::move(labels), std::move(dir), std::move(bidir));
}

inline MixedGraph remove_sinks(const MixedGraph& g) {
  NodeSet all;
  for (int i = 0; i < g.node_count(); ++i) all.push_back(i);
  return induced_subgraph(g, set_minus(all, sinks(g)));
}

//! DOT export; directed edges blue, bidirected red.
inline std::string to_dot(const MixedGraph& g) {
  std::ostringstream out;
  out << "digraph G {\n";
  for (auto& l : g.labels()) out << "  \"" << l << "\";\n";
  for (auto& [a, b] : g.directed())
    out << "  \"" << g.label(a) << "\" -> \"" << g.label(b) << "\" [color=blue];\n";
  for (auto& [a, b] : g.bidirected())
    out << "  \"" << g.label(a) << "\" -> \"" << g.label(b)
        << "\" [color=red, dir=both];\n";
  out << "}\n";
  return out.str();
}

}  // namespace semgraph

#endif
