// Builds the four-node graph with edges 1->2, 1->3, 2->3, 3->4 and 2<->4,
// prints its covariance parametrization entry by entry, decomposes it into
// mixed components, and derives the quartic constraint its covariance
// matrices satisfy.

#include <iostream>

#include "semgraph/constraints.hpp"
#include "semgraph/decomposition.hpp"
#include "semgraph/parametrization.hpp"

using namespace semgraph;

int main() {
  auto g = MixedGraph::parse(
      "nodes: 1 2 3 4\n1 -> 2\n1 -> 3\n2 -> 3\n3 -> 4\n2 <-> 4\n");
  std::cout << "graph:\n" << g.serialize() << "\n";

  auto phi = phi_symbolic(g);
  std::cout << "sigma[2,4] = " << phi.entry(1, 3).to_string() << "\n";
  std::cout << "treks behind that entry:\n";
  for (const Trek& t : list_treks(g, 1, 3))
    std::cout << "  " << t.describe(g) << "  ->  " << trek_monomial(t).to_string() << "\n";

  auto d = mixed_components(g);
  std::cout << "\nmixed components:\n";
  for (auto& comp : d.components) {
    std::cout << "block {";
    for (size_t k = 0; k < comp.block.size(); ++k)
      std::cout << (k ? "," : "") << g.label(comp.block[k]);
    std::cout << "}:\n" << comp.graph.serialize();
  }

  std::cout << "\nconstraints on the covariance matrix:\n";
  for (const Constraint& c : discover_constraints(g))
    std::cout << "  [" << to_string(c.kind) << "] " << c.payload.to_string() << "\n";
  return 0;
}
