#include "doctest.h"
#include "example_graphs.hpp"
#include "semgraph/constraints.hpp"

using namespace semgraph;

namespace {

Polynomial term(long coeff, std::vector<Var> vars) {
  return Polynomial::term(rat(coeff), std::move(vars));
}

Var s(int i, int j) { return Var::sigma(i - 1, j - 1); }  // 1-based helper

Polynomial f1() { return term(1, {s(1, 2), s(1, 3)}) + term(-1, {s(1, 1), s(2, 3)}); }

Polynomial f2() {
  return term(1, {s(1, 4), s(2, 3), s(2, 3)}) + term(-1, {s(1, 3), s(2, 3), s(2, 4)}) +
         term(-1, {s(1, 4), s(2, 2), s(3, 3)}) + term(1, {s(1, 2), s(2, 4), s(3, 3)}) +
         term(1, {s(1, 3), s(2, 2), s(3, 4)}) + term(-1, {s(1, 2), s(2, 3), s(3, 4)});
}

Polynomial f_verma() {
  return term(1, {s(1, 1), s(1, 3), s(2, 2), s(3, 4)}) +
         term(-1, {s(1, 1), s(1, 3), s(2, 3), s(2, 4)}) +
         term(-1, {s(1, 1), s(1, 4), s(2, 2), s(3, 3)}) +
         term(1, {s(1, 1), s(1, 4), s(2, 3), s(2, 3)}) +
         term(-1, {s(1, 2), s(1, 2), s(1, 3), s(3, 4)}) +
         term(1, {s(1, 2), s(1, 2), s(1, 4), s(3, 3)}) +
         term(1, {s(1, 2), s(1, 3), s(1, 3), s(2, 4)}) +
         term(-1, {s(1, 2), s(1, 3), s(1, 4), s(2, 3)});
}

bool payload_matches(const Constraint& c, const Polynomial& target, int n_nodes) {
  ScalarMultipleTester tester(n_nodes, 5150);
  return tester.same_up_to_scalar(c.payload, target);
}

}  // namespace

TEST_SUITE_BEGIN("constraints");

TEST_CASE("ci constraints of the diamond DAG expand to f1 and f2 up to sign") {
  auto g = testgraphs::dag_diamond();
  auto cs = ci_constraints(g, 2);
  REQUIRE(cs.size() == 2);
  // deterministic order: (1 _||_ 4 | {2,3}) then (2 _||_ 3 | {1})
  Polynomial p0 = cs[0].payload, p1 = cs[1].payload;
  bool ok0 = (p0 == f2()) || (p0 == -f2());
  bool ok1 = (p1 == f1()) || (p1 == -f1());
  CHECK(ok0);
  CHECK(ok1);
  CHECK(cs[0].kind == ConstraintKind::ci_minor);
}

TEST_CASE("ci constraints: edgeless pair gives sigma12") {
  auto cs = ci_constraints(testgraphs::edgeless(2), 0);
  REQUIRE(cs.size() == 1);
  CHECK(cs[0].payload == Polynomial::variable(Var::sigma(0, 1)));
}

TEST_CASE("ci constraints: Verma graph has none") {
  CHECK(ci_constraints(testgraphs::verma(), 2).empty());
}

TEST_CASE("minor constraints: two-instruments tetrad") {
  auto g = testgraphs::two_instruments();
  auto cs = minor_constraints(g, 3);
  REQUIRE(cs.size() == 1);
  CHECK(cs[0].rows == NodeSet{0, 1});
  CHECK(cs[0].cols == NodeSet{2, 3});
  Polynomial tetrad = term(1, {s(1, 3), s(2, 4)}) + term(-1, {s(1, 4), s(2, 3)});
  bool match = (cs[0].payload == tetrad) || (cs[0].payload == -tetrad);
  CHECK(match);
}

TEST_CASE("minor constraints: spider block reduces to six binding tetrads") {
  // the {1,2,3,4} x {5,6,7} block has rank 2, and rows {1,2} (respectively
  // {3,4}) are already trek-separated from the columns by a single node; the
  // containment dedup therefore keeps the 2x2 tetrads and drops every 3x3
  // minor they imply
  auto g = testgraphs::spider();
  NodeSet rows, cols;
  for (auto l : {"1", "2", "3", "4"}) rows.push_back(g.require_node(l));
  for (auto l : {"5", "6", "7"}) cols.push_back(g.require_node(l));
  auto cs = minor_constraints(g, 3, make_set(rows), make_set(cols));
  REQUIRE(cs.size() == 6);
  NodeSet pair12{g.require_node("1"), g.require_node("2")};
  NodeSet pair34{g.require_node("3"), g.require_node("4")};
  for (auto& c : cs) {
    CHECK(c.rows.size() == 2);
    CHECK(c.cols.size() == 2);
    bool row_ok = (c.rows == make_set(pair12)) || (c.rows == make_set(pair34));
    CHECK(row_ok);
    CHECK(certify_constraint(g, c).certified);
  }
}

TEST_CASE("minor constraints: complete DAG has none") {
  auto complete = MixedGraph::parse("nodes: 1 2 3\n1 -> 2\n1 -> 3\n2 -> 3\n");
  CHECK(minor_constraints(complete, 3).empty());
}

TEST_CASE("verma constraints: the Verma graph yields f_Verma") {
  auto cs = verma_constraints(testgraphs::verma());
  REQUIRE(cs.size() == 1);
  CHECK(cs[0].payload == f_verma());
  CHECK(payload_matches(cs[0], f_verma(), 4));
}

TEST_CASE("verma constraints: the five-node graph yields the CI minor and f_Verma") {
  auto g = testgraphs::verma_sink();
  auto all = discover_constraints(g);
  bool found_ci = false, found_verma = false;
  Polynomial ci = term(1, {s(1, 2), s(1, 5)}) + term(-1, {s(1, 1), s(2, 5)});
  ScalarMultipleTester tester(5, 5150);
  for (auto& c : all) {
    if (tester.same_up_to_scalar(c.payload, ci)) found_ci = true;
    if (tester.same_up_to_scalar(c.payload, f_verma())) found_verma = true;
  }
  CHECK(found_ci);
  CHECK(found_verma);
  for (auto& c : all) {
    CHECK(c.certification.ran);
    CHECK(c.certification.certified);
  }
}

TEST_CASE("verma pass adds nothing beyond CI on the diamond DAG") {
  auto g = testgraphs::dag_diamond();
  DiscoveryOptions opt;
  opt.run_certify = false;
  auto all = discover_constraints(g, opt);
  CHECK(all.size() == 2);
  for (auto& c : all) CHECK(c.kind == ConstraintKind::ci_minor);
}

TEST_CASE("verma constraints reject cyclic graphs") {
  CHECK_THROWS_AS(verma_constraints(testgraphs::three_cycle()), GraphError);
}

TEST_CASE("certification accepts true constraints and rejects false ones") {
  auto verma = testgraphs::verma();
  Constraint good;
  good.kind = ConstraintKind::verma;
  good.payload = f_verma();
  auto rec = certify_constraint(verma, good);
  CHECK(rec.certified);
  CHECK(rec.on_model_max_rel < 1e-8);
  CHECK(rec.off_model_nonzero == rec.off_model_trials);

  auto chain = testgraphs::single_edge();
  Constraint bad;
  bad.kind = ConstraintKind::ci_minor;
  bad.payload = Polynomial::variable(Var::sigma(0, 1));
  CHECK_FALSE(certify_constraint(chain, bad).certified);

  Constraint f1c;
  f1c.kind = ConstraintKind::ci_minor;
  f1c.payload = f1();
  CHECK(certify_constraint(testgraphs::dag_diamond(), f1c).certified);
}

TEST_CASE("every discovered constraint certifies (property)") {
  for (auto g : {testgraphs::two_instruments(), testgraphs::dag_diamond(),
                 testgraphs::verma()}) {
    for (auto& c : discover_constraints(g)) {
      CHECK(c.certification.ran);
      CHECK_MESSAGE(c.certification.certified, c.provenance);
    }
  }
}

TEST_CASE("ancestral set enumeration is capped and largest-first") {
  auto g = testgraphs::verma();
  auto sets = enumerate_ancestral_sets(g);
  REQUIRE(!sets.empty());
  CHECK(sets[0] == NodeSet{0, 1, 2, 3});
  for (size_t k = 1; k < sets.size(); ++k) CHECK(sets[k - 1].size() >= sets[k].size());
  for (auto& a : sets) CHECK(is_ancestral(g, a));
}

TEST_SUITE_END();
