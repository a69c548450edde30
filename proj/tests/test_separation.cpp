#include "doctest.h"
#include "example_graphs.hpp"
#include "semgraph/separation.hpp"

using namespace semgraph;

TEST_SUITE_BEGIN("separation");

TEST_CASE("d-separation on the example graphs") {
  auto g5 = testgraphs::verma_sink();
  CHECK(d_separated(g5, 1, 4, {0}));        // 2 and 5 d-separated by 1
  CHECK_FALSE(d_separated(g5, 1, 4, {}));   // the trek 2 <- 1 <-> 5 connects them

  auto dag = testgraphs::dag_diamond();
  CHECK(d_separated(dag, 1, 2, {0}));       // 2 and 3 given 1
  CHECK_FALSE(d_separated(dag, 1, 2, {0, 3}));  // conditioning on the collider 4

  auto verma = testgraphs::verma();
  CHECK_FALSE(d_separated(verma, 0, 3, {2}));  // walk 1 -> 3 <- 2 <-> 4
}

TEST_CASE("d-separation argument checks and symmetry") {
  auto g = testgraphs::verma();
  CHECK_THROWS_AS(d_separated(g, 0, 0, {}), GraphError);
  CHECK_THROWS_AS(d_separated(g, 0, 1, {1}), GraphError);
  auto rng = rng_for(55);
  for (int t = 0; t < 30; ++t) {
    auto h = testgraphs::random_graph(5, rng);
    std::uniform_int_distribution<int> pick(0, 4);
    int i = pick(rng), j = pick(rng);
    if (i == j) continue;
    NodeSet s;
    for (int v = 0; v < 5; ++v)
      if (v != i && v != j && pick(rng) < 2) s.push_back(v);
    CHECK(d_separated(h, i, j, s) == d_separated(h, j, i, s));
  }
}

TEST_CASE("ci_statements on the diamond DAG") {
  auto statements = ci_statements(testgraphs::dag_diamond(), 2);
  REQUIRE(statements.size() == 2);
  CHECK(statements[0] == CiStatement{0, 3, {1, 2}});  // 1 _||_ 4 | {2,3}
  CHECK(statements[1] == CiStatement{1, 2, {0}});     // 2 _||_ 3 | {1}
}

TEST_CASE("ci_statements: complete DAG and Verma graph have none") {
  auto complete = MixedGraph::parse("nodes: 1 2 3\n1 -> 2\n1 -> 3\n2 -> 3\n");
  CHECK(ci_statements(complete, 1).empty());
  CHECK(ci_statements(testgraphs::verma(), 2).empty());
}

TEST_CASE("trek separation: two instruments") {
  auto cert = trek_separation_rank(testgraphs::two_instruments(), {0, 1}, {2, 3});
  CHECK(cert.rank == 1);
  CHECK(cert.s_a.empty());
  CHECK(cert.s_c == NodeSet{2});
  CHECK(verify_trek_certificate(testgraphs::two_instruments(), cert));
}

TEST_CASE("trek separation: spider graph") {
  auto g = testgraphs::spider();
  NodeSet a, c;
  for (auto l : {"1", "2", "3", "4"}) a.push_back(g.require_node(l));
  for (auto l : {"5", "6", "7"}) c.push_back(g.require_node(l));
  a = make_set(a);
  c = make_set(c);
  auto cert = trek_separation_rank(g, a, c);
  CHECK(cert.rank == 2);
  CHECK(verify_trek_certificate(g, cert));
}

TEST_CASE("trek separation: trivial trek forces rank 1 on A = C = {i}") {
  auto g = testgraphs::verma();
  for (int i = 0; i < 4; ++i) {
    auto cert = trek_separation_rank(g, {i}, {i});
    CHECK(cert.rank == 1);
    CHECK(cert.s_a.size() + cert.s_c.size() == 1);
  }
  CHECK_THROWS_AS(trek_separation_rank(g, {}, {0}), GraphError);
}

TEST_CASE("generic rank oracle on the named graphs") {
  CHECK(generic_rank_numeric(testgraphs::two_instruments(), {0, 1}, {2, 3}) == 1);
  auto g = testgraphs::spider();
  NodeSet a, c, all;
  for (auto l : {"1", "2", "3", "4"}) a.push_back(g.require_node(l));
  for (auto l : {"5", "6", "7"}) c.push_back(g.require_node(l));
  for (int i = 0; i < g.node_count(); ++i) all.push_back(i);
  CHECK(generic_rank_numeric(g, make_set(a), make_set(c)) == 2);
  CHECK(generic_rank_numeric(g, all, all) == g.node_count());
}

TEST_CASE("min-cut rank equals the numeric generic rank on all subset pairs") {
  for (auto g : {testgraphs::verma(), testgraphs::two_instruments(),
                 testgraphs::cyclic_two_instruments()}) {
    int n = g.node_count();
    for (unsigned ma = 1; ma < (1u << n); ++ma)
      for (unsigned mc = ma; mc < (1u << n); ++mc) {
        NodeSet a, c;
        for (int v = 0; v < n; ++v) {
          if (ma & (1u << v)) a.push_back(v);
          if (mc & (1u << v)) c.push_back(v);
        }
        auto cert = trek_separation_rank(g, a, c);
        CHECK(cert.rank == generic_rank_numeric(g, a, c));
        CHECK(static_cast<int>(cert.s_a.size() + cert.s_c.size()) == cert.rank);
      }
  }
}

TEST_CASE("min-cut certificates verify by trek enumeration on random acyclic graphs") {
  auto rng = rng_for(66);
  for (int t = 0; t < 20; ++t) {
    auto g = testgraphs::random_graph(4, rng, 0.4, 0.3, true);
    for (unsigned ma = 1; ma < 16u; ++ma)
      for (unsigned mc = 1; mc < 16u; ++mc) {
        NodeSet a, c;
        for (int v = 0; v < 4; ++v) {
          if (ma & (1u << v)) a.push_back(v);
          if (mc & (1u << v)) c.push_back(v);
        }
        auto cert = trek_separation_rank(g, a, c);
        CHECK(verify_trek_certificate(g, cert));
      }
  }
}

TEST_CASE("d-separation as a rank statement") {
  auto rng = rng_for(77);
  for (int t = 0; t < 25; ++t) {
    auto g = testgraphs::random_graph(5, rng);
    std::uniform_int_distribution<int> pick(0, 4);
    int i = pick(rng), j = pick(rng);
    if (i == j) continue;
    NodeSet s;
    for (int v = 0; v < 5; ++v)
      if (v != i && v != j && pick(rng) < 2) s.push_back(v);
    NodeSet a = make_set(set_union({i}, s)), c = make_set(set_union({j}, s));
    bool dsep = d_separated(g, i, j, s);
    bool rank_drop = trek_separation_rank(g, a, c).rank <= static_cast<int>(s.size());
    CHECK(dsep == rank_drop);
  }
}

TEST_CASE("d-separations vanish on the model; d-connections do not") {
  auto rng = rng_for(88);
  auto g = testgraphs::verma_sink();
  for (int i = 0; i < 5; ++i)
    for (int j = i + 1; j < 5; ++j) {
      NodeSet others;
      for (int v = 0; v < 5; ++v)
        if (v != i && v != j) others.push_back(v);
      for (unsigned mask = 0; mask < 8u; ++mask) {
        NodeSet s;
        for (int b = 0; b < 3; ++b)
          if (mask & (1u << b)) s.push_back(others[b]);
        CiStatement st{i, j, s};
        Polynomial minor = ci_minor(st);
        if (d_separated(g, i, j, s)) {
          for (std::uint64_t seed = 0; seed < 10; ++seed) {
            ParamPoint p = sample_params(g, seed);
            FloatMatrix sigma = phi_numeric(g, p);
            std::map<Var, double> a;
            for (int r = 0; r < 5; ++r)
              for (int c = r; c < 5; ++c) a[Var::sigma(r, c)] = sigma(r, c);
            double val = std::abs(minor.eval_double(a));
            double scale = std::max(minor.eval_double_abs(a), 1.0);
            CHECK(val < 1e-9 * scale);
          }
        } else {
          bool nonzero = false;
          for (int tries = 0; tries < 3 && !nonzero; ++tries) {
            QMatrix sigma = phi_exact_at_random_point(g, rng);
            VarAssignment a;
            for (int r = 0; r < 5; ++r)
              for (int c = r; c < 5; ++c) a[Var::sigma(r, c)] = sigma[r][c];
            nonzero = !is_zero(minor.eval(a));
          }
          CHECK(nonzero);
        }
      }
    }
}

TEST_SUITE_END();
