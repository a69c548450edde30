#include "doctest.h"
#include "example_graphs.hpp"
#include "semgraph/decomposition.hpp"
#include "semgraph/constraints.hpp"

using namespace semgraph;

TEST_SUITE_BEGIN("decomposition");

TEST_CASE("mixed components of the example graph") {
  auto g = testgraphs::tian();
  auto d = mixed_components(g);
  REQUIRE(d.blocks.size() == 2);
  CHECK(d.blocks[0] == NodeSet{0, 3});        // {1,4}
  CHECK(d.blocks[1] == NodeSet{1, 2, 4});     // {2,3,5}
  CHECK(d.components[0].vertex_set == NodeSet{0, 1, 2, 3});
  CHECK(d.components[0].graph.serialize() ==
        "nodes: 1 2 3 4\n2 -> 4\n3 -> 4\n1 <-> 4\n");
  CHECK(d.components[1].vertex_set == NodeSet{0, 1, 2, 3, 4});
  CHECK(d.components[1].graph.serialize() ==
        "nodes: 1 2 3 4 5\n1 -> 2\n1 -> 3\n2 -> 3\n2 -> 5\n3 -> 2\n4 -> 5\n2 <-> 5\n");
}

TEST_CASE("mixed components: DAG with empty bidirected part") {
  auto g = testgraphs::dag_diamond();
  auto d = mixed_components(g);
  REQUIRE(d.blocks.size() == 4);
  for (int i = 0; i < 4; ++i) CHECK(d.blocks[i] == NodeSet{i});
  // each component is the node with its parents
  CHECK(d.components[3].vertex_set == NodeSet{1, 2, 3});
  CHECK(d.components[3].graph.serialize() == "nodes: 2 3 4\n2 -> 4\n3 -> 4\n");
}

TEST_CASE("mixed components of the Verma graph") {
  auto d = mixed_components(testgraphs::verma());
  REQUIRE(d.blocks.size() == 3);
  CHECK(d.blocks[0] == NodeSet{0});
  CHECK(d.blocks[1] == NodeSet{1, 3});
  CHECK(d.blocks[2] == NodeSet{2});
  CHECK(d.components[1].graph.serialize() ==
        "nodes: 1 2 3 4\n1 -> 2\n3 -> 4\n2 <-> 4\n");
}

TEST_CASE("edge sets are partitioned across components") {
  auto rng = rng_for(31);
  for (int t = 0; t < 40; ++t) {
    auto g = testgraphs::random_graph(3 + t % 5, rng);
    auto d = mixed_components(g);
    size_t dir = 0, bidir = 0;
    for (auto& comp : d.components) {
      dir += comp.graph.directed().size();
      bidir += comp.graph.bidirected().size();
    }
    CHECK(dir == g.directed().size());
    CHECK(bidir == g.bidirected().size());
  }
}

TEST_CASE("projection matrices of the example graph") {
  auto g = testgraphs::tian();
  ParamPoint p = sample_params(g, 4);
  auto d = mixed_components(g);
  // component over block {1,4}: vertex set {1,2,3,4}
  ParamPoint pi14 = project_component(g, p, d.components[0]);
  CHECK(pi14.lambda(1, 3) == p.lambda(1, 3));  // l24 kept (head in block)
  CHECK(pi14.lambda(2, 3) == p.lambda(2, 3));  // l34 kept
  CHECK(pi14.lambda(0, 1) == 0.0);             // l12 dropped
  CHECK(pi14.omega(0, 0) == p.omega(0, 0));
  CHECK(pi14.omega(0, 3) == p.omega(0, 3));    // w14 kept
  CHECK(pi14.omega(1, 1) == 1.0);              // unit variance at source 2
  CHECK(pi14.omega(2, 2) == 1.0);
  // component over block {2,3,5}: vertex set is all of V
  ParamPoint pi235 = project_component(g, p, d.components[1]);
  CHECK(pi235.omega(0, 0) == 1.0);
  CHECK(pi235.omega(3, 3) == 1.0);
  CHECK(pi235.omega(1, 4) == p.omega(1, 4));   // w25 kept
  CHECK(pi235.lambda(1, 3) == 0.0);            // l24 dropped (head outside block)
  CHECK(pi235.lambda(0, 1) == p.lambda(0, 1));
  std::string why;
  CHECK_MESSAGE(validate_param_point(d.components[0].graph, pi14, &why), why);
  CHECK_MESSAGE(validate_param_point(d.components[1].graph, pi235, &why), why);
}

TEST_CASE("projection is the identity for a single-block graph") {
  auto g = MixedGraph::parse("nodes: 1 2\n1 -> 2\n1 <-> 2\n");
  auto d = mixed_components(g);
  REQUIRE(d.blocks.size() == 1);
  ParamPoint p = sample_params(g, 5);
  ParamPoint pr = project_component(g, p, d.components[0]);
  CHECK((pr.lambda - p.lambda).max_abs() == 0.0);
  CHECK((pr.omega - p.omega).max_abs() == 0.0);
  // and tau is the identity map on Sigma
  FloatMatrix sigma = phi_numeric(g, p);
  CHECK((tian_tau(g, sigma, d.components[0]) - sigma).max_abs() < 1e-9);
}

TEST_CASE("singleton source block projects to ((0),(w_ii))") {
  auto g = testgraphs::verma();
  auto d = mixed_components(g);
  ParamPoint p = sample_params(g, 6);
  ParamPoint pr = project_component(g, p, d.components[0]);  // block {1}
  CHECK(pr.lambda.rows() == 1);
  CHECK(pr.lambda(0, 0) == 0.0);
  CHECK(pr.omega(0, 0) == p.omega(0, 0));
}

TEST_CASE("commuting diagram: tau after phi equals component phi after projection") {
  for (auto g : {testgraphs::verma(), testgraphs::tian(), testgraphs::verma_sink(),
                 testgraphs::cyclic_two_instruments()}) {
    auto d = mixed_components(g);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      ParamPoint p = sample_params(g, seed);
      FloatMatrix sigma = phi_numeric(g, p);
      for (auto& comp : d.components) {
        FloatMatrix lhs = tian_tau(g, sigma, comp);
        FloatMatrix rhs = phi_numeric(comp.graph, project_component(g, p, comp));
        CHECK((lhs - rhs).max_abs() < 1e-8 * std::max(1.0, rhs.max_abs()));
      }
    }
  }
}

TEST_CASE("Verma graph: the (1,4) entry of tau_{2,4} vanishes on the model") {
  auto g = testgraphs::verma();
  auto d = mixed_components(g);
  const MixedComponent& comp = d.components[1];  // block {2,4}
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ParamPoint p = sample_params(g, seed);
    FloatMatrix tau = tian_tau(g, phi_numeric(g, p), comp);
    CHECK(std::abs(tau(0, 3)) < 1e-9 * std::max(1.0, tau.max_abs()));
  }
}

TEST_CASE("tau is invertible: reassembling the components recovers Sigma") {
  for (auto g : {testgraphs::tian(), testgraphs::verma(),
                 testgraphs::cyclic_two_instruments()}) {
    auto d = mixed_components(g);
    ParamPoint p = sample_params(g, 12);
    FloatMatrix sigma = phi_numeric(g, p);
    std::vector<FloatMatrix> taus;
    for (auto& comp : d.components) taus.push_back(tian_tau(g, sigma, comp));
    FloatMatrix back = tian_tau_inverse(g, d, taus);
    CHECK((back - sigma).max_abs() < 1e-9 * std::max(1.0, sigma.max_abs()));
  }
}

TEST_CASE("tau_symbolic: Verma (1,4) numerator is proportional to f_Verma") {
  auto g = testgraphs::verma();
  auto d = mixed_components(g);
  ExactMatrix tau = tau_symbolic(g, d.components[1]);
  Polynomial num = tau.entries[0][3].num();
  num.make_primitive();
  // cross-multiplication test at random rational points
  ScalarMultipleTester tester(4, 2024);
  Polynomial f_verma =
      Polynomial::term(rat(1), {Var::sigma(0, 0), Var::sigma(0, 2), Var::sigma(1, 1), Var::sigma(2, 3)}) +
      Polynomial::term(rat(-1), {Var::sigma(0, 0), Var::sigma(0, 2), Var::sigma(1, 2), Var::sigma(1, 3)}) +
      Polynomial::term(rat(-1), {Var::sigma(0, 0), Var::sigma(0, 3), Var::sigma(1, 1), Var::sigma(2, 2)}) +
      Polynomial::term(rat(1), {Var::sigma(0, 0), Var::sigma(0, 3), Var::sigma(1, 2), Var::sigma(1, 2)}) +
      Polynomial::term(rat(-1), {Var::sigma(0, 1), Var::sigma(0, 1), Var::sigma(0, 2), Var::sigma(2, 3)}) +
      Polynomial::term(rat(1), {Var::sigma(0, 1), Var::sigma(0, 1), Var::sigma(0, 3), Var::sigma(2, 2)}) +
      Polynomial::term(rat(1), {Var::sigma(0, 1), Var::sigma(0, 2), Var::sigma(0, 2), Var::sigma(1, 3)}) +
      Polynomial::term(rat(-1), {Var::sigma(0, 1), Var::sigma(0, 2), Var::sigma(0, 3), Var::sigma(1, 2)});
  CHECK(tester.same_up_to_scalar(num, f_verma));
  CHECK(num == f_verma);  // the reduced numerator is exactly f_Verma
}

TEST_CASE("tau_symbolic: singleton source block gives sigma_ii") {
  auto g = testgraphs::verma();
  auto d = mixed_components(g);
  ExactMatrix tau = tau_symbolic(g, d.components[0]);  // block {1}, no parents
  REQUIRE(tau.rows() == 1);
  CHECK(equal_symbolic(tau.entries[0][0], RationalFunction::from_var(Var::sigma(0, 0))));
}

TEST_CASE("DAG residual-variance recovery: Schur complement over the parents") {
  // on the model, w_ii = sigma_ii - Sigma_{i,pa} Sigma_{pa,pa}^-1 Sigma_{pa,i};
  // the symbolic Schur complement evaluates to the true error variance
  auto g = testgraphs::dag_diamond();
  ExactMatrix spp = exact_zeros(2, 2);
  NodeSet pa{1, 2};
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c)
      spp.entries[r][c] = RationalFunction::from_var(Var::sigma(pa[r], pa[c]));
  std::vector<RationalFunction> spi{RationalFunction::from_var(Var::sigma(1, 3)),
                                    RationalFunction::from_var(Var::sigma(2, 3))};
  auto x = exact_solve(spp, spi);
  RationalFunction schur = RationalFunction::from_var(Var::sigma(3, 3));
  for (int r = 0; r < 2; ++r) schur -= spi[r] * x[r];
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ParamPoint p = sample_params(g, seed);
    FloatMatrix sigma = phi_numeric(g, p);
    std::map<Var, double> a;
    for (int r = 0; r < 4; ++r)
      for (int c = r; c < 4; ++c) a[Var::sigma(r, c)] = sigma(r, c);
    auto v = schur.eval_double(a);
    REQUIRE(v.has_value());
    CHECK(*v == doctest::Approx(p.omega(3, 3)).epsilon(1e-9));
  }
  // tau_symbolic on the singleton component agrees with the component
  // parametrization at model points: the diagonal entry carries the
  // regression terms of the component sources on top of w_44
  auto d = mixed_components(g);
  const MixedComponent& comp = d.components[3];  // block {4}
  ExactMatrix tau = tau_symbolic(g, comp);
  int i_local = comp.local_index(3);
  ParamPoint p = sample_params(g, 13);
  FloatMatrix sigma = phi_numeric(g, p);
  std::map<Var, double> a;
  for (int r = 0; r < 4; ++r)
    for (int c = r; c < 4; ++c) a[Var::sigma(r, c)] = sigma(r, c);
  auto v = tau.entries[i_local][i_local].eval_double(a);
  REQUIRE(v.has_value());
  double expected =
      p.omega(3, 3) + p.lambda(1, 3) * p.lambda(1, 3) + p.lambda(2, 3) * p.lambda(2, 3);
  CHECK(*v == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("tau_symbolic matches tian_tau at random rational points") {
  auto g = testgraphs::verma();
  auto d = mixed_components(g);
  const MixedComponent& comp = d.components[1];
  ExactMatrix tau_sym = tau_symbolic(g, comp);
  ParamPoint p = sample_params(g, 77);
  FloatMatrix sigma = phi_numeric(g, p);
  FloatMatrix tau_num = tian_tau(g, sigma, comp);
  std::map<Var, double> a;
  for (int r = 0; r < 4; ++r)
    for (int c = r; c < 4; ++c) a[Var::sigma(r, c)] = sigma(r, c);
  for (int r = 0; r < tau_sym.rows(); ++r)
    for (int c = 0; c < tau_sym.cols(); ++c) {
      auto v = tau_sym.entries[r][c].eval_double(a);
      REQUIRE(v.has_value());
      CHECK(*v == doctest::Approx(tau_num(r, c)).epsilon(1e-8));
    }
}

TEST_CASE("tau_symbolic rejects cyclic graphs") {
  auto g = testgraphs::cyclic_two_instruments();
  auto d = mixed_components(g);
  CHECK_THROWS_AS(tau_symbolic(g, d.components[0]), GraphError);
}

TEST_SUITE_END();
