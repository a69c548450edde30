#include "doctest.h"
#include "example_graphs.hpp"
#include "semgraph/numerics.hpp"
#include "semgraph/parametrization.hpp"

using namespace semgraph;

TEST_SUITE_BEGIN("numerics");

TEST_CASE("sample_params: diagonal Omega without bidirected edges") {
  auto g = testgraphs::dag_diamond();
  ParamPoint p = sample_params(g, 5);
  for (int i = 0; i < 4; ++i) {
    CHECK(p.omega(i, i) > 0);
    for (int j = 0; j < 4; ++j)
      if (i != j) CHECK(p.omega(i, j) == 0.0);
  }
  std::string why;
  CHECK(validate_param_point(g, p, &why));
}

TEST_CASE("sample_params: reproducible bitwise for a fixed seed") {
  auto g = testgraphs::tian();
  ParamPoint a = sample_params(g, 99), b = sample_params(g, 99);
  for (int i = 0; i < g.node_count(); ++i)
    for (int j = 0; j < g.node_count(); ++j) {
      CHECK(a.lambda(i, j) == b.lambda(i, j));
      CHECK(a.omega(i, j) == b.omega(i, j));
    }
}

TEST_CASE("sample_params: cyclic draws stay below spectral radius 0.9") {
  auto g = testgraphs::cyclic_two_instruments();
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    ParamPoint p = sample_params(g, seed);
    CHECK(spectral_radius_estimate(p.lambda) < 0.9);
    std::string why;
    CHECK_MESSAGE(validate_param_point(g, p, &why), why);
  }
}

TEST_CASE("sample_params: validator across graphs and seeds") {
  for (auto g : {testgraphs::verma(), testgraphs::htc_gap_a(), testgraphs::spider(),
                 testgraphs::verma_sink()})
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      std::string why;
      CHECK_MESSAGE(validate_param_point(g, sample_params(g, seed), &why), why);
    }
}

TEST_CASE("block_ldl: identity input") {
  FloatMatrix s = FloatMatrix::identity(4);
  BlockLdl f = block_ldl(s, {{0, 1}, {2}, {3}});
  CHECK(f.a.max_abs() == 0.0);
  CHECK((f.delta - s).max_abs() == 0.0);
}

TEST_CASE("block_ldl: singleton blocks in topological order reproduce Lambda on a DAG") {
  auto g = testgraphs::dag_diamond();
  ParamPoint p = sample_params(g, 11);
  FloatMatrix sigma = phi_numeric(g, p);
  std::vector<NodeSet> blocks;
  auto topo = topological_order(g);
  for (int v : *topo) blocks.push_back({v});
  BlockLdl f = block_ldl(sigma, blocks);
  CHECK((f.a - p.lambda).max_abs() < 1e-9);
  CHECK((f.delta - p.omega).max_abs() < 1e-9);
}

TEST_CASE("block_ldl: coarser block-diagonal sparsity is inherited") {
  // S block-diagonal over {0,1} and {2,3}: A keeps the zero blocks
  auto rng = rng_for(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  FloatMatrix root(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if ((i < 2) == (j < 2)) root(i, j) = u(rng);
  FloatMatrix s = root * root.transpose();
  for (int i = 0; i < 4; ++i) s(i, i) += 2.0;
  BlockLdl f = block_ldl(s, {{0}, {1}, {2}, {3}});
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if ((i < 2) != (j < 2)) CHECK(f.a(i, j) == 0.0);
}

TEST_CASE("block_ldl: reconstruction and PD failure") {
  auto g = testgraphs::tian();
  ParamPoint p = sample_params(g, 21);
  FloatMatrix sigma = phi_numeric(g, p);
  BlockLdl f = block_ldl(sigma, {{0, 1, 2}, {3, 4}});
  CHECK((block_ldl_reconstruct(f) - sigma).max_abs() < 1e-9 * sigma.max_abs());
  // strictly block-upper-triangular in the block order
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      bool upper = (i < 3 && j >= 3);
      if (!upper) CHECK(f.a(i, j) == 0.0);
    }
  FloatMatrix not_pd(2, 2);
  not_pd(0, 0) = 1;
  not_pd(1, 1) = -1;
  CHECK_THROWS_AS(block_ldl(not_pd, {{0}, {1}}), DecompositionError);
}

TEST_CASE("newton_fiber_solve: starting at the truth returns the truth") {
  auto g = testgraphs::two_instruments();
  ParamPoint p = sample_params(g, 31);
  FloatMatrix sigma = phi_numeric(g, p);
  auto sol = newton_fiber_solve(g, sigma, p.lambda);
  REQUIRE(sol.has_value());
  CHECK((*sol - p.lambda).max_abs() < 1e-8);
}

TEST_CASE("newton_fiber_solve: returned points satisfy the fiber equations") {
  auto g = testgraphs::three_cycle();
  ParamPoint p = sample_params(g, 33);
  FloatMatrix sigma = phi_numeric(g, p);
  auto rng = rng_for(34);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  int found = 0;
  for (int k = 0; k < 40; ++k) {
    FloatMatrix start(3, 3);
    for (auto& [i, j] : g.directed()) start(i, j) = u(rng);
    auto sol = newton_fiber_solve(g, sigma, start);
    if (!sol) continue;
    ++found;
    OmegaRecovery om = recover_omega(g, *sol, sigma);
    CHECK(om.off_support_max < 1e-8);
    // recovered point maps back to sigma
    FloatMatrix omega = om.omega;
    ParamPoint q{*sol, omega};
    CHECK((phi_numeric(g, q) - sigma).max_abs() < 1e-6 * sigma.max_abs());
  }
  CHECK(found > 0);
}

TEST_CASE("multistart on the 3-cycle clusters to exactly two points") {
  auto g = testgraphs::three_cycle();
  ParamPoint p = sample_params(g, 35);
  FloatMatrix sigma = phi_numeric(g, p);
  std::vector<FloatMatrix> sols;
  for (int k = 0; k < 200; ++k) {
    auto rng = rng_for(36, k);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double radius = 0.5 * (1 << (k % 4));
    FloatMatrix start(3, 3);
    for (auto& [i, j] : g.directed()) start(i, j) = radius * u(rng);
    auto sol = newton_fiber_solve(g, sigma, start);
    if (sol) sols.push_back(*sol);
  }
  CHECK(cluster_solutions(sols).size() == 2);
}

TEST_CASE("multistart on a simple acyclic graph clusters to one point") {
  auto g = testgraphs::two_instruments();
  ParamPoint p = sample_params(g, 37);
  FloatMatrix sigma = phi_numeric(g, p);
  std::vector<FloatMatrix> sols;
  for (int k = 0; k < 60; ++k) {
    auto rng = rng_for(38, k);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    FloatMatrix start(4, 4);
    for (auto& [i, j] : g.directed()) start(i, j) = u(rng);
    auto sol = newton_fiber_solve(g, sigma, start);
    if (sol) sols.push_back(*sol);
  }
  CHECK(cluster_solutions(sols).size() == 1);
}

TEST_CASE("matrix file round trip") {
  FloatMatrix m(2, 3);
  m(0, 0) = 1.5;
  m(1, 2) = -0.25;
  FloatMatrix back = FloatMatrix::parse(m.serialize());
  CHECK((back - m).max_abs() == 0.0);
  CHECK_THROWS_AS(FloatMatrix::parse("not a matrix"), ParseError);
}

TEST_SUITE_END();
