// SPDX-License-Identifier: Apache-2.0
#include <set>

#include <gtest/gtest.h>

#include "eixgnn/explain.hpp"
#include "eixgnn/toy.hpp"
#include "test_support.hpp"

using namespace eixgnn;
using namespace testing_support;

namespace {

ShapleyResult values(std::vector<double> v) {
  ShapleyResult r;
  r.values = Eigen::Map<Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
  r.std_error = Vector::Zero(r.values.size());
  return r;
}

ExplainConfig small_config(std::uint64_t seed, std::size_t workers = 1) {
  ExplainConfig cfg;
  cfg.L = 6;
  cfg.p = 0.3;
  cfg.seed = seed;
  cfg.shapley_samples = 200;
  cfg.workers = workers;
  return cfg;
}

} // namespace

TEST(AssembleXbar, SingleWholeGraphConcept) {
  const auto g = path(4);
  const std::vector<Subgraph> cs{induced_subgraph(g, {0, 1, 2, 3})};
  const auto xbar = assemble_xbar(4, cs, {values({0.1, -0.2, 0.3, 0.4})});
  ASSERT_EQ(xbar.cols(), 1);
  EXPECT_EQ(xbar.col(0), (Vector(4) << 0.1, -0.2, 0.3, 0.4).finished());
}

TEST(AssembleXbar, ScatterWithOverlapAndGaps) {
  const auto g = path(6);
  const std::vector<Subgraph> cs{induced_subgraph(g, {0, 2}),
                                 induced_subgraph(g, {2, 3, 5})};
  const auto xbar =
      assemble_xbar(6, cs, {values({1.0, 2.0}), values({3.0, 4.0, 5.0})});
  Matrix want = Matrix::Zero(6, 2);
  want(0, 0) = 1.0;
  want(2, 0) = 2.0;
  want(2, 1) = 3.0;
  want(3, 1) = 4.0;
  want(5, 1) = 5.0;
  EXPECT_EQ(xbar, want);
  EXPECT_EQ(xbar.row(1), Vector::Zero(2).transpose());
  EXPECT_EQ(xbar.row(4), Vector::Zero(2).transpose());
}

TEST(AssembleXbar, LengthMismatches) {
  const auto g = path(4);
  const std::vector<Subgraph> cs{induced_subgraph(g, {0, 1}),
                                 induced_subgraph(g, {2, 3})};
  EXPECT_THROW(assemble_xbar(4, cs, {values({1, 2})}), ShapeMismatch);
  EXPECT_THROW(assemble_xbar(4, cs, {values({1, 2}), values({1})}),
               ShapeMismatch);
}

TEST(WeightByCentrality, RowsAndProjection) {
  Matrix xbar(3, 2);
  xbar << 0.2, 0.0, -0.1, 0.7, 0.0, 0.3;
  const Vector r = (Vector(2) << 0.25, 0.75).finished();
  const auto [xi, rel] = weight_by_centrality(xbar, r);
  ASSERT_EQ(xi.rows(), 2);
  ASSERT_EQ(xi.cols(), 3);
  for (Eigen::Index l = 0; l < 2; ++l)
    for (Eigen::Index n = 0; n < 3; ++n)
      EXPECT_EQ(xi(l, n), r(l) * xbar(n, l));
  for (Eigen::Index n = 0; n < 3; ++n)
    EXPECT_EQ(rel(n), xi(0, n) + xi(1, n));
  EXPECT_THROW(weight_by_centrality(xbar, Vector::Ones(3)), ShapeMismatch);
}

TEST(WeightByCentrality, LinearInR) {
  Matrix xbar = Matrix::Random(7, 4);
  const Vector r = (Vector(4) << 0.1, 0.2, 0.3, 0.4).finished();
  const auto [xi, rel] = weight_by_centrality(xbar, r);
  const auto [xi2, rel2] = weight_by_centrality(xbar, 2.5 * r);
  EXPECT_LT((xi2 - 2.5 * xi).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((rel2 - 2.5 * rel).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Explain, DefaultsMatchBenchmarkSetting) {
  const ExplainConfig cfg;
  EXPECT_EQ(cfg.L, 15u);
  EXPECT_DOUBLE_EQ(cfg.p, 0.2);
  EXPECT_EQ(cfg.shapley_exact_max, 12u);
  EXPECT_DOUBLE_EQ(cfg.damping, 1e-3);
}

TEST(Explain, TwoFullConceptsTrace) {
  const auto m = toy::random_model({}, 40);
  Matrix x(4, 3);
  x << 1, 0.5, 0.1, 1, 0.75, -0.3, 1, 0.5, 0.8, 1, 0.25, 0.0;
  const Graph g(4, {{0, 1}, {1, 2}, {1, 3}}, x);
  ExplainConfig cfg;
  cfg.L = 2;
  cfg.p = 1.0;
  cfg.seed = 9;
  const auto ex = explain(m, g, cfg);

  // Hand-assembled trace: both concepts are the whole graph, K_L has zero
  // weights, both rows are repaired, r is uniform.
  EXPECT_EQ(ex.concepts, (std::vector<std::vector<std::size_t>>{{0, 1, 2, 3},
                                                                {0, 1, 2, 3}}));
  EXPECT_EQ(ex.meta.concept_graph.repaired_rows,
            (std::vector<std::size_t>{0, 1}));
  EXPECT_NEAR(ex.r(0), 0.5, 1e-12);
  EXPECT_NEAR(ex.r(1), 0.5, 1e-12);

  const Vector full = oracle_forward(m, g);
  Eigen::Index y = 0;
  full.maxCoeff(&y);
  const auto edges = edge_pairs(g);
  const oracle::Game v = [&](std::uint64_t s) {
    Matrix masked = x;
    for (Eigen::Index i = 0; i < 4; ++i)
      if (!((s >> i) & 1))
        masked.row(i).setZero();
    return oracle_forward(m, 4, edges, false, masked)(y);
  };
  const auto nu = oracle::shapley_all_orderings(4, v);
  for (Eigen::Index n = 0; n < 4; ++n) {
    EXPECT_NEAR(ex.xbar(n, 0), nu[static_cast<std::size_t>(n)], 1e-12);
    EXPECT_NEAR(ex.xbar(n, 1), nu[static_cast<std::size_t>(n)], 1e-12);
    EXPECT_NEAR(ex.node_relevance(n), nu[static_cast<std::size_t>(n)], 1e-12);
  }
  EXPECT_EQ(ex.meta.target_class, static_cast<std::size_t>(y));
}

TEST(Explain, ShapesAndInvariants) {
  for (int seed = 0; seed < 8; ++seed) {
    const auto m = toy::random_model({}, seed);
    const auto g = toy::random_graph(12 + seed, 0.25, 3, seed);
    const auto cfg = small_config(seed);
    const auto ex = explain(m, g, cfg);
    const auto N = static_cast<Eigen::Index>(g.num_nodes());
    ASSERT_EQ(ex.xi.rows(), 6);
    ASSERT_EQ(ex.xi.cols(), N);
    ASSERT_EQ(ex.node_relevance.size(), N);
    ASSERT_EQ(ex.xbar.rows(), N);
    ASSERT_EQ(ex.concepts.size(), 6u);
    EXPECT_NEAR(ex.r.sum(), 1.0, 1e-12);

    std::set<std::size_t> covered;
    for (std::size_t l = 0; l < 6; ++l) {
      const std::set<std::size_t> members(ex.concepts[l].begin(),
                                          ex.concepts[l].end());
      covered.insert(members.begin(), members.end());
      for (Eigen::Index n = 0; n < N; ++n) {
        const auto ll = static_cast<Eigen::Index>(l);
        if (!members.count(static_cast<std::size_t>(n))) {
          EXPECT_EQ(ex.xbar(n, ll), 0.0);
        }
        EXPECT_EQ(ex.xi(ll, n), ex.r(ll) * ex.xbar(n, ll));
      }
    }
    for (Eigen::Index n = 0; n < N; ++n) {
      double col = 0.0;
      for (Eigen::Index l = 0; l < 6; ++l)
        col += ex.xi(l, n);
      EXPECT_EQ(ex.node_relevance(n), col);
      if (!covered.count(static_cast<std::size_t>(n))) {
        EXPECT_EQ(ex.node_relevance(n), 0.0);
      }
    }
    EXPECT_EQ(ex.meta.concept_size, concept_size(g.num_nodes(), 0.3));
    EXPECT_EQ(ex.meta.shapley_methods.size(), 6u);
    EXPECT_LT(ex.meta.concept_graph.residual, 1e-8);
  }
}

TEST(Explain, MonteCarloBranchIsUsedForLargeConcepts) {
  const auto m = toy::random_model({}, 2);
  const auto g = toy::random_graph(30, 0.15, 3, 2);
  ExplainConfig cfg = small_config(4);
  cfg.L = 3;
  cfg.p = 0.5;
  cfg.shapley_samples = 50;
  const auto ex = explain(m, g, cfg);
  for (auto mth : ex.meta.shapley_methods)
    EXPECT_EQ(mth, ShapleyMethod::monte_carlo);
}

TEST(Explain, DeterministicAcrossRunsAndWorkers) {
  const auto m = toy::random_model({}, 3);
  const auto g = toy::random_graph(20, 0.2, 3, 3);
  auto cfg = small_config(11);
  cfg.p = 0.7; // 14-node concepts exercise the Monte-Carlo branch too
  const auto a = explanation_to_json(explain(m, g, cfg)).dump();
  const auto b = explanation_to_json(explain(m, g, cfg)).dump();
  cfg.workers = 4;
  const auto c = explanation_to_json(explain(m, g, cfg)).dump();
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
  cfg.seed = 12;
  EXPECT_NE(a, explanation_to_json(explain(m, g, cfg)).dump());
}

TEST(Explain, FailingStageIsNamed) {
  const auto m = toy::random_model({}, 3);
  const auto g = toy::random_graph(4, 0.5, 3, 3);
  ExplainConfig cfg;
  cfg.p = 0.2; // floor(4 * 0.2) = 0
  try {
    explain(m, g, cfg);
    FAIL();
  } catch (const StageError &e) {
    EXPECT_EQ(e.stage(), "concepts");
    EXPECT_NE(std::string(e.what()).find("[concepts]"), std::string::npos);
  }
  const auto wide = toy::random_graph(6, 0.5, 2, 3);
  try {
    explain(m, wide, small_config(0));
    FAIL();
  } catch (const StageError &e) {
    EXPECT_EQ(e.stage(), "predict");
  }
}

TEST(ExplanationJson, LayoutAndRoundTrip) {
  const auto m = toy::random_model({}, 5);
  const auto g = toy::random_graph(10, 0.3, 3, 5);
  const auto ex = explain(m, g, small_config(2));
  const auto j = explanation_to_json(ex);
  for (const char *k : {"xi", "node_relevance", "r", "concepts", "meta"})
    EXPECT_TRUE(j.contains(k)) << k;
  for (const char *k : {"seed", "L", "p", "concept_size", "target_class",
                        "prior_uniform_fallback", "damping", "repaired_rows",
                        "density_floored", "eigencentrality", "shapley"})
    EXPECT_TRUE(j["meta"].contains(k)) << k;
  EXPECT_FALSE(j["meta"].contains("timings"));
  const auto jt = explanation_to_json(ex, true);
  ASSERT_TRUE(jt["meta"].contains("timings"));
  for (const char *k :
       {"predict", "prior", "concepts", "global-order", "local-order", "assemble"})
    EXPECT_TRUE(jt["meta"]["timings"].contains(k)) << k;

  const auto dir = temp_dir("explain");
  json_util::write_file(dir / "e.json", j);
  const auto back = load_explanation(dir / "e.json");
  EXPECT_EQ(back.node_relevance, ex.node_relevance);
  EXPECT_EQ(back.xi, ex.xi);
  EXPECT_EQ(back.r, ex.r);
  EXPECT_EQ(back.concepts, ex.concepts);
  std::filesystem::remove_all(dir);
}
