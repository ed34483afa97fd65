// SPDX-License-Identifier: Apache-2.0
#include <fstream>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "eixgnn/graph.hpp"
#include "eixgnn/graph_io.hpp"
#include "eixgnn/toy.hpp"
#include "test_support.hpp"

using namespace eixgnn;
using namespace testing_support;

TEST(InducedSubgraph, PairOfTriangleHasOneEdge) {
  const auto sg = induced_subgraph(triangle(), {0, 1});
  EXPECT_EQ(sg.size(), 2u);
  EXPECT_EQ(sg.graph().num_edges(), 1u);
}

TEST(InducedSubgraph, AllNodesKeepsEveryEdge) {
  const auto g = toy::random_graph(12, 0.3, 2, 5);
  std::vector<std::size_t> all(g.num_nodes());
  std::iota(all.begin(), all.end(), 0);
  const auto sg = induced_subgraph(g, all);
  EXPECT_EQ(sg.graph().num_edges(), g.num_edges());
  EXPECT_EQ(sg.graph(), g);
}

TEST(InducedSubgraph, StarLeavesAreIndependent) {
  const auto sg = induced_subgraph(star(4), {1, 2, 3});
  EXPECT_EQ(sg.graph().num_edges(), 0u);
}

TEST(InducedSubgraph, CanonicalOrderAndReindexing) {
  const auto g = path(5);
  const auto sg = induced_subgraph(g, {4, 2, 3});
  EXPECT_EQ(sg.node_ids(), (std::vector<std::size_t>{2, 3, 4}));
  std::set<std::pair<std::size_t, std::size_t>> edges;
  for (const auto &e : sg.graph().edges())
    edges.insert(std::minmax(e.src, e.dst));
  EXPECT_EQ(edges, (std::set<std::pair<std::size_t, std::size_t>>{{0, 1},
                                                                  {1, 2}}));
  EXPECT_EQ(sg.parent_num_nodes(), 5u);
}

TEST(InducedSubgraph, CopiesFeatureRows) {
  Matrix x(3, 2);
  x << 1, 2, 3, 4, 5, 6;
  const Graph g(3, {{0, 1}}, x);
  const auto sg = induced_subgraph(g, {2, 0});
  EXPECT_EQ(sg.graph().features()(0, 1), 2.0);
  EXPECT_EQ(sg.graph().features()(1, 0), 5.0);
}

TEST(InducedSubgraph, Errors) {
  const auto g = triangle();
  EXPECT_THROW(induced_subgraph(g, std::vector<std::size_t>{}), EmptyNodeSet);
  EXPECT_THROW(induced_subgraph(g, {0, 3}), InvalidNodeSet);
  EXPECT_THROW(induced_subgraph(g, {1, 1}), InvalidNodeSet);
}

TEST(InducedSubgraph, MonotoneUnderInclusion) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto g = toy::random_graph(15, 0.3, 1, trial, trial % 2 == 1);
    std::vector<std::size_t> t, s;
    for (std::size_t i = 0; i < g.num_nodes(); ++i)
      if (rng() % 3 != 0) {
        t.push_back(i);
        if (rng() % 2)
          s.push_back(i);
      }
    if (s.empty())
      continue;
    const auto gs = induced_subgraph(g, s);
    const auto gt = induced_subgraph(g, t);
    std::set<std::pair<std::size_t, std::size_t>> t_edges;
    for (const auto &e : gt.graph().edges())
      t_edges.insert({gt.node_ids()[e.src], gt.node_ids()[e.dst]});
    for (const auto &e : gs.graph().edges())
      EXPECT_TRUE(t_edges.count({gs.node_ids()[e.src], gs.node_ids()[e.dst]}));
  }
}

TEST(GraphValidation, RejectsBrokenInvariants) {
  EXPECT_THROW(make_graph(3, {{0, 3}}), ValidationError);
  EXPECT_THROW(make_graph(3, {{1, 1}}), ValidationError);
  EXPECT_THROW(make_graph(3, {{0, 1}, {1, 0}}), ValidationError);
  EXPECT_NO_THROW(make_graph(3, {{0, 1}, {1, 0}}, /*directed=*/true));
  EXPECT_THROW(Graph(2, {}, Matrix::Zero(3, 1)), ValidationError);
  EXPECT_THROW(Graph(2, {}, Matrix::Zero(2, 0)), ValidationError);
  EXPECT_THROW(Graph(0, {}, Matrix::Zero(0, 1)), ValidationError);
  EXPECT_THROW(Graph(2, {}, Matrix::Zero(2, 1), false, 3, 2), ValidationError);
}

TEST(EdgeRemoved, TriangleBecomesPath) {
  const auto g = edge_removed(triangle(), 0, 1);
  EXPECT_EQ(g.num_edges(), 2u);
  EXPECT_FALSE(g.find_edge(0, 1));
  EXPECT_TRUE(g.find_edge(1, 2));
  EXPECT_TRUE(g.find_edge(0, 2));
}

TEST(EdgeRemoved, UndirectedAcceptsEitherOrientation) {
  const auto g = edge_removed(triangle(), 1, 0);
  EXPECT_EQ(g.num_edges(), 2u);
  EXPECT_FALSE(g.find_edge(0, 1));
}

TEST(EdgeRemoved, OnlyEdgeOfTwoNodeGraph) {
  const auto g = edge_removed(make_graph(2, {{0, 1}}), 0, 1);
  EXPECT_EQ(g.num_edges(), 0u);
  EXPECT_EQ(g.num_nodes(), 2u);
}

TEST(EdgeRemoved, DirectedKeepsReverseEdge) {
  const auto g = edge_removed(make_graph(2, {{0, 1}, {1, 0}}, true), 0, 1);
  EXPECT_EQ(g.num_edges(), 1u);
  EXPECT_TRUE(g.find_edge(1, 0));
  EXPECT_FALSE(g.find_edge(0, 1));
}

TEST(EdgeRemoved, NonEdgeThrows) {
  EXPECT_THROW(edge_removed(star(3), 1, 2), NotAnEdge);
  EXPECT_THROW(edge_removed(make_graph(2, {{0, 1}}, true), 1, 0), NotAnEdge);
}

TEST(EdgeRemoved, DecreasesEdgeCountByOne) {
  for (int seed = 0; seed < 20; ++seed) {
    const auto g = toy::random_graph(10, 0.4, 1, seed, seed % 2 == 0);
    for (const auto &e : g.edges()) {
      const auto h = edge_removed(g, e.src, e.dst);
      EXPECT_EQ(h.num_edges() + 1, g.num_edges());
      EXPECT_EQ(h.features(), g.features());
    }
  }
}

TEST(Neighbors, SymmetricForUndirected) {
  const auto g = path(3);
  EXPECT_EQ(g.neighbors(1), (std::vector<std::size_t>{0, 2}));
  const auto d = make_graph(3, {{0, 1}, {2, 1}}, true);
  EXPECT_EQ(d.neighbors(0), (std::vector<std::size_t>{1}));
  EXPECT_TRUE(d.neighbors(1).empty());
}

class GraphIo : public ::testing::Test {
protected:
  void SetUp() override { dir_ = temp_dir("graph_io"); }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::filesystem::path write(const std::string &name,
                              const std::string &text) {
    auto p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }
  std::filesystem::path dir_;
};

TEST_F(GraphIo, MinimalFile) {
  const auto g = load_graph(
      write("min.json", R"({"num_nodes":1,"edges":[],"features":[[0.0]]})"));
  EXPECT_EQ(g.num_nodes(), 1u);
  EXPECT_EQ(g.num_edges(), 0u);
  EXPECT_EQ(g.feature_dim(), 1u);
  EXPECT_FALSE(g.label());
}

TEST_F(GraphIo, OutOfRangeEdgeIsValidationError) {
  EXPECT_THROW(load_graph(write("bad.json",
                                R"({"num_nodes":3,"edges":[[0,5]],
                                    "features":[[0],[0],[0]]})")),
               ValidationError);
}

TEST_F(GraphIo, SchemaErrorsNameTheField) {
  try {
    load_graph(write("bad.json", R"({"num_nodes":2,"edges":[],
                                     "features":[[0.0],["x"]]})"));
    FAIL() << "expected FormatError";
  } catch (const FormatError &e) {
    EXPECT_NE(e.path().find("features[1][0]"), std::string::npos) << e.what();
  }
  EXPECT_THROW(load_graph(write("nonodes.json", R"({"edges":[],"features":[[1]]})")),
               FormatError);
  EXPECT_THROW(load_graph(write("ragged.json", R"({"num_nodes":2,"edges":[],
                                   "features":[[1,2],[3]]})")),
               FormatError);
  EXPECT_THROW(load_graph(write("notjson.json", "{")), FormatError);
  EXPECT_THROW(load_graph(dir_ / "missing.json"), ValidationError);
}

TEST_F(GraphIo, RoundTripIsIdentityOnRandomGraphs) {
  for (int seed = 0; seed < 25; ++seed) {
    const auto base = toy::random_graph(seed == 0 ? 50 : 5 + seed, 0.2, 3,
                                        seed, seed % 3 == 0);
    const Graph g(base.num_nodes(), base.edges(), base.features() * 1e3 / 7.0,
                  base.directed(),
                  seed % 2 ? std::optional<std::size_t>(1) : std::nullopt, 2);
    const auto p = dir_ / ("g" + std::to_string(seed) + ".json");
    save_graph(g, p);
    EXPECT_EQ(load_graph(p), g) << "seed " << seed;
  }
}

TEST_F(GraphIo, DatasetManifest) {
  const auto ds = toy::make_dataset(10, 3);
  save_dataset(ds, dir_ / "toy");
  const auto all = load_dataset(dir_ / "toy");
  ASSERT_EQ(all.entries.size(), 10u);
  EXPECT_EQ(all.name, "toy");
  for (std::size_t i = 0; i < 10; ++i)
    EXPECT_EQ(all.entries[i].graph, ds.entries[i].graph);
  EXPECT_EQ(load_dataset(dir_ / "toy", "test").entries.size(), 2u);
  EXPECT_EQ(load_dataset(dir_ / "toy", "train").entries.size(), 8u);
}
