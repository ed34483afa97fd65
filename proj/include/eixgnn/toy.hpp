// SPDX-License-Identifier: Apache-2.0
#pragma once

// Synthetic cycles-vs-stars dataset and randomly initialised GCN models.
// Used by the test suites and by the `eixgnn_toy` fixture generator.

#include <cmath>
#include <cstdio>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "eixgnn/graph.hpp"
#include "eixgnn/graph_io.hpp"
#include "eixgnn/model.hpp"
#include "eixgnn/random.hpp"

namespace eixgnn::toy {

inline constexpr std::size_t kFeatureDim = 3;

//! Features per node: [1, degree / N, uniform noise in [0, 1)].
inline Matrix toy_features(std::size_t n, const std::vector<Edge> &edges,
                           Rng &rng) {
  std::vector<double> deg(n, 0.0);
  for (const Edge &e : edges) {
    deg[e.src] += 1.0;
    deg[e.dst] += 1.0;
  }
  std::uniform_real_distribution<double> noise(0.0, 1.0);
  Matrix x(static_cast<Eigen::Index>(n), kFeatureDim);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    x(r, 0) = 1.0;
    x(r, 1) = deg[i] / static_cast<double>(n);
    x(r, 2) = noise(rng);
  }
  return x;
}

//! Ring on n nodes, label 0.
inline Graph cycle_graph(std::size_t n, Rng &rng) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    edges.push_back({i, (i + 1) % n});
  auto x = toy_features(n, edges, rng);
  return Graph(n, std::move(edges), std::move(x), false, 0, 2);
}

//! Star with centre 0 and n - 1 leaves, label 1.
inline Graph star_graph(std::size_t n, Rng &rng) {
  std::vector<Edge> edges;
  for (std::size_t i = 1; i < n; ++i)
    edges.push_back({0, i});
  auto x = toy_features(n, edges, rng);
  return Graph(n, std::move(edges), std::move(x), false, 1, 2);
}

/**
 * `count` graphs alternating cycle / star with sizes drawn from
 * [min_nodes, max_nodes]. The last `count / 5` graphs are tagged "test".
 */
inline Dataset make_dataset(std::size_t count, std::uint64_t seed,
                            std::size_t min_nodes = 10,
                            std::size_t max_nodes = 20) {
  Rng rng(derive_seed(seed, 0));
  std::uniform_int_distribution<std::size_t> size(min_nodes, max_nodes);
  Dataset ds;
  ds.name = "toy";
  const std::size_t test_from = count - count / 5;
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t n = size(rng);
    Graph g = (k % 2 == 0) ? cycle_graph(n, rng) : star_graph(n, rng);
    char name[32];
    std::snprintf(name, sizeof name, "g%03zu.json", k);
    ds.entries.push_back({name, k >= test_from ? "test" : "train", std::move(g)});
  }
  return ds;
}

struct ModelShape {
  std::size_t feature_dim = kFeatureDim;
  std::vector<std::size_t> hidden = {16, 16};
  std::size_t num_classes = 2;
  Activation activation = Activation::relu;
  Pooling pooling = Pooling::mean;
};

//! GCN with N(0, 1 / d_in) weights and N(0, 0.1^2) biases.
inline Model random_model(const ModelShape &shape, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0));
  std::normal_distribution<double> normal(0.0, 1.0);
  auto fill = [&](Eigen::Index rows, Eigen::Index cols, double scale) {
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c)
        m(r, c) = scale * normal(rng);
    return m;
  };

  std::vector<GcnLayer> layers;
  auto d_in = static_cast<Eigen::Index>(shape.feature_dim);
  for (std::size_t width : shape.hidden) {
    const auto d_out = static_cast<Eigen::Index>(width);
    layers.push_back({fill(d_in, d_out, 1.0 / std::sqrt(double(d_in))),
                      fill(d_out, 1, 0.1).col(0), shape.activation});
    d_in = d_out;
  }
  const Eigen::Index head_in =
      d_in * (shape.pooling == Pooling::mean_concat_max ? 2 : 1);
  const auto classes = static_cast<Eigen::Index>(shape.num_classes);
  DenseLayer head{fill(head_in, classes, 1.0 / std::sqrt(double(head_in))),
                  fill(classes, 1, 0.1).col(0)};
  return Model(std::move(layers), shape.pooling, std::move(head),
               shape.num_classes);
}

//! Erdos-Renyi style random graph with d-dimensional Gaussian features.
inline Graph random_graph(std::size_t n, double edge_prob, std::size_t d,
                          std::uint64_t seed, bool directed = false,
                          std::size_t num_classes = 2) {
  Rng rng(derive_seed(seed, 0));
  std::bernoulli_distribution coin(edge_prob);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = directed ? 0 : i + 1; j < n; ++j)
      if (i != j && coin(rng))
        edges.push_back({i, j});
  Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index r = 0; r < x.rows(); ++r)
    for (Eigen::Index c = 0; c < x.cols(); ++c)
      x(r, c) = normal(rng);
  return Graph(n, std::move(edges), std::move(x), directed, std::nullopt,
               num_classes);
}

} // namespace eixgnn::toy
