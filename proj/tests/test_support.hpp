// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "eixgnn/eixgnn.hpp"
#include "oracles.hpp"

namespace testing_support {

using namespace eixgnn;

inline Graph make_graph(std::size_t n, std::vector<Edge> edges,
                        bool directed = false, std::size_t d = 1,
                        double fill = 1.0) {
  return Graph(n, std::move(edges),
               Matrix::Constant(static_cast<Eigen::Index>(n),
                                static_cast<Eigen::Index>(d), fill),
               directed, std::nullopt, 2);
}

inline Graph triangle() { return make_graph(3, {{0, 1}, {1, 2}, {0, 2}}); }

inline Graph star(std::size_t leaves) {
  std::vector<Edge> e;
  for (std::size_t i = 1; i <= leaves; ++i)
    e.push_back({0, i});
  return make_graph(leaves + 1, std::move(e));
}

inline Graph path(std::size_t n, std::size_t d = 1) {
  std::vector<Edge> e;
  for (std::size_t i = 0; i + 1 < n; ++i)
    e.push_back({i, i + 1});
  return make_graph(n, std::move(e), false, d);
}

inline Graph complete(std::size_t n) {
  std::vector<Edge> e;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      e.push_back({i, j});
  return make_graph(n, std::move(e));
}

inline std::vector<std::pair<std::size_t, std::size_t>>
edge_pairs(const Graph &g) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const Edge &e : g.edges())
    out.emplace_back(e.src, e.dst);
  return out;
}

inline oracle::Act to_oracle(Activation a) {
  switch (a) {
  case Activation::relu:
    return oracle::Act::relu;
  case Activation::tanh:
    return oracle::Act::tanh;
  default:
    return oracle::Act::identity;
  }
}

inline oracle::Pool to_oracle(Pooling p) {
  switch (p) {
  case Pooling::mean:
    return oracle::Pool::mean;
  case Pooling::max:
    return oracle::Pool::max;
  default:
    return oracle::Pool::mean_concat_max;
  }
}

//! Dense oracle evaluation of a library Model on arbitrary edges/features.
inline Vector oracle_forward(const Model &m, std::size_t n,
                             const std::vector<std::pair<std::size_t, std::size_t>> &edges,
                             bool directed, const Matrix &x) {
  std::vector<oracle::Layer> layers;
  for (const auto &l : m.layers())
    layers.push_back({l.weight, l.bias, to_oracle(l.activation)});
  return oracle::gcn_forward(n, edges, directed, x, layers,
                             to_oracle(m.pooling()), m.head().weight,
                             m.head().bias);
}

inline Vector oracle_forward(const Model &m, const Graph &g) {
  return oracle_forward(m, g.num_nodes(), edge_pairs(g), g.directed(),
                        g.features());
}

//! Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string &tag) {
  static std::atomic<int> counter{0};
  const auto stamp =
      std::chrono::steady_clock::now().time_since_epoch().count();
  auto dir = std::filesystem::temp_directory_path() /
             ("eixgnn_" + tag + "_" + std::to_string(stamp) + "_" +
              std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

//! Single-layer model with the given weights, mean pooling and a head.
inline Model one_layer_model(Matrix w, Vector b, Matrix head_w, Vector head_b,
                             Activation act = Activation::identity,
                             Pooling pool = Pooling::mean) {
  const auto classes = static_cast<std::size_t>(head_w.cols());
  return Model({GcnLayer{std::move(w), std::move(b), act}}, pool,
               DenseLayer{std::move(head_w), std::move(head_b)}, classes);
}

} // namespace testing_support
