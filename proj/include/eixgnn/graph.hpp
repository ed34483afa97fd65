// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "eixgnn/errors.hpp"

namespace eixgnn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Edge {
  std::size_t src = 0;
  std::size_t dst = 0;
  friend auto operator<=>(const Edge &, const Edge &) = default;
};

/**
 * Attributed graph (X, A): N nodes carrying a d-dimensional feature row each,
 * plus an edge list. Undirected graphs store every unordered pair once and
 * are treated as symmetric. Self-loops are never stored; the GCN layer adds
 * them itself.
 *
 * Instances are immutable once constructed and may be shared across threads.
 */
class Graph {
public:
  Graph(std::size_t num_nodes, std::vector<Edge> edges, Matrix features,
        bool directed = false, std::optional<std::size_t> label = std::nullopt,
        std::size_t num_classes = 1)
      : num_nodes_(num_nodes), directed_(directed), edges_(std::move(edges)),
        features_(std::move(features)), label_(label),
        num_classes_(num_classes) {
    validate();
    build_adjacency();
  }

  std::size_t num_nodes() const noexcept { return num_nodes_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  std::size_t feature_dim() const noexcept {
    return static_cast<std::size_t>(features_.cols());
  }
  bool directed() const noexcept { return directed_; }
  const std::vector<Edge> &edges() const noexcept { return edges_; }
  const Matrix &features() const noexcept { return features_; }
  std::optional<std::size_t> label() const noexcept { return label_; }
  std::size_t num_classes() const noexcept { return num_classes_; }

  //! N_i = {j : (i, j) in E}; both orientations count for undirected graphs.
  const std::vector<std::size_t> &neighbors(std::size_t i) const {
    return adjacency_.at(i);
  }

  //! Position of (i, j) in edges(), honouring undirected symmetry.
  std::optional<std::size_t> find_edge(std::size_t i, std::size_t j) const {
    for (std::size_t k = 0; k < edges_.size(); ++k) {
      const Edge &e = edges_[k];
      if ((e.src == i && e.dst == j) ||
          (!directed_ && e.src == j && e.dst == i))
        return k;
    }
    return std::nullopt;
  }

  //! Same topology and metadata, different node features.
  Graph with_features(Matrix features) const {
    return Graph(num_nodes_, edges_, std::move(features), directed_, label_,
                 num_classes_);
  }

  friend bool operator==(const Graph &a, const Graph &b) {
    return a.num_nodes_ == b.num_nodes_ && a.directed_ == b.directed_ &&
           a.edges_ == b.edges_ && a.label_ == b.label_ &&
           a.num_classes_ == b.num_classes_ &&
           a.features_.rows() == b.features_.rows() &&
           a.features_.cols() == b.features_.cols() &&
           a.features_ == b.features_;
  }

private:
  void validate() const {
    if (num_nodes_ == 0)
      throw ValidationError("graph must have at least one node");
    if (num_classes_ == 0)
      throw ValidationError("num_classes must be positive");
    if (static_cast<std::size_t>(features_.rows()) != num_nodes_)
      throw ValidationError("features has " + std::to_string(features_.rows()) +
                            " rows, expected num_nodes = " +
                            std::to_string(num_nodes_));
    if (features_.cols() < 1)
      throw ValidationError("features must have at least one column");
    if (!features_.allFinite())
      throw ValidationError("features contain non-finite values");
    if (label_ && *label_ >= num_classes_)
      throw ValidationError("label " + std::to_string(*label_) +
                            " out of range for num_classes = " +
                            std::to_string(num_classes_));

    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (std::size_t k = 0; k < edges_.size(); ++k) {
      const Edge &e = edges_[k];
      const std::string where = "edges[" + std::to_string(k) + "]";
      if (e.src >= num_nodes_ || e.dst >= num_nodes_)
        throw ValidationError(where + ": endpoint out of range [0, " +
                              std::to_string(num_nodes_) + ")");
      if (e.src == e.dst)
        throw ValidationError(where + ": self-loop");
      const std::pair<std::size_t, std::size_t> key =
          directed_ || e.src < e.dst ? std::pair{e.src, e.dst}
                                     : std::pair{e.dst, e.src};
      if (!seen.insert(key).second)
        throw ValidationError(where + ": duplicate edge");
    }
  }

  void build_adjacency() {
    adjacency_.assign(num_nodes_, {});
    for (const Edge &e : edges_) {
      adjacency_[e.src].push_back(e.dst);
      if (!directed_)
        adjacency_[e.dst].push_back(e.src);
    }
    for (auto &nbrs : adjacency_)
      std::sort(nbrs.begin(), nbrs.end());
  }

  std::size_t num_nodes_;
  bool directed_;
  std::vector<Edge> edges_;
  Matrix features_;
  std::optional<std::size_t> label_;
  std::size_t num_classes_;
  std::vector<std::vector<std::size_t>> adjacency_;
};

/**
 * Induced subgraph G_S of a parent graph. Node ids are kept in increasing
 * parent order; local node k corresponds to parent node node_ids()[k]. The
 * local graph holds X_S and the parent edges with both endpoints in S,
 * reindexed to local ids.
 */
class Subgraph {
public:
  Subgraph(std::vector<std::size_t> node_ids, Graph local,
           std::size_t parent_num_nodes)
      : node_ids_(std::move(node_ids)), local_(std::move(local)),
        parent_num_nodes_(parent_num_nodes) {}

  const std::vector<std::size_t> &node_ids() const noexcept {
    return node_ids_;
  }
  const Graph &graph() const noexcept { return local_; }
  std::size_t size() const noexcept { return node_ids_.size(); }
  std::size_t parent_num_nodes() const noexcept { return parent_num_nodes_; }

private:
  std::vector<std::size_t> node_ids_;
  Graph local_;
  std::size_t parent_num_nodes_;
};

inline Subgraph induced_subgraph(const Graph &g,
                                 std::span<const std::size_t> nodes) {
  if (nodes.empty())
    throw EmptyNodeSet("induced_subgraph: empty node set");

  std::vector<std::size_t> ids(nodes.begin(), nodes.end());
  std::sort(ids.begin(), ids.end());
  if (ids.back() >= g.num_nodes())
    throw InvalidNodeSet("induced_subgraph: node " +
                         std::to_string(ids.back()) + " out of range [0, " +
                         std::to_string(g.num_nodes()) + ")");
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
    throw InvalidNodeSet("induced_subgraph: repeated node id");

  constexpr auto absent = static_cast<std::size_t>(-1);
  std::vector<std::size_t> local_of(g.num_nodes(), absent);
  for (std::size_t k = 0; k < ids.size(); ++k)
    local_of[ids[k]] = k;

  std::vector<Edge> edges;
  for (const Edge &e : g.edges())
    if (local_of[e.src] != absent && local_of[e.dst] != absent)
      edges.push_back({local_of[e.src], local_of[e.dst]});

  Matrix x(static_cast<Eigen::Index>(ids.size()), g.features().cols());
  for (std::size_t k = 0; k < ids.size(); ++k)
    x.row(static_cast<Eigen::Index>(k)) =
        g.features().row(static_cast<Eigen::Index>(ids[k]));

  Graph local(ids.size(), std::move(edges), std::move(x), g.directed(),
              g.label(), g.num_classes());
  return Subgraph(std::move(ids), std::move(local), g.num_nodes());
}

inline Subgraph induced_subgraph(const Graph &g,
                                 std::initializer_list<std::size_t> nodes) {
  return induced_subgraph(g, std::span<const std::size_t>(nodes.begin(),
                                                          nodes.size()));
}

//! Copy of g without edge (i, j); for undirected graphs (j, i) names the
//! same edge.
inline Graph edge_removed(const Graph &g, std::size_t i, std::size_t j) {
  const auto pos = g.find_edge(i, j);
  if (!pos)
    throw NotAnEdge("(" + std::to_string(i) + ", " + std::to_string(j) +
                    ") is not an edge");
  std::vector<Edge> edges = g.edges();
  edges.erase(edges.begin() + static_cast<std::ptrdiff_t>(*pos));
  return Graph(g.num_nodes(), std::move(edges), g.features(), g.directed(),
               g.label(), g.num_classes());
}

} // namespace eixgnn
