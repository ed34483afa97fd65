// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "eixgnn/graph.hpp"
#include "eixgnn/json_util.hpp"

namespace eixgnn {

enum class Activation { relu, tanh, identity };
enum class Pooling { mean, max, mean_concat_max };

//! Floor applied to softmax outputs before renormalising, so that every KL
//! term between two model outputs stays finite.
inline constexpr double kProbFloor = 1e-10;

struct GcnLayer {
  Matrix weight; // d_in x d_out
  Vector bias;   // d_out
  Activation activation = Activation::relu;
};

struct DenseLayer {
  Matrix weight; // d_in x num_classes
  Vector bias;   // num_classes
};

//! Class probability vector over num_classes; sums to 1, no zero entries.
struct ClassDistribution {
  Vector probs;

  std::size_t argmax() const {
    Eigen::Index best = 0;
    probs.maxCoeff(&best);
    return static_cast<std::size_t>(best);
  }
  double operator[](std::size_t c) const {
    return probs(static_cast<Eigen::Index>(c));
  }
  std::size_t size() const { return static_cast<std::size_t>(probs.size()); }
};

/**
 * Trained GCN graph classifier f*: a chain of GCN layers, a global pooling
 * readout and a dense softmax head. The dimension chain is checked on
 * construction, so a Model that exists can always be evaluated on graphs
 * whose feature width equals feature_dim().
 */
class Model {
public:
  Model(std::vector<GcnLayer> layers, Pooling pooling, DenseLayer head,
        std::size_t num_classes)
      : layers_(std::move(layers)), pooling_(pooling), head_(std::move(head)),
        num_classes_(num_classes) {
    validate();
  }

  const std::vector<GcnLayer> &layers() const noexcept { return layers_; }
  Pooling pooling() const noexcept { return pooling_; }
  const DenseLayer &head() const noexcept { return head_; }
  std::size_t num_classes() const noexcept { return num_classes_; }
  std::size_t feature_dim() const noexcept {
    return static_cast<std::size_t>(layers_.front().weight.rows());
  }

private:
  void validate() const {
    if (layers_.empty())
      throw DimensionMismatch("model needs at least one GCN layer");
    if (num_classes_ == 0)
      throw DimensionMismatch("num_classes must be positive");
    for (std::size_t k = 0; k < layers_.size(); ++k) {
      const auto &l = layers_[k];
      const std::string where = "layers[" + std::to_string(k) + "]";
      if (l.weight.rows() == 0 || l.weight.cols() == 0)
        throw DimensionMismatch(where + ": empty weight matrix");
      if (l.bias.size() != l.weight.cols())
        throw DimensionMismatch(where + ": bias has " +
                                std::to_string(l.bias.size()) +
                                " entries, expected " +
                                std::to_string(l.weight.cols()));
      if (k > 0 && layers_[k - 1].weight.cols() != l.weight.rows())
        throw DimensionMismatch(
            where + ": expects d_in = " + std::to_string(l.weight.rows()) +
            " but previous layer outputs " +
            std::to_string(layers_[k - 1].weight.cols()));
    }
    const auto width = layers_.back().weight.cols() *
                       (pooling_ == Pooling::mean_concat_max ? 2 : 1);
    if (head_.weight.rows() != width)
      throw DimensionMismatch("head: expects " +
                              std::to_string(head_.weight.rows()) +
                              " inputs, pooling yields " +
                              std::to_string(width));
    if (head_.weight.cols() != static_cast<Eigen::Index>(num_classes_) ||
        head_.bias.size() != static_cast<Eigen::Index>(num_classes_))
      throw DimensionMismatch("head: output width must equal num_classes = " +
                              std::to_string(num_classes_));
  }

  std::vector<GcnLayer> layers_;
  Pooling pooling_;
  DenseLayer head_;
  std::size_t num_classes_;
};

namespace detail {

inline void activate(Matrix &h, Activation act) {
  switch (act) {
  case Activation::relu:
    h = h.cwiseMax(0.0);
    break;
  case Activation::tanh:
    h = h.array().tanh().matrix();
    break;
  case Activation::identity:
    break;
  }
}

//! Â H with Â = D^-1/2 (A + I) D^-1/2. Messages flow src -> dst; undirected
//! edges carry both directions. Degrees count incoming messages plus the
//! self-loop, so isolated nodes have degree 1.
inline Matrix propagate(const Graph &g, const Matrix &h) {
  const std::size_t n = g.num_nodes();
  std::vector<double> deg(n, 1.0);
  for (const Edge &e : g.edges()) {
    deg[e.dst] += 1.0;
    if (!g.directed())
      deg[e.src] += 1.0;
  }
  std::vector<double> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i)
    inv_sqrt[i] = 1.0 / std::sqrt(deg[i]);

  Matrix out(h.rows(), h.cols());
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out.row(r) = h.row(r) * (inv_sqrt[i] * inv_sqrt[i]);
  }
  for (const Edge &e : g.edges()) {
    const auto s = static_cast<Eigen::Index>(e.src);
    const auto d = static_cast<Eigen::Index>(e.dst);
    const double w = inv_sqrt[e.src] * inv_sqrt[e.dst];
    out.row(d) += w * h.row(s);
    if (!g.directed())
      out.row(s) += w * h.row(d);
  }
  return out;
}

inline Vector readout(const Matrix &h, Pooling pooling) {
  switch (pooling) {
  case Pooling::mean:
    return h.colwise().mean().transpose();
  case Pooling::max:
    return h.colwise().maxCoeff().transpose();
  case Pooling::mean_concat_max: {
    Vector v(2 * h.cols());
    v << h.colwise().mean().transpose(), h.colwise().maxCoeff().transpose();
    return v;
  }
  }
  return {};
}

} // namespace detail

//! Softmax followed by the kProbFloor floor and renormalisation.
inline ClassDistribution softmax_with_floor(const Vector &logits) {
  Vector p = (logits.array() - logits.maxCoeff()).exp().matrix();
  p /= p.sum();
  p = p.cwiseMax(kProbFloor);
  p /= p.sum();
  return {std::move(p)};
}

namespace detail {

inline ClassDistribution forward_with_features(const Model &m, const Graph &g,
                                               const Matrix &x) {
  if (static_cast<std::size_t>(x.cols()) != m.feature_dim())
    throw DimensionMismatch("graph feature width " + std::to_string(x.cols()) +
                            " does not match model input width " +
                            std::to_string(m.feature_dim()));
  Matrix h = x;
  for (const auto &layer : m.layers()) {
    h = propagate(g, h * layer.weight);
    h.rowwise() += layer.bias.transpose();
    activate(h, layer.activation);
  }
  const Vector pooled = readout(h, m.pooling());
  const Vector logits = m.head().weight.transpose() * pooled + m.head().bias;
  return softmax_with_floor(logits);
}

} // namespace detail

//! Forward pass of f* on one graph.
inline ClassDistribution forward(const Model &m, const Graph &g) {
  return detail::forward_with_features(m, g, g.features());
}

inline ClassDistribution forward(const Model &m, const Subgraph &sg) {
  return forward(m, sg.graph());
}

/**
 * Forward pass on a subgraph whose inactive nodes have their features zeroed.
 * `active` is a membership mask over local node indices (nonzero = active);
 * the topology is left untouched.
 */
inline ClassDistribution masked_forward(const Model &m, const Subgraph &sg,
                                        std::span<const std::uint8_t> active) {
  if (active.size() != sg.size())
    throw InvalidNodeSet("mask has " + std::to_string(active.size()) +
                         " entries, subgraph has " + std::to_string(sg.size()) +
                         " nodes");
  Matrix x = sg.graph().features();
  for (std::size_t k = 0; k < active.size(); ++k)
    if (!active[k])
      x.row(static_cast<Eigen::Index>(k)).setZero();
  return detail::forward_with_features(m, sg.graph(), x);
}

//! Index-list variant of masked_forward.
inline ClassDistribution
masked_forward_ids(const Model &m, const Subgraph &sg,
                   std::span<const std::size_t> active_ids) {
  std::vector<std::uint8_t> mask(sg.size(), 0);
  for (std::size_t id : active_ids) {
    if (id >= sg.size())
      throw InvalidNodeSet("active node " + std::to_string(id) +
                           " out of range for subgraph of size " +
                           std::to_string(sg.size()));
    mask[id] = 1;
  }
  return masked_forward(m, sg, mask);
}

// ---------------------------------------------------------------------------
// Model interchange format

namespace detail {

inline Activation parse_activation(const std::string &s,
                                   const std::string &path) {
  if (s == "relu")
    return Activation::relu;
  if (s == "tanh")
    return Activation::tanh;
  if (s == "identity")
    return Activation::identity;
  throw FormatError(path, "unknown activation \"" + s + "\"");
}

inline const char *to_string(Activation a) {
  switch (a) {
  case Activation::relu:
    return "relu";
  case Activation::tanh:
    return "tanh";
  case Activation::identity:
    return "identity";
  }
  return "";
}

inline Pooling parse_pooling(const std::string &s, const std::string &path) {
  if (s == "mean")
    return Pooling::mean;
  if (s == "max")
    return Pooling::max;
  if (s == "mean_concat_max")
    return Pooling::mean_concat_max;
  throw FormatError(path, "unknown pooling \"" + s + "\"");
}

inline const char *to_string(Pooling p) {
  switch (p) {
  case Pooling::mean:
    return "mean";
  case Pooling::max:
    return "max";
  case Pooling::mean_concat_max:
    return "mean_concat_max";
  }
  return "";
}

} // namespace detail

inline Model model_from_json(const nlohmann::json &j) {
  using namespace json_util;
  std::vector<GcnLayer> layers;
  const auto &jl = as_array(field(j, "layers", ""), "layers");
  for (std::size_t k = 0; k < jl.size(); ++k) {
    const auto p = index("layers", k);
    GcnLayer layer;
    layer.weight = as_matrix(field(jl[k], "weight", p), join(p, "weight"));
    layer.bias = as_vector(field(jl[k], "bias", p), join(p, "bias"));
    if (jl[k].contains("activation"))
      layer.activation = detail::parse_activation(
          as_string(jl[k]["activation"], join(p, "activation")),
          join(p, "activation"));
    layers.push_back(std::move(layer));
  }
  const Pooling pooling = detail::parse_pooling(
      as_string(field(j, "pooling", ""), "pooling"), "pooling");
  const auto &jh = field(j, "head", "");
  DenseLayer head{as_matrix(field(jh, "weight", "head"), "head.weight"),
                  as_vector(field(jh, "bias", "head"), "head.bias")};
  const std::size_t num_classes =
      as_size(field(j, "num_classes", ""), "num_classes");

  Model m(std::move(layers), pooling, std::move(head), num_classes);
  if (j.contains("feature_dim")) {
    const auto fd = as_size(j["feature_dim"], "feature_dim");
    if (fd != m.feature_dim())
      throw DimensionMismatch("feature_dim = " + std::to_string(fd) +
                              " but first layer expects " +
                              std::to_string(m.feature_dim()));
  }
  return m;
}

inline nlohmann::json model_to_json(const Model &m) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto &l : m.layers())
    layers.push_back({{"weight", json_util::to_json(l.weight)},
                      {"bias", json_util::to_json(l.bias)},
                      {"activation", detail::to_string(l.activation)}});
  return {{"layers", std::move(layers)},
          {"pooling", detail::to_string(m.pooling())},
          {"head",
           {{"weight", json_util::to_json(m.head().weight)},
            {"bias", json_util::to_json(m.head().bias)}}},
          {"num_classes", m.num_classes()},
          {"feature_dim", m.feature_dim()}};
}

inline Model load_model(const std::filesystem::path &path) {
  const auto j = json_util::read_file(path);
  try {
    return model_from_json(j);
  } catch (const FormatError &e) {
    throw FormatError(path.string() + ":" + e.path(),
                      std::string(e.what()).substr(e.path().size() + 2));
  } catch (const DimensionMismatch &e) {
    throw DimensionMismatch(path.string() + ": " + e.what());
  }
}

inline void save_model(const Model &m, const std::filesystem::path &path) {
  json_util::write_file(path, model_to_json(m));
}

} // namespace eixgnn
