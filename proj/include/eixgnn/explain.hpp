// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "eixgnn/concepts.hpp"
#include "eixgnn/global_order.hpp"
#include "eixgnn/graph.hpp"
#include "eixgnn/json_util.hpp"
#include "eixgnn/model.hpp"
#include "eixgnn/parallel.hpp"
#include "eixgnn/random.hpp"
#include "eixgnn/shapley.hpp"

namespace eixgnn {

struct ExplainConfig {
  std::size_t L = 15;
  double p = 0.2;
  std::uint64_t seed = 0;
  std::size_t shapley_exact_max = 12;
  std::size_t shapley_samples = 1000;
  double damping = 1e-3;
  std::size_t workers = 1;
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

//! Run metadata: configuration echo, degeneracy repairs and solver stats.
struct RunReport {
  std::uint64_t seed = 0;
  std::size_t L = 0;
  double p = 0.0;
  std::size_t concept_size = 0;
  std::size_t target_class = 0;
  bool prior_uniform_fallback = false;
  ConceptGraphReport concept_graph;
  std::size_t shapley_exact_max = 0;
  std::size_t shapley_samples = 0;
  std::vector<ShapleyMethod> shapley_methods;
  std::vector<StageTiming> timings;
};

/**
 * xi = diag(r) xbar^T (L x N). node_relevance is the column sum of xi, the
 * projection of the map onto the node set.
 */
struct ExplanationMap {
  Matrix xi;
  Vector node_relevance;
  Matrix xbar;
  Vector r;
  std::vector<std::vector<std::size_t>> concepts;
  RunReport meta;
};

//! Scatters each concept's Shapley vector into column l of an N x L matrix;
//! nodes outside concept l get 0 in that column.
inline Matrix assemble_xbar(std::size_t num_nodes,
                            const std::vector<Subgraph> &concepts,
                            const std::vector<ShapleyResult> &shapleys) {
  if (concepts.size() != shapleys.size())
    throw ShapeMismatch("assemble_xbar: " + std::to_string(concepts.size()) +
                        " concepts but " + std::to_string(shapleys.size()) +
                        " Shapley results");
  Matrix xbar = Matrix::Zero(static_cast<Eigen::Index>(num_nodes),
                             static_cast<Eigen::Index>(concepts.size()));
  for (std::size_t l = 0; l < concepts.size(); ++l) {
    const auto &ids = concepts[l].node_ids();
    if (static_cast<std::size_t>(shapleys[l].values.size()) != ids.size())
      throw ShapeMismatch("assemble_xbar: concept " + std::to_string(l) +
                          " has " + std::to_string(ids.size()) +
                          " nodes but " +
                          std::to_string(shapleys[l].values.size()) +
                          " Shapley values");
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (ids[k] >= num_nodes)
        throw ShapeMismatch("assemble_xbar: node id out of range");
      xbar(static_cast<Eigen::Index>(ids[k]), static_cast<Eigen::Index>(l)) =
          shapleys[l].values(static_cast<Eigen::Index>(k));
    }
  }
  return xbar;
}

//! Computes xi = diag(r) xbar^T and its column sum.
inline std::pair<Matrix, Vector> weight_by_centrality(const Matrix &xbar,
                                                      const Vector &r) {
  if (xbar.cols() != r.size())
    throw ShapeMismatch("xbar has " + std::to_string(xbar.cols()) +
                        " columns, r has " + std::to_string(r.size()) +
                        " entries");
  Matrix xi = r.asDiagonal() * xbar.transpose();
  Vector node_relevance = Vector::Zero(xi.cols());
  for (Eigen::Index l = 0; l < xi.rows(); ++l)
    node_relevance += xi.row(l).transpose();
  return {std::move(xi), std::move(node_relevance)};
}

namespace detail {

template <class Fn>
auto run_stage(const char *name, std::vector<StageTiming> &timings, Fn &&fn) {
  const auto start = std::chrono::steady_clock::now();
  auto record = [&] {
    timings.push_back(
        {name, std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                             start)
                   .count()});
  };
  try {
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      record();
    } else {
      auto out = fn();
      record();
      return out;
    }
  } catch (const StageError &) {
    throw;
  } catch (const std::exception &e) {
    throw StageError(name, e.what());
  }
}

} // namespace detail

/**
 * Full explanation of the model's decision on g:
 * prior -> concept sampling -> concept graph and eigencentrality ->
 * per-concept Shapley values -> xi. Deterministic for a given seed; the
 * number of workers only affects wall-clock time.
 */
inline ExplanationMap explain(const Model &m, const Graph &g,
                              const ExplainConfig &cfg) {
  ExplanationMap out;
  RunReport &meta = out.meta;
  meta.seed = cfg.seed;
  meta.L = cfg.L;
  meta.p = cfg.p;
  meta.shapley_exact_max = cfg.shapley_exact_max;
  meta.shapley_samples = cfg.shapley_samples;
  const std::size_t workers = std::max<std::size_t>(1, cfg.workers);

  const auto target = detail::run_stage("predict", meta.timings, [&] {
    return forward(m, g).argmax();
  });
  meta.target_class = target;

  const auto prior = detail::run_stage("prior", meta.timings, [&] {
    return compute_prior(m, g, workers);
  });
  meta.prior_uniform_fallback = prior.uniform_fallback;

  const auto cs = detail::run_stage("concepts", meta.timings, [&] {
    return sample_concepts(prior, g, cfg.L, cfg.p, cfg.seed, workers);
  });
  meta.concept_size = cs.concept_size;

  auto kg = detail::run_stage("global-order", meta.timings, [&] {
    return build_concept_graph(m, cs, cfg.damping, workers);
  });
  meta.concept_graph = kg.report;

  auto shapleys = detail::run_stage("local-order", meta.timings, [&] {
    std::vector<ShapleyResult> res(cs.concepts.size());
    const std::uint64_t stage_seed = derive_seed(cfg.seed, streams::shapley);
    parallel_for(cs.concepts.size(), workers, [&](std::size_t l) {
      const CoalitionGame game(m, cs.concepts[l], target);
      ShapleyConfig sc;
      sc.k_exact_max = cfg.shapley_exact_max;
      sc.samples = cfg.shapley_samples;
      sc.seed = derive_seed(stage_seed, l);
      sc.workers = 1;
      res[l] = concept_relevance(game, sc);
    });
    return res;
  });
  for (const auto &s : shapleys)
    meta.shapley_methods.push_back(s.method);

  detail::run_stage("assemble", meta.timings, [&] {
    out.xbar = assemble_xbar(g.num_nodes(), cs.concepts, shapleys);
    out.r = kg.r;
    std::tie(out.xi, out.node_relevance) = weight_by_centrality(out.xbar, out.r);
  });

  out.concepts.reserve(cs.concepts.size());
  for (const auto &c : cs.concepts)
    out.concepts.push_back(c.node_ids());
  return out;
}

// ---------------------------------------------------------------------------
// Explanation output file

/**
 * Serialises an explanation. Stage timings are wall-clock measurements and
 * are only written when `include_timings` is set, so that the default output
 * is byte-identical across runs.
 */
inline nlohmann::json explanation_to_json(const ExplanationMap &ex,
                                          bool include_timings = false) {
  using nlohmann::json;
  const auto &meta = ex.meta;
  json methods = json::array();
  for (auto mth : meta.shapley_methods)
    methods.push_back(to_string(mth));
  json meta_j = {
      {"seed", meta.seed},
      {"L", meta.L},
      {"p", meta.p},
      {"concept_size", meta.concept_size},
      {"target_class", meta.target_class},
      {"prior_uniform_fallback", meta.prior_uniform_fallback},
      {"damping", meta.concept_graph.damping},
      {"repaired_rows", meta.concept_graph.repaired_rows},
      {"density_floored", meta.concept_graph.density_floored},
      {"eigencentrality",
       {{"iterations", meta.concept_graph.iterations},
        {"residual", meta.concept_graph.residual},
        {"converged", meta.concept_graph.converged}}},
      {"shapley",
       {{"exact_max", meta.shapley_exact_max},
        {"samples", meta.shapley_samples},
        {"methods", std::move(methods)}}},
  };
  if (include_timings) {
    json t = json::object();
    for (const auto &st : meta.timings)
      t[st.stage] = st.seconds;
    meta_j["timings"] = std::move(t);
  }
  return {{"xi", json_util::to_json(ex.xi)},
          {"node_relevance", json_util::to_json(ex.node_relevance)},
          {"r", json_util::to_json(ex.r)},
          {"concepts", ex.concepts},
          {"meta", std::move(meta_j)}};
}

//! Reads back the numeric part of an explanation file (xi, node_relevance,
//! r, concepts). Metadata is not reconstructed.
inline ExplanationMap explanation_from_json(const nlohmann::json &j) {
  using namespace json_util;
  ExplanationMap ex;
  ex.node_relevance =
      as_vector(field(j, "node_relevance", ""), "node_relevance");
  if (j.contains("r"))
    ex.r = as_vector(j["r"], "r");
  if (j.contains("xi"))
    ex.xi = as_matrix(j["xi"], "xi", ex.node_relevance.size());
  if (j.contains("concepts")) {
    const auto &cs = as_array(j["concepts"], "concepts");
    for (std::size_t l = 0; l < cs.size(); ++l) {
      const auto p = index("concepts", l);
      std::vector<std::size_t> ids;
      for (std::size_t k = 0; k < as_array(cs[l], p).size(); ++k)
        ids.push_back(as_size(cs[l][k], index(p, k)));
      ex.concepts.push_back(std::move(ids));
    }
  }
  return ex;
}

inline ExplanationMap load_explanation(const std::filesystem::path &path) {
  return explanation_from_json(json_util::read_file(path));
}

} // namespace eixgnn
