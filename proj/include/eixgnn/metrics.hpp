// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "eixgnn/graph.hpp"
#include "eixgnn/model.hpp"
#include "eixgnn/parallel.hpp"
#include "eixgnn/random.hpp"

namespace eixgnn {

inline constexpr double kEntropyEps = 1e-12;

/**
 * Shannon entropy (nats) of the relevance map normalised to a distribution:
 * q_i = (|rel_i| + eps) / sum_j (|rel_j| + eps). Absolute values are taken
 * because sampled Shapley relevances may be negative.
 */
inline double entropy(std::span<const double> relevance) {
  if (relevance.empty())
    throw ShapeMismatch("entropy of an empty relevance vector");
  double total = 0.0;
  for (double r : relevance)
    total += std::abs(r) + kEntropyEps;
  double h = 0.0;
  for (double r : relevance) {
    const double q = (std::abs(r) + kEntropyEps) / total;
    h -= q * std::log(q);
  }
  // Clamp rounding drift back into [0, ln N].
  return std::clamp(h, 0.0, std::log(static_cast<double>(relevance.size())));
}

inline double entropy(const Vector &relevance) {
  return entropy(std::span<const double>(relevance.data(),
                                         static_cast<std::size_t>(relevance.size())));
}

enum class Perturbation { gaussian, unit };

inline const char *to_string(Perturbation p) {
  return p == Perturbation::gaussian ? "gaussian" : "unit";
}

inline Perturbation parse_perturbation(const std::string &s) {
  if (s == "gaussian")
    return Perturbation::gaussian;
  if (s == "unit")
    return Perturbation::unit;
  throw ValidationError("unknown perturbation \"" + s +
                        "\" (expected gaussian or unit)");
}

struct InfidelityResult {
  double value = 0.0;
  double std_error = 0.0; // 0 for the unit perturbation
  std::size_t samples = 0;
};

namespace detail {

//! (<I, Xi>_F - (P_y(G) - P_y(X - I, A)))^2 with Xi_{n,j} = rel_n / d.
inline double infidelity_score(const Model &m, const Graph &g,
                               const Vector &relevance, std::size_t target,
                               double p_original, const Matrix &perturbation) {
  const double d = static_cast<double>(g.feature_dim());
  const double explained =
      (perturbation.rowwise().sum().array() * relevance.array()).sum() / d;
  const double p_perturbed =
      detail::forward_with_features(m, g, g.features() - perturbation)[target];
  const double diff = explained - (p_original - p_perturbed);
  return diff * diff;
}

} // namespace detail

/**
 * Infidelity of a node relevance vector. The perturbation I is an N x d
 * tensor: i.i.d. standard normal entries (mean over `samples` draws, with
 * standard error) or all ones (single deterministic draw). The score is
 * computed for the model's predicted class on the unperturbed graph.
 */
inline InfidelityResult infidelity(const Model &m, const Graph &g,
                                   const Vector &relevance, Perturbation kind,
                                   std::size_t samples, std::uint64_t seed,
                                   std::size_t workers = 1) {
  if (static_cast<std::size_t>(relevance.size()) != g.num_nodes())
    throw ShapeMismatch("relevance has " + std::to_string(relevance.size()) +
                        " entries, graph has " + std::to_string(g.num_nodes()) +
                        " nodes");
  const auto base = forward(m, g);
  const std::size_t target = base.argmax();
  const double p_original = base[target];
  const auto rows = static_cast<Eigen::Index>(g.num_nodes());
  const auto cols = static_cast<Eigen::Index>(g.feature_dim());

  InfidelityResult res;
  if (kind == Perturbation::unit) {
    res.value = detail::infidelity_score(m, g, relevance, target, p_original,
                                         Matrix::Ones(rows, cols));
    res.samples = 1;
    return res;
  }

  if (samples == 0)
    throw ValidationError("gaussian infidelity needs at least one sample");
  const std::uint64_t stage_seed = derive_seed(seed, streams::gaussian);
  std::vector<double> scores(samples);
  parallel_for(samples, workers, [&](std::size_t t) {
    Rng rng = make_rng(stage_seed, t);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix noise(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c)
        noise(r, c) = normal(rng);
    scores[t] =
        detail::infidelity_score(m, g, relevance, target, p_original, noise);
  });

  const auto n = static_cast<double>(samples);
  res.value = pairwise_sum(scores) / n;
  res.samples = samples;
  if (samples > 1) {
    std::vector<double> sq(samples);
    for (std::size_t t = 0; t < samples; ++t)
      sq[t] = (scores[t] - res.value) * (scores[t] - res.value);
    res.std_error = std::sqrt(pairwise_sum(sq) / (n - 1.0) / n);
  }
  return res;
}

struct MetricConfig {
  std::size_t inf_samples = 1000;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

struct MetricReport {
  double entropy = 0.0;
  double infidelity_gaussian = 0.0;
  double infidelity_gaussian_stderr = 0.0;
  double infidelity_unit = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

inline MetricReport evaluate_explanation(const Model &m, const Graph &g,
                                         const Vector &relevance,
                                         const MetricConfig &cfg) {
  MetricReport rep;
  rep.entropy = entropy(relevance);
  const auto gauss = infidelity(m, g, relevance, Perturbation::gaussian,
                                cfg.inf_samples, cfg.seed, cfg.workers);
  rep.infidelity_gaussian = gauss.value;
  rep.infidelity_gaussian_stderr = gauss.std_error;
  rep.infidelity_unit =
      infidelity(m, g, relevance, Perturbation::unit, 1, cfg.seed).value;
  rep.samples = cfg.inf_samples;
  rep.seed = cfg.seed;
  return rep;
}

} // namespace eixgnn
