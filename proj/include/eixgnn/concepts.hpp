// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "eixgnn/divergence.hpp"
#include "eixgnn/graph.hpp"
#include "eixgnn/model.hpp"
#include "eixgnn/parallel.hpp"
#include "eixgnn/random.hpp"

namespace eixgnn {

//! s(v_i, v_j): KL divergence between f*(G) and f* on G with edge (i, j)
//! removed. `base` is forward(m, g), passed in to avoid recomputing it.
inline double node_disturbance(const Model &m, const Graph &g,
                               const ClassDistribution &base, std::size_t i,
                               std::size_t j) {
  return kl_divergence(base, forward(m, edge_removed(g, i, j)));
}

inline double node_disturbance(const Model &m, const Graph &g, std::size_t i,
                               std::size_t j) {
  return node_disturbance(m, g, forward(m, g), i, j);
}

/**
 * Prior node relevance. alpha_i is the mean disturbance over the neighbours
 * of node i (0 for isolated nodes); probs = alpha / sum(alpha). When every
 * alpha is zero the prior falls back to uniform and `uniform_fallback` is
 * set.
 */
struct NodePrior {
  Vector alpha;
  Vector probs;
  bool uniform_fallback = false;
};

inline NodePrior compute_prior(const Model &m, const Graph &g,
                               std::size_t workers = 1) {
  const std::size_t n = g.num_nodes();
  const auto base = forward(m, g);

  // Undirected edges are shared by both endpoints, so one model call per
  // stored edge covers both s(i, j) and s(j, i).
  const auto &edges = g.edges();
  std::vector<double> s(edges.size());
  parallel_for(edges.size(), workers, [&](std::size_t k) {
    s[k] = node_disturbance(m, g, base, edges[k].src, edges[k].dst);
  });

  Vector sum = Vector::Zero(static_cast<Eigen::Index>(n));
  std::vector<std::size_t> count(n, 0);
  for (std::size_t k = 0; k < edges.size(); ++k) {
    sum(static_cast<Eigen::Index>(edges[k].src)) += s[k];
    ++count[edges[k].src];
    if (!g.directed()) {
      sum(static_cast<Eigen::Index>(edges[k].dst)) += s[k];
      ++count[edges[k].dst];
    }
  }

  NodePrior prior;
  prior.alpha = Vector::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    if (count[i] > 0)
      prior.alpha(static_cast<Eigen::Index>(i)) =
          sum(static_cast<Eigen::Index>(i)) / static_cast<double>(count[i]);

  const double total = prior.alpha.sum();
  if (total > 0.0 && std::isfinite(total)) {
    prior.probs = prior.alpha / total;
  } else {
    prior.probs = Vector::Constant(static_cast<Eigen::Index>(n),
                                   1.0 / static_cast<double>(n));
    prior.uniform_fallback = true;
  }
  return prior;
}

//! floor(N p), tolerant to p being a rounded decimal (0.29 * 100 -> 29).
inline std::size_t concept_size(std::size_t num_nodes, double p) {
  return static_cast<std::size_t>(
      std::floor(static_cast<double>(num_nodes) * p + 1e-9));
}

struct ConceptSet {
  std::vector<Subgraph> concepts;
  double p = 0.0;
  std::size_t L = 0;
  std::uint64_t seed = 0;
  std::size_t concept_size = 0;
};

/**
 * Draws `size` distinct node ids by sequential weighted sampling without
 * replacement: each draw picks a remaining node with probability
 * proportional to its weight. If the remaining weight is exhausted before
 * `size` nodes are drawn, the rest are drawn uniformly from the remaining
 * nodes. Result is sorted.
 */
inline std::vector<std::size_t>
sample_without_replacement(const Vector &weights, std::size_t size, Rng &rng) {
  const auto n = static_cast<std::size_t>(weights.size());
  std::vector<double> w(weights.data(), weights.data() + n);
  std::vector<std::uint8_t> taken(n, 0);
  std::vector<std::size_t> out;
  out.reserve(size);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  for (std::size_t draw = 0; draw < size; ++draw) {
    double total = 0.0;
    std::size_t remaining = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (!taken[i]) {
        total += w[i];
        ++remaining;
      }

    std::size_t pick = n;
    if (total > 0.0) {
      const double u = unif(rng) * total;
      double acc = 0.0;
      std::size_t last_positive = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (taken[i] || w[i] <= 0.0)
          continue;
        last_positive = i;
        acc += w[i];
        if (u < acc) {
          pick = i;
          break;
        }
      }
      if (pick == n)
        pick = last_positive;
    } else {
      std::uniform_int_distribution<std::size_t> idx(0, remaining - 1);
      std::size_t target = idx(rng);
      for (std::size_t i = 0; i < n; ++i)
        if (!taken[i] && target-- == 0) {
          pick = i;
          break;
        }
    }
    taken[pick] = 1;
    out.push_back(pick);
  }
  std::sort(out.begin(), out.end());
  return out;
}

/**
 * Samples L concepts of floor(N p) nodes each from the prior. Concepts are
 * independent of each other (they may overlap); concept l draws from its own
 * RNG stream derived from (seed, l), so the result does not depend on
 * `workers`.
 */
inline ConceptSet sample_concepts(const NodePrior &prior, const Graph &g,
                                  std::size_t L, double p, std::uint64_t seed,
                                  std::size_t workers = 1) {
  if (static_cast<std::size_t>(prior.probs.size()) != g.num_nodes())
    throw ShapeMismatch("prior has " + std::to_string(prior.probs.size()) +
                        " entries, graph has " +
                        std::to_string(g.num_nodes()) + " nodes");
  if (!(p > 0.0 && p <= 1.0))
    throw ValidationError("p must lie in (0, 1], got " + std::to_string(p));
  if (L < 2)
    throw TooFewConcepts("need at least 2 concepts, got L = " +
                         std::to_string(L));
  const std::size_t size = concept_size(g.num_nodes(), p);
  if (size == 0)
    throw ConceptSizeZero("floor(N p) = 0 for N = " +
                          std::to_string(g.num_nodes()) +
                          ", p = " + std::to_string(p));

  const std::uint64_t stage_seed = derive_seed(seed, streams::concepts);
  std::vector<std::vector<std::size_t>> ids(L);
  parallel_for(L, workers, [&](std::size_t l) {
    Rng rng = make_rng(stage_seed, l);
    ids[l] = sample_without_replacement(prior.probs, size, rng);
  });

  ConceptSet cs;
  cs.p = p;
  cs.L = L;
  cs.seed = seed;
  cs.concept_size = size;
  cs.concepts.reserve(L);
  for (const auto &nodes : ids)
    cs.concepts.push_back(induced_subgraph(g, nodes));
  return cs;
}

} // namespace eixgnn
