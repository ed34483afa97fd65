// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "eixgnn/concepts.hpp"
#include "eixgnn/divergence.hpp"
#include "eixgnn/graph.hpp"
#include "eixgnn/model.hpp"
#include "eixgnn/parallel.hpp"

namespace eixgnn {

//! Edge density: c M / (N (N - 1)) with c = 2 for undirected graphs and 1
//! for directed ones. Graphs with fewer than two nodes have density 0.
inline double edge_density(const Graph &g) {
  const auto n = static_cast<double>(g.num_nodes());
  if (g.num_nodes() < 2)
    return 0.0;
  const double factor = g.directed() ? 1.0 : 2.0;
  return factor * static_cast<double>(g.num_edges()) / (n * (n - 1.0));
}

inline double edge_density(const Subgraph &sg) {
  return edge_density(sg.graph());
}

//! s_f(C_i, C_j) = D_KL(f*(C_i) || f*(C_j)).
inline double concept_signal_similarity(const Model &m, const Subgraph &ci,
                                        const Subgraph &cj) {
  return kl_divergence(forward(m, ci), forward(m, cj));
}

struct EigenOptions {
  double tolerance = 1e-10;
  std::size_t max_iterations = 100000;
};

struct EigenResult {
  Vector r;
  std::size_t iterations = 0;
  double residual = 0.0; // ||A^T r - r||_inf
  bool converged = false;
};

inline void check_stochastic(const Matrix &a_hat, double tol = 1e-9) {
  if (a_hat.rows() != a_hat.cols() || a_hat.rows() == 0)
    throw NotStochastic("matrix must be square and nonempty");
  if (!a_hat.allFinite())
    throw NotStochastic("matrix has non-finite entries");
  if (a_hat.minCoeff() < 0.0)
    throw NotStochastic("matrix has negative entries");
  for (Eigen::Index i = 0; i < a_hat.rows(); ++i) {
    const double s = a_hat.row(i).sum();
    if (std::abs(s - 1.0) > tol)
      throw NotStochastic("row " + std::to_string(i) + " sums to " +
                          std::to_string(s));
  }
}

/**
 * Stationary vector r = A^T r of a row-stochastic matrix by power iteration
 * on A^T, starting from the uniform vector and renormalising to unit L1 norm
 * after every step. Stops when successive iterates differ by less than
 * `tolerance` in the max norm, or after `max_iterations`.
 */
inline EigenResult eigencentrality(const Matrix &a_hat,
                                   const EigenOptions &opts = {}) {
  check_stochastic(a_hat);
  const Eigen::Index n = a_hat.rows();
  const Matrix at = a_hat.transpose();

  EigenResult res;
  res.r = Vector::Constant(n, 1.0 / static_cast<double>(n));
  for (res.iterations = 1; res.iterations <= opts.max_iterations;
       ++res.iterations) {
    Vector next = at * res.r;
    next /= next.sum();
    const double delta = (next - res.r).lpNorm<Eigen::Infinity>();
    res.r = std::move(next);
    if (delta < opts.tolerance) {
      res.converged = true;
      break;
    }
  }
  res.iterations = std::min(res.iterations, opts.max_iterations);
  res.residual = (at * res.r - res.r).lpNorm<Eigen::Infinity>();
  return res;
}

//! (1 - delta) A + delta / L * ones.
inline Matrix damp(const Matrix &a_hat, double delta) {
  const auto n = static_cast<double>(a_hat.rows());
  return ((1.0 - delta) * a_hat.array() + delta / n).matrix();
}

struct ConceptGraphReport {
  std::vector<std::size_t> repaired_rows;    // all-zero rows made uniform
  std::vector<std::size_t> density_floored;  // concepts with d = 0
  double damping = 0.0;
  std::size_t iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

/**
 * Concept graph K_L. `a` holds the raw pairwise weights (zero diagonal),
 * `a_hat` the row-normalised, damped transition matrix and `r` its
 * stationary vector, i.e. the eigencentrality of each concept.
 */
struct ConceptGraph {
  Matrix a;
  Matrix a_hat;
  Vector r;
  ConceptGraphReport report;
};

/**
 * Builds a_hat = damp(diag(a e)^-1 a) from raw weights and solves for r.
 * Rows of `a` that sum to zero are replaced by the uniform off-diagonal row
 * before normalisation and listed in report.repaired_rows.
 */
inline ConceptGraph concept_graph_from_weights(Matrix a, double damping = 1e-3,
                                               const EigenOptions &opts = {}) {
  const Eigen::Index L = a.rows();
  if (a.cols() != L || L < 2)
    throw TooFewConcepts("concept graph needs a square matrix with L >= 2");
  if (!a.allFinite() || a.minCoeff() < 0.0)
    throw ValidationError("concept weights must be finite and non-negative");
  if (a.diagonal().cwiseAbs().maxCoeff() != 0.0)
    throw ValidationError("concept weights must have a zero diagonal");
  if (!(damping >= 0.0 && damping < 1.0))
    throw ValidationError("damping must lie in [0, 1)");

  ConceptGraph kg;
  Matrix normalized = a;
  for (Eigen::Index i = 0; i < L; ++i) {
    double s = a.row(i).sum();
    if (s <= 0.0) {
      kg.report.repaired_rows.push_back(static_cast<std::size_t>(i));
      normalized.row(i).setOnes();
      normalized(i, i) = 0.0;
      s = static_cast<double>(L - 1);
    }
    normalized.row(i) /= s;
  }
  kg.a = std::move(a);
  kg.a_hat = damp(normalized, damping);
  const auto eig = eigencentrality(kg.a_hat, opts);
  kg.r = eig.r;
  kg.report.damping = damping;
  kg.report.iterations = eig.iterations;
  kg.report.residual = eig.residual;
  kg.report.converged = eig.converged;
  return kg;
}

/**
 * Pairwise concept weights a_ij = d(C_i) / d(C_j) * D_KL(f*(C_i) || f*(C_j))
 * for i != j, followed by normalisation and the eigencentrality solve.
 * Densities of edgeless concepts are floored at 1 / (k (k - 1)) for concepts
 * of k nodes, i.e. one virtual edge.
 */
inline ConceptGraph build_concept_graph(const Model &m, const ConceptSet &cs,
                                        double damping = 1e-3,
                                        std::size_t workers = 1,
                                        const EigenOptions &opts = {}) {
  const std::size_t L = cs.concepts.size();
  if (L < 2)
    throw TooFewConcepts("concept graph needs L >= 2, got " +
                         std::to_string(L));

  std::vector<ClassDistribution> outputs(L);
  parallel_for(L, workers,
               [&](std::size_t l) { outputs[l] = forward(m, cs.concepts[l]); });

  std::vector<std::size_t> floored;
  std::vector<double> density(L);
  for (std::size_t l = 0; l < L; ++l) {
    density[l] = edge_density(cs.concepts[l]);
    if (density[l] <= 0.0) {
      const auto k = static_cast<double>(cs.concepts[l].size());
      density[l] = 1.0 / std::max(1.0, k * (k - 1.0));
      floored.push_back(l);
    }
  }

  const auto n = static_cast<Eigen::Index>(L);
  Matrix a = Matrix::Zero(n, n);
  parallel_for(L * L, workers, [&](std::size_t idx) {
    const std::size_t i = idx / L;
    const std::size_t j = idx % L;
    if (i == j)
      return;
    a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
        density[i] / density[j] * kl_divergence(outputs[i], outputs[j]);
  });

  ConceptGraph kg = concept_graph_from_weights(std::move(a), damping, opts);
  kg.report.density_floored = std::move(floored);
  return kg;
}

} // namespace eixgnn
