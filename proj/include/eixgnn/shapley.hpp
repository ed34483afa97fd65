// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <bit>
#include <concepts>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "eixgnn/graph.hpp"
#include "eixgnn/model.hpp"
#include "eixgnn/parallel.hpp"
#include "eixgnn/random.hpp"

namespace eixgnn {

// A payoff is any callable double(std::span<const std::uint8_t>) taking a
// membership mask over the K players. It must be safe to call concurrently.
template <class F>
concept Payoff = requires(const F &f, std::span<const std::uint8_t> s) {
  { f(s) } -> std::convertible_to<double>;
};

enum class ShapleyMethod { exact, monte_carlo };

inline const char *to_string(ShapleyMethod m) {
  return m == ShapleyMethod::exact ? "exact" : "monte_carlo";
}

struct ShapleyResult {
  Vector values;
  ShapleyMethod method = ShapleyMethod::exact;
  std::size_t samples = 0; // permutations drawn; 0 for exact
  Vector std_error;        // zeros for exact
};

struct ShapleyConfig {
  std::size_t k_exact_max = 12;
  std::size_t samples = 1000;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

//! Hard ceiling for full enumeration regardless of configuration.
inline constexpr std::size_t kExactHardLimit = 30;

//! |S|! (K - 1 - |S|)! / K! for |S| = 0..K-1.
inline std::vector<double> shapley_weights(std::size_t K) {
  std::vector<double> w(K);
  double binom = 1.0; // C(K - 1, s)
  for (std::size_t s = 0; s < K; ++s) {
    w[s] = 1.0 / (static_cast<double>(K) * binom);
    binom = binom * static_cast<double>(K - 1 - s) / static_cast<double>(s + 1);
  }
  return w;
}

/**
 * Exact Shapley values by enumerating all 2^K coalitions. Each coalition
 * payoff is evaluated exactly once and memoised; the K sums over subsets
 * are then formed from the table.
 */
template <Payoff F>
ShapleyResult shapley_exact(std::size_t K, const F &payoff,
                            std::size_t k_exact_max = 12,
                            std::size_t workers = 1) {
  if (K == 0)
    throw InvalidNodeSet("shapley_exact: game has no players");
  if (K > k_exact_max || K > kExactHardLimit)
    throw TooLargeForExact("K = " + std::to_string(K) +
                           " exceeds the exact limit " +
                           std::to_string(std::min(k_exact_max,
                                                   kExactHardLimit)));
  const std::size_t subsets = std::size_t{1} << K;
  std::vector<double> table(subsets);
  parallel_for(subsets, workers, [&](std::size_t mask) {
    std::vector<std::uint8_t> members(K);
    for (std::size_t i = 0; i < K; ++i)
      members[i] = static_cast<std::uint8_t>((mask >> i) & 1U);
    table[mask] = static_cast<double>(payoff(std::span<const std::uint8_t>(members)));
  });

  const auto w = shapley_weights(K);
  ShapleyResult res;
  res.method = ShapleyMethod::exact;
  res.values = Vector::Zero(static_cast<Eigen::Index>(K));
  res.std_error = Vector::Zero(static_cast<Eigen::Index>(K));
  for (std::size_t i = 0; i < K; ++i) {
    const std::size_t bit = std::size_t{1} << i;
    double acc = 0.0;
    for (std::size_t mask = 0; mask < subsets; ++mask) {
      if (mask & bit)
        continue;
      const auto size = static_cast<std::size_t>(std::popcount(mask));
      acc += w[size] * (table[mask | bit] - table[mask]);
    }
    res.values(static_cast<Eigen::Index>(i)) = acc;
  }
  return res;
}

//! Marginal contributions along one player ordering.
struct PermutationWalk {
  std::vector<double> contributions; // indexed by player
  double v_empty = 0.0;
  double v_full = 0.0;
};

template <Payoff F>
PermutationWalk walk_permutation(std::span<const std::size_t> order,
                                 const F &payoff) {
  const std::size_t K = order.size();
  std::vector<std::uint8_t> members(K, 0);
  PermutationWalk walk;
  walk.contributions.assign(K, 0.0);
  double prev = static_cast<double>(payoff(std::span<const std::uint8_t>(members)));
  walk.v_empty = prev;
  for (std::size_t player : order) {
    members[player] = 1;
    const double cur =
        static_cast<double>(payoff(std::span<const std::uint8_t>(members)));
    walk.contributions[player] = cur - prev;
    prev = cur;
  }
  walk.v_full = prev;
  return walk;
}

//! Uniform random ordering of K players for permutation t of a run.
inline std::vector<std::size_t> sample_permutation(std::size_t K,
                                                   std::uint64_t seed,
                                                   std::size_t t) {
  std::vector<std::size_t> order(K);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = make_rng(seed, t);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

/**
 * Monte-Carlo Shapley estimate from T uniformly random player orderings.
 * Each ordering contributes v(pred_i + i) - v(pred_i) to every player i;
 * values are the per-player means and std_error the sample standard
 * deviation over orderings divided by sqrt(T) (0 when T = 1). Ordering t is
 * drawn from the stream (seed, t), so results do not depend on `workers`.
 */
template <Payoff F>
ShapleyResult shapley_mc(std::size_t K, const F &payoff, std::size_t T,
                         std::uint64_t seed, std::size_t workers = 1) {
  if (K == 0)
    throw InvalidNodeSet("shapley_mc: game has no players");
  if (T == 0)
    throw ValidationError("shapley_mc: need at least one sample");

  std::vector<std::vector<double>> contrib(T);
  parallel_for(T, workers, [&](std::size_t t) {
    const auto order = sample_permutation(K, seed, t);
    contrib[t] = walk_permutation(std::span<const std::size_t>(order), payoff)
                     .contributions;
  });

  ShapleyResult res;
  res.method = ShapleyMethod::monte_carlo;
  res.samples = T;
  res.values = Vector::Zero(static_cast<Eigen::Index>(K));
  res.std_error = Vector::Zero(static_cast<Eigen::Index>(K));
  std::vector<double> column(T);
  for (std::size_t i = 0; i < K; ++i) {
    for (std::size_t t = 0; t < T; ++t)
      column[t] = contrib[t][i];
    const double mean = pairwise_sum(column) / static_cast<double>(T);
    res.values(static_cast<Eigen::Index>(i)) = mean;
    if (T > 1) {
      for (auto &c : column)
        c = (c - mean) * (c - mean);
      const double var = pairwise_sum(column) / static_cast<double>(T - 1);
      res.std_error(static_cast<Eigen::Index>(i)) =
          std::sqrt(var / static_cast<double>(T));
    }
  }
  return res;
}

//! Exact enumeration when K <= k_exact_max, Monte-Carlo otherwise.
template <Payoff F>
ShapleyResult shapley_value(std::size_t K, const F &payoff,
                            const ShapleyConfig &cfg) {
  if (K <= cfg.k_exact_max && K <= kExactHardLimit)
    return shapley_exact(K, payoff, cfg.k_exact_max, cfg.workers);
  return shapley_mc(K, payoff, cfg.samples, cfg.seed, cfg.workers);
}

/**
 * Cooperative game played by the nodes of one concept. The payoff of a
 * coalition is the probability of `target_class` when the model sees the
 * concept with the features of every non-member node zeroed.
 *
 * Holds references: the model and concept must outlive the game.
 */
class CoalitionGame {
public:
  CoalitionGame(const Model &model, const Subgraph &members,
                std::size_t target_class)
      : model_(&model), concept_(&members), target_class_(target_class) {
    if (members.size() == 0)
      throw EmptyNodeSet("coalition game over an empty concept");
    if (target_class >= model.num_classes())
      throw ValidationError("target class " + std::to_string(target_class) +
                            " out of range");
  }

  std::size_t players() const noexcept { return concept_->size(); }
  std::size_t target_class() const noexcept { return target_class_; }
  const Subgraph &concept_subgraph() const noexcept { return *concept_; }
  const Model &model() const noexcept { return *model_; }

  double operator()(std::span<const std::uint8_t> coalition) const {
    return masked_forward(*model_, *concept_, coalition)[target_class_];
  }

private:
  const Model *model_;
  const Subgraph *concept_;
  std::size_t target_class_;
};

inline double payoff(const CoalitionGame &game,
                     std::span<const std::uint8_t> coalition) {
  return game(coalition);
}

inline ShapleyResult concept_relevance(const CoalitionGame &game,
                                       const ShapleyConfig &cfg) {
  return shapley_value(game.players(), game, cfg);
}

} // namespace eixgnn
