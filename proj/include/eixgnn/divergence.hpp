// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>

#include "eixgnn/model.hpp"

namespace eixgnn {

/**
 * Kullback-Leibler divergence D_KL(p || q) = sum_c p_c log(p_c / q_c).
 * Terms with p_c = 0 contribute 0. Model outputs never contain zeros (see
 * kProbFloor), so the result is finite whenever both inputs come from
 * forward().
 */
inline double kl_divergence(const Vector &p, const Vector &q) {
  if (p.size() != q.size())
    throw DimensionMismatch("kl_divergence: sizes differ");
  double sum = 0.0;
  for (Eigen::Index c = 0; c < p.size(); ++c)
    if (p(c) > 0.0)
      sum += p(c) * std::log(p(c) / q(c));
  // Rounding can leave a tiny negative value for near-identical inputs.
  return sum > 0.0 ? sum : 0.0;
}

inline double kl_divergence(const ClassDistribution &p,
                            const ClassDistribution &q) {
  return kl_divergence(p.probs, q.probs);
}

} // namespace eixgnn
