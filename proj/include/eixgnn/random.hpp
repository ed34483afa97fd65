// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

namespace eixgnn {

using Rng = std::mt19937_64;

//! SplitMix64 finalizer. Used to derive independent child seeds so that
//! parallel work items draw from streams fixed by their index, not by the
//! order in which workers pick them up.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                    std::uint64_t stream) noexcept {
  return mix64(mix64(seed) ^ (stream * 0xd1b54a32d192ed03ULL + 1));
}

// Stream tags for the pipeline stages.
namespace streams {
inline constexpr std::uint64_t concepts = 1;
inline constexpr std::uint64_t shapley = 2;
inline constexpr std::uint64_t gaussian = 3;
} // namespace streams

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  return Rng{derive_seed(seed, stream)};
}

} // namespace eixgnn
