// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "eixgnn/graph_io.hpp"
#include "eixgnn/model.hpp"

namespace eixgnn {

/**
 * Round-trip fixtures written by a training front end:
 *   [{"graph": "g0.json", "probs": [0.9, 0.1]}, ...]
 * Graph paths are relative to the fixtures file.
 */
struct Fixture {
  std::string file;
  Graph graph;
  Vector probs;
};

inline std::vector<Fixture> load_fixtures(const std::filesystem::path &path) {
  using namespace json_util;
  const auto j = read_file(path);
  const auto dir = path.parent_path();
  std::vector<Fixture> out;
  try {
    const auto &items = as_array(j, "");
    for (std::size_t k = 0; k < items.size(); ++k) {
      const auto p = index("", k);
      std::string file = as_string(field(items[k], "graph", p), join(p, "graph"));
      Vector probs = as_vector(field(items[k], "probs", p), join(p, "probs"));
      out.push_back({file, load_graph(dir / file), std::move(probs)});
    }
  } catch (const FormatError &e) {
    throw FormatError(path.string() + ":" + e.path(),
                      std::string(e.what()).substr(e.path().size() + 2));
  }
  return out;
}

inline void save_fixtures(const std::vector<Fixture> &fixtures,
                          const std::filesystem::path &path) {
  nlohmann::json items = nlohmann::json::array();
  for (const auto &f : fixtures) {
    save_graph(f.graph, path.parent_path() / f.file);
    items.push_back({{"graph", f.file}, {"probs", json_util::to_json(f.probs)}});
  }
  json_util::write_file(path, items);
}

//! Infinity-norm gap between stored and recomputed probabilities, per fixture.
inline std::vector<double> fixture_gaps(const Model &m,
                                        const std::vector<Fixture> &fixtures) {
  std::vector<double> gaps;
  gaps.reserve(fixtures.size());
  for (const auto &f : fixtures) {
    const Vector p = forward(m, f.graph).probs;
    if (p.size() != f.probs.size())
      throw ShapeMismatch(f.file + ": fixture has " +
                          std::to_string(f.probs.size()) +
                          " probabilities, model has " +
                          std::to_string(p.size()) + " classes");
    gaps.push_back((p - f.probs).cwiseAbs().maxCoeff());
  }
  return gaps;
}

} // namespace eixgnn
