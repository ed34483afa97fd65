// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "eixgnn/graph.hpp"
#include "eixgnn/json_util.hpp"

namespace eixgnn {

inline Graph graph_from_json(const nlohmann::json &j,
                             const std::string &path = "") {
  using namespace json_util;
  const std::size_t n = as_size(field(j, "num_nodes", path), join(path, "num_nodes"));

  bool directed = false;
  if (j.contains("directed"))
    directed = as_bool(j["directed"], join(path, "directed"));

  std::vector<Edge> edges;
  const std::string edges_path = join(path, "edges");
  const auto &jedges = as_array(field(j, "edges", path), edges_path);
  edges.reserve(jedges.size());
  for (std::size_t k = 0; k < jedges.size(); ++k) {
    const auto p = index(edges_path, k);
    const auto &e = as_array(jedges[k], p);
    if (e.size() != 2)
      throw FormatError(p, "expected [src, dst]");
    edges.push_back({as_size(e[0], index(p, 0)), as_size(e[1], index(p, 1))});
  }

  Matrix x = as_matrix(field(j, "features", path), join(path, "features"));

  std::optional<std::size_t> label;
  if (j.contains("label") && !j["label"].is_null())
    label = as_size(j["label"], join(path, "label"));

  std::size_t num_classes = 1;
  if (j.contains("num_classes"))
    num_classes = as_size(j["num_classes"], join(path, "num_classes"));

  return Graph(n, std::move(edges), std::move(x), directed, label, num_classes);
}

inline nlohmann::json graph_to_json(const Graph &g) {
  nlohmann::json edges = nlohmann::json::array();
  for (const Edge &e : g.edges())
    edges.push_back({e.src, e.dst});
  nlohmann::json j;
  j["num_nodes"] = g.num_nodes();
  j["directed"] = g.directed();
  j["edges"] = std::move(edges);
  j["features"] = json_util::to_json(g.features());
  j["label"] = g.label() ? nlohmann::json(*g.label()) : nlohmann::json(nullptr);
  j["num_classes"] = g.num_classes();
  return j;
}

inline Graph load_graph(const std::filesystem::path &path) {
  const auto j = json_util::read_file(path);
  try {
    return graph_from_json(j);
  } catch (const FormatError &e) {
    throw FormatError(path.string() + ":" + e.path(),
                      std::string(e.what()).substr(e.path().size() + 2));
  } catch (const ValidationError &e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

inline void save_graph(const Graph &g, const std::filesystem::path &path) {
  json_util::write_file(path, graph_to_json(g));
}

//! One graph of a dataset directory together with its manifest entry.
struct DatasetEntry {
  std::string file;
  std::string split;
  Graph graph;
};

struct Dataset {
  std::string name;
  std::vector<DatasetEntry> entries;
};

/**
 * Loads a dataset directory. `manifest.json` has the form
 *   {"name": "...", "graphs": [{"file": "g0.json", "split": "train"}, ...]}
 * where split is "train" or "test". `split_filter` keeps only entries with
 * that tag; "all" (or empty) keeps everything.
 */
inline Dataset load_dataset(const std::filesystem::path &dir,
                            const std::string &split_filter = "all") {
  using namespace json_util;
  const auto manifest = read_file(dir / "manifest.json");
  Dataset ds;
  ds.name = manifest.contains("name")
                ? as_string(manifest["name"], "name")
                : dir.filename().string();
  const auto &graphs = as_array(field(manifest, "graphs", ""), "graphs");
  for (std::size_t k = 0; k < graphs.size(); ++k) {
    const auto p = index("graphs", k);
    std::string file = as_string(field(graphs[k], "file", p), join(p, "file"));
    std::string split =
        as_string(field(graphs[k], "split", p), join(p, "split"));
    if (split != "train" && split != "test")
      throw FormatError(join(p, "split"), "expected \"train\" or \"test\"");
    if (!split_filter.empty() && split_filter != "all" && split != split_filter)
      continue;
    ds.entries.push_back({file, split, load_graph(dir / file)});
  }
  return ds;
}

inline void save_dataset(const Dataset &ds, const std::filesystem::path &dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json graphs = nlohmann::json::array();
  for (const auto &e : ds.entries) {
    save_graph(e.graph, dir / e.file);
    graphs.push_back({{"file", e.file}, {"split", e.split}});
  }
  json_util::write_file(dir / "manifest.json",
                        {{"name", ds.name}, {"graphs", std::move(graphs)}});
}

} // namespace eixgnn
