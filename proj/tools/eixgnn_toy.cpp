// SPDX-License-Identifier: Apache-2.0
//
// Writes the synthetic fixture set: a cycles-vs-stars dataset, a
// random-weight GCN for it, and an 8-node graph with a uniform relevance
// explanation.

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "eixgnn/eixgnn.hpp"
#include "eixgnn/toy.hpp"

namespace fs = std::filesystem;
using namespace eixgnn;

int main(int argc, char **argv) {
  CLI::App app{"Generate the toy fixture set"};
  std::string out_dir = "data";
  std::size_t count = 20;
  std::uint64_t seed = 2022;
  app.add_option("--output-dir", out_dir, "Destination directory")
      ->capture_default_str();
  app.add_option("--graphs", count, "Number of toy graphs")
      ->capture_default_str();
  app.add_option("--seed", seed, "Generator seed")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  const fs::path root(out_dir);
  fs::create_directories(root);
  save_dataset(toy::make_dataset(count, seed), root / "toy");
  save_model(toy::random_model({}, seed), root / "toy_model.json");

  // Uniform relevance on an 8-node cycle: entropy ln 8.
  Rng rng(derive_seed(seed, 8));
  const Graph g8 = toy::cycle_graph(8, rng);
  fs::create_directories(root / "uniform_n8");
  save_graph(g8, root / "uniform_n8" / "graph.json");
  json_util::write_file(root / "uniform_n8" / "explanation.json",
                        {{"node_relevance", std::vector<double>(8, 0.125)}});

  std::cout << "wrote fixtures to " << root << "\n";
  return 0;
}
