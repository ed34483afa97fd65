// SPDX-License-Identifier: Apache-2.0
//
// eixgnn: explain GCN graph classifiers, score explanations and run
// parameter sweeps / dataset benchmarks.
//
// Exit codes: 0 success, 1 runtime error, 2 invalid input or configuration.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "eixgnn/eixgnn.hpp"
#include "harness.hpp"

namespace fs = std::filesystem;
using namespace eixgnn;

namespace {

constexpr int kOk = 0;
constexpr int kRuntimeError = 1;
constexpr int kInvalidInput = 2;

std::shared_ptr<spdlog::logger> logger;

void setup_logging() {
  logger = spdlog::stderr_color_mt("eixgnn");
  logger->set_pattern("[%l] %v");
  auto level = spdlog::level::info;
  if (const char *env = std::getenv("EIX_LOG"))
    level = spdlog::level::from_str(env);
  logger->set_level(level);
}

struct Options {
  std::string model;
  std::string graph;
  std::string dataset;
  std::string explanation;
  std::string output;
  std::string table;
  std::string split = "all";
  std::size_t L = 15;
  double p = 0.2;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::size_t shapley_samples = 1000;
  std::size_t shapley_exact_max = 12;
  std::size_t inf_samples = 1000;
  std::string perturbation = "both";
  double damping = 1e-3;
  bool timings = false;
  std::string param;
  std::string grid;
  std::size_t repeats = 1;
};

void require_file(const std::string &path, const char *flag) {
  if (path.empty())
    throw ValidationError(std::string(flag) + " is required");
  if (!fs::exists(path))
    throw ValidationError(std::string(flag) + ": no such file: " + path);
}

void validate_run_config(const Options &o) {
  if (o.L < 2)
    throw TooFewConcepts("--L must be >= 2, got " + std::to_string(o.L));
  if (!(o.p > 0.0 && o.p <= 1.0))
    throw ValidationError("--p must lie in (0, 1], got " + harness::fmt(o.p));
  if (o.workers < 1)
    throw ValidationError("--workers must be >= 1");
  if (o.shapley_samples < 1)
    throw ValidationError("--shapley-samples must be >= 1");
  if (o.inf_samples < 1)
    throw ValidationError("--inf-samples must be >= 1");
  if (!(o.damping >= 0.0 && o.damping < 1.0))
    throw ValidationError("--damping must lie in [0, 1)");
  if (o.perturbation != "both")
    parse_perturbation(o.perturbation);
}

void check_compatible(const Model &m, const Graph &g, const std::string &name,
                      double p) {
  if (g.feature_dim() != m.feature_dim())
    throw DimensionMismatch(name + ": feature width " +
                            std::to_string(g.feature_dim()) +
                            " does not match model input width " +
                            std::to_string(m.feature_dim()));
  if (concept_size(g.num_nodes(), p) == 0)
    throw ConceptSizeZero(name + ": floor(N p) = 0 for N = " +
                          std::to_string(g.num_nodes()));
}

ExplainConfig explain_config(const Options &o, std::size_t workers) {
  ExplainConfig c;
  c.L = o.L;
  c.p = o.p;
  c.seed = o.seed;
  c.shapley_exact_max = o.shapley_exact_max;
  c.shapley_samples = o.shapley_samples;
  c.damping = o.damping;
  c.workers = workers;
  return c;
}

MetricConfig metric_config(const Options &o, std::uint64_t seed,
                           std::size_t workers) {
  return {o.inf_samples, seed, workers};
}

//! Writes to --output, or stdout when no output path is given.
void emit(const std::string &path, const std::string &content) {
  if (path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error("cannot write " + path);
  out << content;
}

// Runs `validate` and maps library errors to exit code 2; then runs `body`
// and maps any failure to exit code 1.
template <class Validate, class Body>
int guarded(const char *cmd, Validate &&validate, Body &&body) {
  try {
    validate();
  } catch (const std::exception &e) {
    logger->error("[{}] {}", cmd, e.what());
    return kInvalidInput;
  }
  try {
    return body();
  } catch (const std::exception &e) {
    logger->error("[{}] {}", cmd, e.what());
    return kRuntimeError;
  }
}

// ---------------------------------------------------------------------------

int cmd_explain(const Options &o) {
  std::unique_ptr<Model> model;
  std::unique_ptr<Graph> graph;
  return guarded(
      "explain",
      [&] {
        require_file(o.model, "--model");
        require_file(o.graph, "--graph");
        validate_run_config(o);
        model = std::make_unique<Model>(load_model(o.model));
        graph = std::make_unique<Graph>(load_graph(o.graph));
        check_compatible(*model, *graph, o.graph, o.p);
      },
      [&] {
        logger->info("[explain] N = {}, L = {}, p = {}, seed = {}",
                     graph->num_nodes(), o.L, o.p, o.seed);
        const auto ex = explain(*model, *graph, explain_config(o, o.workers));
        for (const auto &t : ex.meta.timings)
          logger->debug("[explain] stage {} took {:.3f} s", t.stage, t.seconds);
        if (!ex.meta.concept_graph.repaired_rows.empty())
          logger->info("[explain] {} concept-graph rows repaired",
                       ex.meta.concept_graph.repaired_rows.size());
        emit(o.output, explanation_to_json(ex, o.timings).dump() + "\n");
        return kOk;
      });
}

int cmd_metrics(const Options &o) {
  std::unique_ptr<Model> model;
  std::unique_ptr<Graph> graph;
  nlohmann::json explanation_json;
  Vector relevance;
  return guarded(
      "metrics",
      [&] {
        require_file(o.model, "--model");
        require_file(o.graph, "--graph");
        require_file(o.explanation, "--explanation");
        validate_run_config(o);
        model = std::make_unique<Model>(load_model(o.model));
        graph = std::make_unique<Graph>(load_graph(o.graph));
        if (graph->feature_dim() != model->feature_dim())
          throw DimensionMismatch("graph and model feature widths differ");
        explanation_json = json_util::read_file(o.explanation);
        relevance = explanation_from_json(explanation_json).node_relevance;
        if (static_cast<std::size_t>(relevance.size()) != graph->num_nodes())
          throw ShapeMismatch("explanation has " +
                              std::to_string(relevance.size()) +
                              " node relevances, graph has " +
                              std::to_string(graph->num_nodes()) + " nodes");
      },
      [&] {
        nlohmann::json report;
        const double h = entropy(relevance);
        report["entropy"] = h;
        std::cout << "entropy\t" << harness::fmt(h) << "\n";
        if (o.perturbation == "both" || o.perturbation == "gaussian") {
          const auto res = infidelity(*model, *graph, relevance,
                                      Perturbation::gaussian, o.inf_samples,
                                      o.seed, o.workers);
          report["infidelity_gaussian"] = res.value;
          report["infidelity_gaussian_stderr"] = res.std_error;
          std::cout << "infidelity_gaussian\t" << harness::fmt(res.value)
                    << "\tstderr\t" << harness::fmt(res.std_error)
                    << "\tsamples\t" << res.samples << "\n";
        }
        if (o.perturbation == "both" || o.perturbation == "unit") {
          const auto res = infidelity(*model, *graph, relevance,
                                      Perturbation::unit, 1, o.seed);
          report["infidelity_unit"] = res.value;
          std::cout << "infidelity_unit\t" << harness::fmt(res.value) << "\n";
        }
        report["samples"] = o.inf_samples;
        report["seed"] = o.seed;
        if (!o.output.empty()) {
          explanation_json["metrics"] = std::move(report);
          emit(o.output, explanation_json.dump() + "\n");
        }
        return kOk;
      });
}

std::vector<double> parse_grid(const std::string &grid) {
  std::vector<double> values;
  std::stringstream ss(grid);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty())
      continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception &) {
      used = 0;
    }
    if (used != item.size())
      throw ValidationError("--grid: not a number: \"" + item + "\"");
    values.push_back(v);
  }
  if (values.empty())
    throw ValidationError("--grid must list at least one value");
  return values;
}

void load_dataset_for(const Options &o, std::unique_ptr<Model> &model,
                      Dataset &ds) {
  require_file(o.model, "--model");
  if (o.dataset.empty())
    throw ValidationError("--dataset is required");
  if (!fs::exists(fs::path(o.dataset) / "manifest.json"))
    throw ValidationError("--dataset: no manifest.json in " + o.dataset);
  model = std::make_unique<Model>(load_model(o.model));
  ds = load_dataset(o.dataset, o.split);
  if (ds.entries.empty())
    throw ValidationError("dataset " + o.dataset + " has no graphs for split " +
                          o.split);
}

int cmd_sweep(const Options &o) {
  std::unique_ptr<Model> model;
  Dataset ds;
  std::vector<double> grid;
  return guarded(
      "sweep",
      [&] {
        if (o.param != "L" && o.param != "p")
          throw ValidationError("--param must be L or p");
        if (o.repeats < 1)
          throw ValidationError("--repeats must be >= 1");
        grid = parse_grid(o.grid);
        validate_run_config(o);
        load_dataset_for(o, model, ds);
        for (double v : grid) {
          Options probe = o;
          if (o.param == "L") {
            if (v < 2 || v != std::floor(v))
              throw TooFewConcepts("--grid: L values must be integers >= 2");
            probe.L = static_cast<std::size_t>(v);
          } else {
            probe.p = v;
          }
          validate_run_config(probe);
          for (const auto &e : ds.entries)
            check_compatible(*model, e.graph, e.file, probe.p);
        }
      },
      [&] {
        const std::size_t G = ds.entries.size();
        const std::size_t P = grid.size();
        const std::size_t R = o.repeats;
        std::vector<harness::RunOutcome> runs(G * P * R);
        // Job index = (param, graph, repeat) in row-major order.
        parallel_for(runs.size(), o.workers, [&](std::size_t job) {
          const std::size_t pi = job / (G * R);
          const std::size_t gi = (job / R) % G;
          const std::size_t rep = job % R;
          Options run = o;
          if (o.param == "L")
            run.L = static_cast<std::size_t>(grid[pi]);
          else
            run.p = grid[pi];
          run.seed = derive_seed(o.seed, rep);
          runs[job] = harness::explain_and_score(
              *model, ds.entries[gi].graph, explain_config(run, 1),
              metric_config(run, run.seed, 1));
        });

        std::ostringstream csv;
        csv << "# eixgnn-sweep v1 param=" << o.param << "\n";
        csv << "dataset,graph_id,param_value,repeat,entropy,infd_gauss,"
               "infd_unit,wallclock\n";
        bool any_failed = false;
        std::vector<std::vector<double>> ent(P), gau(P), uni(P), wall(P);
        for (std::size_t job = 0; job < runs.size(); ++job) {
          const std::size_t pi = job / (G * R);
          const std::size_t gi = (job / R) % G;
          const std::size_t rep = job % R;
          const auto &r = runs[job];
          if (!r.ok) {
            any_failed = true;
            logger->error("[sweep] {} {}={} repeat {}: {}",
                          ds.entries[gi].file, o.param,
                          harness::fmt(grid[pi]), rep, r.error);
            continue;
          }
          csv << ds.name << ',' << ds.entries[gi].file << ','
              << harness::fmt(grid[pi]) << ',' << rep << ','
              << harness::fmt(r.metrics.entropy) << ','
              << harness::fmt(r.metrics.infidelity_gaussian) << ','
              << harness::fmt(r.metrics.infidelity_unit) << ','
              << harness::fmt(r.wallclock) << '\n';
          ent[pi].push_back(r.metrics.entropy);
          gau[pi].push_back(r.metrics.infidelity_gaussian);
          uni[pi].push_back(r.metrics.infidelity_unit);
          wall[pi].push_back(r.wallclock);
        }
        for (std::size_t pi = 0; pi < P; ++pi) {
          using harness::fmt;
          csv << ds.name << ",__mean__," << fmt(grid[pi]) << ",,"
              << fmt(harness::mean(ent[pi])) << ','
              << fmt(harness::mean(gau[pi])) << ','
              << fmt(harness::mean(uni[pi])) << ','
              << fmt(harness::mean(wall[pi])) << '\n';
          csv << ds.name << ",__std__," << fmt(grid[pi]) << ",,"
              << fmt(harness::stddev(ent[pi])) << ','
              << fmt(harness::stddev(gau[pi])) << ','
              << fmt(harness::stddev(uni[pi])) << ','
              << fmt(harness::stddev(wall[pi])) << '\n';
        }
        emit(o.output, csv.str());

        // Medians per grid value and their relative spread across the grid.
        std::vector<double> med_e, med_g, med_u;
        for (std::size_t pi = 0; pi < P; ++pi) {
          med_e.push_back(harness::median(ent[pi]));
          med_g.push_back(harness::median(gau[pi]));
          med_u.push_back(harness::median(uni[pi]));
          logger->info("[sweep] {}={} median entropy {} infd_gauss {} "
                       "infd_unit {}",
                       o.param, harness::fmt(grid[pi]), med_e.back(),
                       med_g.back(), med_u.back());
        }
        std::ostream &summary = o.output.empty() ? std::cerr : std::cout;
        summary << "relative_spread_" << o.param
                << "\tentropy\t" << harness::fmt(harness::relative_spread(med_e))
                << "\tinfd_gauss\t"
                << harness::fmt(harness::relative_spread(med_g))
                << "\tinfd_unit\t"
                << harness::fmt(harness::relative_spread(med_u)) << "\n";
        return any_failed ? kRuntimeError : kOk;
      });
}

int cmd_benchmark(const Options &o) {
  std::unique_ptr<Model> model;
  Dataset ds;
  return guarded(
      "benchmark",
      [&] {
        validate_run_config(o);
        load_dataset_for(o, model, ds);
      },
      [&] {
        // Compatibility problems of single graphs are per-graph failures here.
        std::vector<harness::RunOutcome> runs(ds.entries.size());
        parallel_for(runs.size(), o.workers, [&](std::size_t i) {
          const auto &e = ds.entries[i];
          try {
            check_compatible(*model, e.graph, e.file, o.p);
          } catch (const std::exception &err) {
            runs[i].error = err.what();
            return;
          }
          runs[i] = harness::explain_and_score(*model, e.graph,
                                               explain_config(o, 1),
                                               metric_config(o, o.seed, 1));
        });

        std::ostringstream csv;
        csv << "# eixgnn-benchmark v1\n";
        csv << "dataset,graph_id,status,entropy,infd_gauss,infd_gauss_stderr,"
               "infd_unit,wallclock\n";
        std::vector<double> ent, gau, gse, uni, wall;
        std::size_t failed = 0;
        for (std::size_t i = 0; i < runs.size(); ++i) {
          const auto &r = runs[i];
          csv << ds.name << ',' << ds.entries[i].file << ',';
          if (!r.ok) {
            ++failed;
            logger->error("[benchmark] {}: {}", ds.entries[i].file, r.error);
            csv << "failed,,,,," << harness::fmt(r.wallclock) << '\n';
            continue;
          }
          csv << "ok," << harness::fmt(r.metrics.entropy) << ','
              << harness::fmt(r.metrics.infidelity_gaussian) << ','
              << harness::fmt(r.metrics.infidelity_gaussian_stderr) << ','
              << harness::fmt(r.metrics.infidelity_unit) << ','
              << harness::fmt(r.wallclock) << '\n';
          ent.push_back(r.metrics.entropy);
          gau.push_back(r.metrics.infidelity_gaussian);
          gse.push_back(r.metrics.infidelity_gaussian_stderr);
          uni.push_back(r.metrics.infidelity_unit);
          wall.push_back(r.wallclock);
        }
        using harness::fmt;
        using harness::mean;
        csv << ds.name << ",aggregate,mean," << fmt(mean(ent)) << ','
            << fmt(mean(gau)) << ',' << fmt(mean(gse)) << ',' << fmt(mean(uni))
            << ',' << fmt(mean(wall)) << '\n';
        emit(o.output, csv.str());

        using harness::scientific;
        using harness::stddev;
        std::ostringstream table;
        table << "| Dataset | Explainer | Entropy | Infidelity (Gaussian) | "
                 "Infidelity (unit) |\n"
              << "|---|---|---|---|---|\n"
              << "| " << ds.name << " | eixgnn | " << scientific(mean(ent))
              << " (± " << scientific(stddev(ent)) << ") | "
              << scientific(mean(gau)) << " (± " << scientific(stddev(gau))
              << ") | " << scientific(mean(uni)) << " (± "
              << scientific(stddev(uni)) << ") |\n";
        if (!o.table.empty())
          emit(o.table, table.str());
        (o.output.empty() ? std::cerr : std::cout) << table.str();
        logger->info("[benchmark] {} graphs, {} failed", runs.size(), failed);
        return failed > 0 ? kRuntimeError : kOk;
      });
}

void add_run_options(CLI::App *cmd, Options &o) {
  cmd->add_option("--L", o.L, "Number of concepts")->capture_default_str();
  cmd->add_option("--p", o.p, "Concept size fraction, in (0, 1]")
      ->capture_default_str();
  cmd->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  cmd->add_option("--workers", o.workers, "Worker threads")
      ->capture_default_str();
  cmd->add_option("--shapley-samples", o.shapley_samples,
                  "Permutations for Monte-Carlo Shapley values")
      ->capture_default_str();
  cmd->add_option("--shapley-exact-max", o.shapley_exact_max,
                  "Largest concept solved by exact enumeration")
      ->capture_default_str();
  cmd->add_option("--inf-samples", o.inf_samples,
                  "Gaussian draws for infidelity")
      ->capture_default_str();
  cmd->add_option("--perturbation", o.perturbation,
                  "gaussian, unit or both")
      ->capture_default_str();
  cmd->add_option("--damping", o.damping,
                  "Uniform mixing weight of the concept transition matrix")
      ->capture_default_str();
  cmd->add_option("--output", o.output, "Output file (default: stdout)");
}

} // namespace

int main(int argc, char **argv) {
  setup_logging();
  CLI::App app{"Concept-based Shapley explainer for GCN graph classifiers"};
  app.require_subcommand(1);
  Options o;

  auto *explain_cmd = app.add_subcommand("explain", "Explain one graph");
  explain_cmd->add_option("--model", o.model, "Model JSON");
  explain_cmd->add_option("--graph", o.graph, "Graph JSON");
  explain_cmd->add_flag("--timings", o.timings,
                        "Include stage wall-clock timings in the output");
  add_run_options(explain_cmd, o);

  auto *metrics_cmd =
      app.add_subcommand("metrics", "Score an explanation file");
  metrics_cmd->add_option("--model", o.model, "Model JSON");
  metrics_cmd->add_option("--graph", o.graph, "Graph JSON");
  metrics_cmd->add_option("--explanation", o.explanation,
                          "Explanation JSON written by `explain`");
  add_run_options(metrics_cmd, o);

  auto *sweep_cmd =
      app.add_subcommand("sweep", "Metric sweep over L or p on a dataset");
  sweep_cmd->add_option("--model", o.model, "Model JSON");
  sweep_cmd->add_option("--dataset", o.dataset, "Dataset directory");
  sweep_cmd->add_option("--split", o.split, "all, train or test")
      ->capture_default_str();
  sweep_cmd->add_option("--param", o.param, "Swept parameter: L or p");
  sweep_cmd->add_option("--grid", o.grid, "Comma-separated values");
  sweep_cmd->add_option("--repeats", o.repeats, "Seeds per grid value")
      ->capture_default_str();
  add_run_options(sweep_cmd, o);

  auto *bench_cmd =
      app.add_subcommand("benchmark", "Per-graph metrics over a dataset");
  bench_cmd->add_option("--model", o.model, "Model JSON");
  bench_cmd->add_option("--dataset", o.dataset, "Dataset directory");
  bench_cmd->add_option("--split", o.split, "all, train or test")
      ->capture_default_str();
  bench_cmd->add_option("--table", o.table,
                        "Also write the aggregate table (markdown) here");
  add_run_options(bench_cmd, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInvalidInput;
  }

  if (explain_cmd->parsed())
    return cmd_explain(o);
  if (metrics_cmd->parsed())
    return cmd_metrics(o);
  if (sweep_cmd->parsed())
    return cmd_sweep(o);
  return cmd_benchmark(o);
}
