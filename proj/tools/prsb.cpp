// Copyright 2026 The PRSB Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "CLI11.hpp"
#include "prsb/baselines.hpp"
#include "prsb/eval.hpp"
#include "prsb/experiments.hpp"
#include "prsb/io.hpp"
#include "prsb/kernels.hpp"
#include "prsb/network.hpp"
#include "prsb/simdata.hpp"
#include "prsb/trainer.hpp"

#include <omp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace prsb;

namespace {

constexpr const char* kConfigHelp =
    "Every subcommand accepts --config FILE: a flat text file of key=value lines\n"
    "using the long option names without dashes (e.g. eta=0.05, epochs=100).\n"
    "Command-line flags override the file, which overrides the defaults;\n"
    "required options must still be given on the command line.\n"
    "PRSB_THREADS caps the number of worker threads.";

const std::vector<std::string> kProblems = {"checkerboard", "friedman", "hypercube", "linear"};

// Fills options not given on the command line from a flat key=value file.
void apply_config(CLI::App* cmd, const std::string& path) {
  if (path.empty()) return;
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_file(path);
  } catch (const CLI::FileError&) {
    throw CLI::ValidationError("--config", path + ": cannot open file");
  }
  for (const auto& item : items) {
    CLI::Option* opt = item.parents.empty() && item.name != "config" ? cmd->get_option_no_throw("--" + item.name)
                                                                      : nullptr;
    if (opt == nullptr) throw CLI::ValidationError("--config", path + ": unknown key '" + item.fullname() + "'");
    if (opt->count() > 0) continue;
    opt->add_result(item.inputs);
    opt->run_callback();
  }
}

void progress(const std::string& line) {
#pragma omp critical(prsb_progress)
  std::cerr << line << std::endl;
}

// Output files are written next to their destination and renamed into place.
template <class Writer>
void write_atomically(const fs::path& path, Writer&& writer) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".partial";
  writer(tmp);
  fs::rename(tmp, path);
}

std::uint64_t parse_u64(const std::string& text) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) throw CLI::ValidationError("not an integer: " + text);
  return v;
}

/// "0..9", "3" or "0,2,5".
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const auto lo = parse_u64(text.substr(0, dots));
    const auto hi = parse_u64(text.substr(dots + 2));
    if (hi < lo) throw CLI::ValidationError("empty seed range " + text);
    for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
    return seeds;
  }
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) seeds.push_back(parse_u64(item));
  if (seeds.empty()) throw CLI::ValidationError("no seeds given");
  return seeds;
}

std::pair<std::size_t, std::size_t> parse_grid_shape(const std::string& text) {
  const auto x = text.find_first_of("xX");
  if (x == std::string::npos) throw CLI::ValidationError("--fused expects HxW, got " + text);
  return {static_cast<std::size_t>(parse_u64(text.substr(0, x))),
          static_cast<std::size_t>(parse_u64(text.substr(x + 1)))};
}

std::vector<std::size_t> read_indices(const fs::path& path) {
  std::vector<std::size_t> out;
  const auto lines = io::parse_name_list(io::read_file(path));
  for (std::size_t k = 0; k < lines.size(); ++k) {
    try {
      out.push_back(static_cast<std::size_t>(parse_u64(lines[k])));
    } catch (const std::exception&) {
      throw io::ParseError(path.string(), k + 1, 1, "expected a 0-based feature index, got '" + lines[k] + "'");
    }
  }
  return out;
}

struct DataFlags {
  std::string train;
  std::string test;
  std::string relevant;
  long target_column = -1;
  std::string task = "auto";
  bool no_normalize = false;
};

void add_data_flags(CLI::App* cmd, DataFlags& f) {
  cmd->add_option("--train", f.train, "Training table (CSV, or TSV by extension)")->required();
  cmd->add_option("--test", f.test, "Test table; enables test metrics");
  cmd->add_option("--relevant", f.relevant, "File of relevant 0-based feature indices; enables AUPR");
  cmd->add_option("--target-column", f.target_column, "Target column, negative counts from the end")
      ->capture_default_str();
  cmd->add_option("--task", f.task, "Task type")
      ->check(CLI::IsMember({"auto", "regression", "classification"}))
      ->capture_default_str();
  cmd->add_flag("--no-normalize", f.no_normalize, "Skip z-scoring features with training statistics");
}

struct LoadedData {
  Dataset train;
  std::optional<Dataset> test;
  std::vector<std::size_t> relevant;
  std::string name;
};

LoadedData load_data(const DataFlags& f) {
  io::DelimitedOptions opt;
  opt.target_column = f.target_column;
  opt.task = f.task == "regression"       ? io::TaskHint::kRegression
             : f.task == "classification" ? io::TaskHint::kClassification
                                          : io::TaskHint::kAuto;
  auto train = io::read_delimited(f.train, opt);
  LoadedData out;
  out.name = fs::path(f.train).stem().string();
  std::optional<Standardizer> stats;
  if (f.no_normalize) {
    out.train = std::move(train.data);
  } else {
    auto n = normalize(train.data);
    out.train = std::move(n.data);
    stats = std::move(n.stats);
  }
  if (!f.test.empty()) {
    io::DelimitedOptions test_opt = opt;
    test_opt.task = out.train.task == TaskKind::kClassification ? io::TaskHint::kClassification
                                                                : io::TaskHint::kRegression;
    test_opt.class_labels = train.class_labels;
    auto test = io::read_delimited(f.test, test_opt).data;
    if (test.cols() != out.train.cols()) {
      throw io::ParseError(f.test, 1, 1,
                           "test table has " + std::to_string(test.cols()) + " features, training table has " +
                               std::to_string(out.train.cols()));
    }
    test.class_count = out.train.class_count;
    out.test = stats ? stats->apply(test) : std::move(test);
  }
  if (!f.relevant.empty()) {
    out.relevant = read_indices(f.relevant);
    for (auto j : out.relevant) {
      if (j >= out.train.cols()) throw io::ParseError(f.relevant, 0, "relevant index out of range");
    }
  }
  return out;
}

struct LearnerFlags {
  std::string learner = "tree";
  std::size_t k = 5;
};

void add_learner_flags(CLI::App* cmd, LearnerFlags& f) {
  cmd->add_option("--learner", f.learner, "Base learner")
      ->check(CLI::IsMember({"tree", "knn"}))
      ->capture_default_str();
  cmd->add_option("--k", f.k, "Neighbours for the kNN learner")->check(CLI::PositiveNumber)->capture_default_str();
}

LearnerSpec learner_of(const LearnerFlags& f) {
  return f.learner == "knn" ? LearnerSpec::knn(f.k) : LearnerSpec::tree();
}

struct Reporter {
  std::string run_id;
  std::uint64_t seed = 0;
  std::string method;
  std::string learner;
  std::string dataset;
  std::vector<io::ReportRow> rows;

  void add(const std::string& metric, double value) {
    rows.push_back({run_id, seed, method, learner, dataset, metric, value});
  }
  void write(const std::string& path) const {
    if (path.empty()) return;
    write_atomically(path, [&](const fs::path& p) { io::write_report(p, rows); });
  }
};

double ensemble_error(const Ensemble& e, const Dataset& test) {
  return test_error(e.predict_all(test), test.target, test.task, test.output_dim());
}

void add_ranking_metrics(Reporter& r, const SelectionProbs& alpha, const LoadedData& data) {
  r.add("alpha_sum", alpha.sum());
  if (!data.relevant.empty()) {
    r.add("aupr", aupr(rank_features(alpha.values()), data.relevant, alpha.size()));
    r.add("aupr_tied", expected_aupr(alpha.values(), data.relevant));
  }
}

// ---------------------------------------------------------------- simulate

struct SimulateFlags {
  std::string problem;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::size_t n_train = 300;
  std::size_t n_test = 500;
  double noise_scale = 1.0;
};

void run_simulate(const SimulateFlags& f) {
  SimProblemSpec spec{parse_sim_problem(f.problem), f.n_train, f.n_test, f.seed, f.noise_scale};
  const auto data = generate(spec);
  const fs::path dir = f.out_dir;
  fs::create_directories(dir);
  auto table = [&](const Dataset& d) {
    io::Table t;
    t.data = d;
    for (std::size_t j = 0; j < d.cols(); ++j) t.feature_names.push_back("x" + std::to_string(j + 1));
    if (d.task == TaskKind::kClassification) {
      for (int c = 0; c < d.class_count; ++c) t.class_labels.push_back(std::to_string(c));
    }
    return t;
  };
  write_atomically(dir / "train.csv", [&](const fs::path& p) { io::write_delimited(p, table(data.train)); });
  write_atomically(dir / "test.csv", [&](const fs::path& p) { io::write_delimited(p, table(data.test)); });
  write_atomically(dir / "relevant.txt", [&](const fs::path& p) {
    std::ofstream out(p);
    for (auto j : data.relevant) out << j << '\n';
    if (!out) throw std::runtime_error("cannot write " + p.string());
  });
  progress("simulate: " + f.problem + " seed " + std::to_string(f.seed) + " -> " + dir.string());
}

// ------------------------------------------------------------------- train

struct TrainFlags {
  DataFlags data;
  LearnerFlags learner;
  std::string loss = "auto";
  double eta = 0.1;
  std::size_t epochs = 200;
  std::size_t restarts = 20;
  std::size_t ensemble_size = 100;
  double minibatch = 0.10;
  double lambda_l1 = 0.0;
  std::string fused;
  double lambda_fused = 0.0;
  std::uint64_t seed = 0;
  std::string alpha_out;
  std::string report_out;
  std::string run_id = "train";
  bool parallel_restarts = false;
  bool verbose = false;
};

void run_train(const TrainFlags& f) {
  const auto data = load_data(f.data);
  LossSpec loss = LossSpec::for_task(data.train.task);
  if (f.loss == "mse") loss.kind = LossKind::kMse;
  if (f.loss == "cross_entropy") loss.kind = LossKind::kCrossEntropy;
  loss.check_task(data.train.task);

  TrainConfig cfg;
  cfg.learning_rate = f.eta;
  cfg.epochs = f.epochs;
  cfg.restarts = f.restarts;
  cfg.ensemble_size = f.ensemble_size;
  cfg.minibatch_fraction = f.minibatch;
  cfg.seed = f.seed;
  cfg.parallel_restarts = f.parallel_restarts;
  cfg.verbose = f.verbose;
  RegularizerSpec reg;
  reg.lambda_l1 = f.lambda_l1;
  reg.lambda_fused = f.lambda_fused;
  if (!f.fused.empty()) std::tie(reg.grid_height, reg.grid_width) = parse_grid_shape(f.fused);

  progress("train: " + std::to_string(data.train.rows()) + " rows, " + std::to_string(data.train.cols()) +
           " features, " + std::to_string(cfg.restarts) + " restarts");
  const auto result = train(data.train, learner_of(f.learner), loss, cfg, reg);

  Reporter r{f.run_id, f.seed, "prsb", f.learner.learner, data.name, {}};
  r.add("selection_objective", result.report.selection_score);
  r.add("best_restart", static_cast<double>(result.best_restart));
  r.add("learning_rate", result.report.learning_rate);
  r.add("total_steps", static_cast<double>(result.report.total_steps));
  r.add("retrains", static_cast<double>(result.report.retrain_steps.size()));
  r.add("collapse_events", static_cast<double>(result.report.collapse_events));
  for (std::size_t e = 0; e < result.report.epoch_objective.size(); ++e) {
    r.add("epoch_objective_" + std::to_string(e), result.report.epoch_objective[e]);
  }
  add_ranking_metrics(r, result.alpha, data);
  if (data.test) r.add("test_error", ensemble_error(result.ensemble, *data.test));
  if (!f.alpha_out.empty()) {
    write_atomically(f.alpha_out, [&](const fs::path& p) { io::write_alpha(p, result.alpha); });
  }
  r.write(f.report_out);
}

// ---------------------------------------------------------------- baseline

struct BaselineFlags {
  DataFlags data;
  LearnerFlags learner;
  std::string method = "rsb";
  std::uint64_t seed = 0;
  std::size_t ensemble_size = 100;
  std::vector<std::size_t> k_grid;
  std::size_t cv_folds = 10;
  EdaConfig eda;
  std::string alpha_out;
  std::string report_out;
  std::string run_id = "baseline";
};

void run_baseline(const BaselineFlags& f) {
  const auto data = load_data(f.data);
  const auto spec = learner_of(f.learner);
  Reporter r{f.run_id, f.seed, f.method, f.learner.learner, data.name, {}};
  std::optional<SelectionProbs> alpha;
  Ensemble ensemble;
  if (f.method == "single") {
    ensemble = single_model(data.train, spec);
  } else if (f.method == "rsb") {
    RsbConfig cfg;
    cfg.ensemble_size = f.ensemble_size;
    cfg.k_grid = f.k_grid;
    cfg.cv_folds = f.cv_folds;
    auto result = rsb_train(data.train, spec, cfg, Rng(f.seed));
    r.add("chosen_k", static_cast<double>(result.chosen_k));
    for (std::size_t g = 0; g < result.grid.size(); ++g) {
      r.add("cv_error_k" + std::to_string(result.grid[g]), result.cv_errors[g]);
    }
    ensemble = std::move(result.ensemble);
  } else {
    EdaConfig cfg = f.eda;
    cfg.cv_folds = f.cv_folds;
    const auto result = eda_rank(data.train, spec, cfg, Rng(f.seed));
    r.add("stop_iteration", static_cast<double>(result.iterations));
    r.add("converged", result.converged ? 1.0 : 0.0);
    r.add("best_restart", static_cast<double>(result.best_restart));
    r.add("final_population_error", result.final_error);
    alpha = result.alpha;
  }
  if (alpha) add_ranking_metrics(r, *alpha, data);
  if (data.test && !ensemble.models.empty()) r.add("test_error", ensemble_error(ensemble, *data.test));
  if (!f.alpha_out.empty()) {
    if (!alpha) throw std::invalid_argument("--alpha-out is only produced by --method eda");
    write_atomically(f.alpha_out, [&](const fs::path& p) { io::write_alpha(p, *alpha); });
  }
  r.write(f.report_out);
}

// --------------------------------------------------------------------- grn

struct GrnFlags {
  std::string expression;
  std::string regulators;
  std::string gold;
  std::vector<double> lambda_grid;
  LearnerFlags learner;
  double eta = 0.1;
  std::size_t epochs = 200;
  std::size_t restarts = 20;
  std::size_t ensemble_size = 100;
  std::uint64_t seed = 0;
  std::string edges_out;
  std::string report_out;
  std::string run_id = "grn";
};

void run_grn(const GrnFlags& f) {
  auto expr = io::read_expression(f.expression);
  GrnProblem problem;
  problem.gene_names = expr.gene_names;
  // Each gene is both an input and a target; z-score every column.
  Dataset wrapper;
  wrapper.features = std::move(expr.values);
  wrapper.target.assign(wrapper.rows(), 0.0);
  problem.expression = normalize(wrapper).data.features;

  std::map<std::string, std::size_t> index;
  for (std::size_t g = 0; g < problem.gene_names.size(); ++g) index[problem.gene_names[g]] = g;
  if (f.regulators.empty()) {
    for (std::size_t g = 0; g < problem.gene_names.size(); ++g) problem.regulators.push_back(g);
  } else {
    const auto names = io::read_name_list(f.regulators);
    for (std::size_t k = 0; k < names.size(); ++k) {
      const auto it = index.find(names[k]);
      if (it == index.end()) throw io::ParseError(f.regulators, k + 1, 1, "unknown gene '" + names[k] + "'");
      problem.regulators.push_back(it->second);
    }
  }
  if (!f.gold.empty()) problem.gold = io::resolve_edges(io::read_edges(f.gold), problem.gene_names);
  problem.validate();

  TrainConfig cfg;
  cfg.learning_rate = f.eta;
  cfg.epochs = f.epochs;
  cfg.restarts = f.restarts;
  cfg.ensemble_size = f.ensemble_size;
  cfg.seed = f.seed;
  const auto grid = f.lambda_grid.empty() ? default_lambda_grid() : f.lambda_grid;
  progress("grn: " + std::to_string(problem.gene_count()) + " genes, " + std::to_string(grid.size()) +
           " lambda values");
  const auto sweep = lambda_sweep(problem, learner_of(f.learner), cfg, grid);
  const auto& chosen = sweep.results[sweep.chosen_index];

  Reporter r{f.run_id, f.seed, "prsb_grn", f.learner.learner, fs::path(f.expression).stem().string(), {}};
  for (std::size_t k = 0; k < grid.size(); ++k) {
    r.add("mean_alpha_sum_lambda_" + io::format_double(grid[k]), sweep.mean_alpha_sum[k]);
    r.add("active_rows_lambda_" + io::format_double(grid[k]), static_cast<double>(active_rows(sweep.results[k].alpha)));
  }
  r.add("chosen_lambda", sweep.chosen);
  std::size_t failed = 0;
  for (const auto& e : chosen.column_errors) failed += e.empty() ? 0 : 1;
  r.add("failed_columns", static_cast<double>(failed));
  if (!problem.gold.empty()) {
    r.add("edge_aupr", edge_aupr(problem, chosen.ranking));
    r.add("edge_aupr_tied", edge_expected_aupr(problem, chosen.ranking));
    r.add("edge_prevalence", edge_prevalence(problem));
  }
  write_atomically(f.edges_out, [&](const fs::path& p) { io::write_edges(p, chosen.ranking, problem.gene_names); });
  r.write(f.report_out);
}

// ------------------------------------------------------------------- bench

struct BenchFlags {
  std::string suite = "simulated";
  std::string seeds = "0..9";
  std::string out_dir;
  std::vector<std::string> problems = kProblems;
  std::vector<std::string> methods = {"single", "rsb", "prsb"};
  std::vector<std::string> learners = {"tree", "knn"};
  ExperimentSettings settings;
};

struct Cell {
  SimProblem problem;
  Method method;
  LearnerKind learner;
  std::uint64_t seed;
  fs::path path;
};

std::vector<io::ReportRow> cell_rows(const CellResult& c) {
  std::vector<io::ReportRow> rows;
  const std::string learner = c.learner == LearnerKind::kKnn ? "knn" : "tree";
  auto add = [&](const std::string& metric, double v) {
    if (!std::isnan(v)) {
      rows.push_back({"bench", c.seed, std::string(to_string(c.method)), learner, std::string(to_string(c.problem)),
                      metric, v});
    }
  };
  add("test_error", c.test_error);
  add("aupr", c.aupr);
  add("aupr_tied", c.aupr_tied);
  add("alpha_sum", c.alpha_sum);
  add("chosen_k", c.chosen_k);
  add("iterations", c.iterations);
  return rows;
}

std::string learner_name(LearnerKind k) { return k == LearnerKind::kKnn ? "knn" : "tree"; }

void run_bench(const BenchFlags& f) {
  const auto seeds = parse_seeds(f.seeds);
  const fs::path dir = f.out_dir;
  fs::create_directories(dir / "cells");
  std::vector<Cell> cells;
  for (const auto& p : f.problems) {
    for (auto seed : seeds) {
      for (const auto& m : f.methods) {
        for (const auto& l : f.learners) {
          Cell c{parse_sim_problem(p), parse_method(m), parse_learner_kind(l == "knn" ? "knn" : "tree"), seed, {}};
          c.path = dir / "cells" / (p + "-" + m + "-" + l + "-seed" + std::to_string(seed) + ".csv");
          cells.push_back(std::move(c));
        }
      }
    }
  }

  std::vector<std::vector<io::ReportRow>> results(cells.size());
  std::vector<std::string> errors(cells.size());
  const auto count = static_cast<std::ptrdiff_t>(cells.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t k = 0; k < count; ++k) {
    const auto& c = cells[static_cast<std::size_t>(k)];
    const std::string label = std::string(to_string(c.problem)) + "/" + std::string(to_string(c.method)) + "/" +
                              learner_name(c.learner) + "/seed" + std::to_string(c.seed);
    try {
      if (fs::exists(c.path)) {
        results[static_cast<std::size_t>(k)] = io::read_report(c.path);
        progress("bench: " + label + " (checkpoint)");
        continue;
      }
      const auto result = run_cell(c.problem, c.method, c.learner, c.seed, f.settings);
      auto rows = cell_rows(result);
      write_atomically(c.path, [&](const fs::path& p) { io::write_report(p, rows); });
      results[static_cast<std::size_t>(k)] = std::move(rows);
      char buf[160];
      std::snprintf(buf, sizeof buf, "bench: %s error %.4f (%.1fs)", label.c_str(), result.test_error, result.seconds);
      progress(buf);
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(k)] = label + ": " + e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw std::runtime_error("bench cell failed: " + e);
  }

  std::vector<io::ReportRow> all;
  for (const auto& rows : results) all.insert(all.end(), rows.begin(), rows.end());
  write_atomically(dir / "runs.csv", [&](const fs::path& p) { io::write_report(p, all); });

  // (dataset, method, learner, metric) -> values in seed order
  std::map<std::tuple<std::string, std::string, std::string, std::string>, std::vector<double>> groups;
  for (const auto& row : all) groups[{row.dataset, row.method, row.learner, row.metric}].push_back(row.value);
  std::ostringstream summary;
  summary << "dataset,method,learner,metric,n,mean,sd\n";
  std::map<std::pair<std::string, std::string>, std::map<std::string, std::string>> table;
  for (const auto& [key, values] : groups) {
    const double n = static_cast<double>(values.size());
    double mean = 0;
    for (double v : values) mean += v;
    mean /= n;
    double var = 0;
    for (double v : values) var += (v - mean) * (v - mean);
    const double sd = values.size() > 1 ? std::sqrt(var / (n - 1)) : 0.0;
    const auto& [dataset, method, learner, metric] = key;
    summary << dataset << ',' << method << ',' << learner << ',' << metric << ',' << values.size() << ','
            << io::format_double(mean) << ',' << io::format_double(sd) << '\n';
    char cell[64];
    std::snprintf(cell, sizeof cell, "%.3f +- %.3f", mean, sd);
    table[{method, learner}][dataset + " " + metric] = cell;
  }
  write_atomically(dir / "summary.csv", [&](const fs::path& p) {
    std::ofstream out(p, std::ios::binary);
    out << summary.str();
    if (!out) throw std::runtime_error("cannot write " + p.string());
  });

  // Table-shaped view: one row per method/learner, one column per dataset.
  write_atomically(dir / "table.md", [&](const fs::path& p) {
    std::ofstream out(p, std::ios::binary);
    for (const std::string metric : {"test_error", "aupr", "aupr_tied", "alpha_sum"}) {
      out << "\n" << metric << "\n\n| method | learner |";
      for (const auto& prob : f.problems) out << ' ' << prob << " |";
      out << "\n|---|---|";
      for (std::size_t k = 0; k < f.problems.size(); ++k) out << "---|";
      out << '\n';
      for (const auto& [row, values] : table) {
        out << "| " << row.first << " | " << row.second << " |";
        for (const auto& prob : f.problems) {
          const auto it = values.find(prob + " " + metric);
          out << ' ' << (it == values.end() ? "-" : it->second) << " |";
        }
        out << '\n';
      }
    }
    if (!out) throw std::runtime_error("cannot write " + p.string());
  });
}

}  // namespace

int main(int argc, char** argv) {
  kernels::configure_threads_from_env();
  CLI::App app{"Parametric random subspace ensembles: training, baselines and benchmarks"};
  app.footer(kConfigHelp);
  app.require_subcommand(1);
  std::map<CLI::App*, std::string> configs;

  SimulateFlags sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a simulated problem as CSV files");
  simulate->add_option("--config", configs[simulate], "Flat key=value defaults for this command");
  simulate->add_option("--problem", sim.problem, "Problem name")->required()->check(CLI::IsMember(kProblems));
  simulate->add_option("--seed", sim.seed, "Generator seed")->capture_default_str();
  simulate->add_option("--out-dir", sim.out_dir, "Output directory")->required();
  simulate->add_option("--n-train", sim.n_train, "Training rows")->capture_default_str();
  simulate->add_option("--n-test", sim.n_test, "Test rows")->capture_default_str();
  simulate->add_option("--noise-scale", sim.noise_scale, "Multiplier on the output noise")->capture_default_str();

  TrainFlags tr;
  auto* train_cmd = app.add_subcommand("train", "Optimize selection probabilities and fit the final ensemble");
  train_cmd->add_option("--config", configs[train_cmd], "Flat key=value defaults for this command");
  add_data_flags(train_cmd, tr.data);
  add_learner_flags(train_cmd, tr.learner);
  train_cmd->add_option("--loss", tr.loss, "Loss (auto picks by task)")
      ->check(CLI::IsMember({"auto", "mse", "cross_entropy"}))
      ->capture_default_str();
  train_cmd->add_option("--eta", tr.eta, "Learning rate")->check(CLI::NonNegativeNumber)->capture_default_str();
  train_cmd->add_option("--epochs", tr.epochs, "Epochs")->capture_default_str();
  train_cmd->add_option("--restarts", tr.restarts, "Restarts")->capture_default_str();
  train_cmd->add_option("--ensemble-size", tr.ensemble_size, "Models per ensemble (T)")->capture_default_str();
  train_cmd->add_option("--minibatch", tr.minibatch, "Minibatch fraction")->capture_default_str();
  train_cmd->add_option("--lambda-l1", tr.lambda_l1, "Sparsity coefficient")->capture_default_str();
  train_cmd->add_option("--fused", tr.fused, "Feature grid shape HxW for the fused penalty");
  train_cmd->add_option("--lambda-fused", tr.lambda_fused, "Fused penalty coefficient")->capture_default_str();
  train_cmd->add_option("--seed", tr.seed, "Seed")->capture_default_str();
  train_cmd->add_option("--alpha-out", tr.alpha_out, "Write selection probabilities here");
  train_cmd->add_option("--report-out", tr.report_out, "Write the run report (CSV) here");
  train_cmd->add_option("--run-id", tr.run_id, "Run identifier in the report")->capture_default_str();
  train_cmd->add_flag("--parallel-restarts", tr.parallel_restarts, "Run restarts concurrently");
  train_cmd->add_flag("--verbose", tr.verbose, "Per-epoch progress on stderr");

  BaselineFlags bl;
  auto* baseline = app.add_subcommand("baseline", "Single model, random subspace or EDA baselines");
  baseline->add_option("--config", configs[baseline], "Flat key=value defaults for this command");
  add_data_flags(baseline, bl.data);
  add_learner_flags(baseline, bl.learner);
  baseline->add_option("--method", bl.method, "Baseline")
      ->check(CLI::IsMember({"rsb", "eda", "single"}))
      ->capture_default_str();
  baseline->add_option("--seed", bl.seed, "Seed")->capture_default_str();
  baseline->add_option("--ensemble-size", bl.ensemble_size, "RSB models")->capture_default_str();
  baseline->add_option("--k-grid", bl.k_grid, "RSB subset sizes (default: standard grid)")->delimiter(',');
  baseline->add_option("--cv-folds", bl.cv_folds, "Cross-validation folds")->capture_default_str();
  baseline->add_option("--eda-population", bl.eda.population, "EDA population")->capture_default_str();
  baseline->add_option("--eda-elite", bl.eda.elite, "EDA elite size")->capture_default_str();
  baseline->add_option("--eda-restarts", bl.eda.restarts, "EDA restarts")->capture_default_str();
  baseline->add_option("--eda-max-iterations", bl.eda.max_iterations, "EDA iteration cap")->capture_default_str();
  baseline->add_option("--alpha-out", bl.alpha_out, "EDA selection frequencies");
  baseline->add_option("--report-out", bl.report_out, "Run report (CSV)");
  baseline->add_option("--run-id", bl.run_id, "Run identifier in the report")->capture_default_str();

  GrnFlags gf;
  auto* grn = app.add_subcommand("grn", "Gene network inference with the row-group penalty");
  grn->add_option("--config", configs[grn], "Flat key=value defaults for this command");
  grn->add_option("--expression", gf.expression, "Expression matrix (TSV, header of gene names)")->required();
  grn->add_option("--regulators", gf.regulators, "Candidate regulator names, one per line (default: all)");
  grn->add_option("--gold", gf.gold, "Gold edges: regulator<TAB>target<TAB>0|1");
  grn->add_option("--lambda-grid", gf.lambda_grid, "Comma-separated penalty grid")->delimiter(',');
  add_learner_flags(grn, gf.learner);
  grn->add_option("--eta", gf.eta, "Learning rate")->capture_default_str();
  grn->add_option("--epochs", gf.epochs, "Epochs")->capture_default_str();
  grn->add_option("--restarts", gf.restarts, "Restarts")->capture_default_str();
  grn->add_option("--ensemble-size", gf.ensemble_size, "Models per target gene")->capture_default_str();
  grn->add_option("--seed", gf.seed, "Seed")->capture_default_str();
  grn->add_option("--edges-out", gf.edges_out, "Ranked edges (TSV)")->required();
  grn->add_option("--report-out", gf.report_out, "Run report (CSV)");
  grn->add_option("--run-id", gf.run_id, "Run identifier in the report")->capture_default_str();

  BenchFlags bf;
  auto* bench = app.add_subcommand("bench", "Simulated benchmark with per-seed checkpoints");
  bench->add_option("--config", configs[bench], "Flat key=value defaults for this command");
  bench->add_option("--suite", bf.suite, "Benchmark suite")->check(CLI::IsMember({"simulated"}))->capture_default_str();
  bench->add_option("--seeds", bf.seeds, "Seeds: a range a..b or a comma list")->capture_default_str();
  bench->add_option("--out-dir", bf.out_dir, "Checkpoint and result directory")->required();
  bench->add_option("--problems", bf.problems, "Problems")->delimiter(',')->check(CLI::IsMember(kProblems));
  bench->add_option("--methods", bf.methods, "Methods")
      ->delimiter(',')
      ->check(CLI::IsMember({"single", "rsb", "prsb", "eda"}));
  bench->add_option("--learners", bf.learners, "Learners")->delimiter(',')->check(CLI::IsMember({"tree", "knn"}));
  bench->add_option("--epochs", bf.settings.epochs, "PRSB epochs")->capture_default_str();
  bench->add_option("--restarts", bf.settings.restarts, "PRSB restarts")->capture_default_str();
  bench->add_option("--ensemble-size", bf.settings.ensemble_size, "Models per ensemble")->capture_default_str();
  bench->add_option("--eta", bf.settings.learning_rate, "PRSB learning rate")->capture_default_str();

  try {
    app.parse(argc, argv);
    for (auto* cmd : app.get_subcommands()) apply_config(cmd, configs[cmd]);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*simulate) run_simulate(sim);
    if (*train_cmd) run_train(tr);
    if (*baseline) run_baseline(bl);
    if (*grn) run_grn(gf);
    if (*bench) run_bench(bf);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
