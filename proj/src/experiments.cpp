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

#include "prsb/experiments.hpp"

#include "prsb/ensemble.hpp"
#include "prsb/eval.hpp"
#include "prsb/gradient.hpp"
#include "prsb/rng.hpp"
#include "prsb/trainer.hpp"

#include <chrono>
#include <stdexcept>
#include <string>

namespace prsb {
namespace {

constexpr std::uint64_t kRsbStream = 0x525342;
constexpr std::uint64_t kEdaStream = 0x454441;

double ranking_aupr(const SelectionProbs& alpha, const PreparedData& data) {
  const auto ranking = rank_features(alpha.values());
  return aupr(ranking, data.relevant, alpha.size());
}

}  // namespace

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kSingle: return "single";
    case Method::kRsb: return "rsb";
    case Method::kPrsb: return "prsb";
    case Method::kEda: return "eda";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (auto m : {Method::kSingle, Method::kRsb, Method::kPrsb, Method::kEda}) {
    if (to_string(m) == name) return m;
  }
  throw std::invalid_argument("unknown method '" + std::string(name) + "' (expected single, rsb, prsb or eda)");
}

PreparedData prepare(const SimProblemSpec& spec) {
  auto raw = generate(spec);
  auto fitted = normalize(raw.train);
  PreparedData out;
  out.train = std::move(fitted.data);
  out.test = fitted.stats.apply(raw.test);
  out.relevant = std::move(raw.relevant);
  return out;
}

LearnerSpec learner_for(LearnerKind kind, const ExperimentSettings& settings) {
  switch (kind) {
    case LearnerKind::kKnn: return LearnerSpec::knn(settings.knn_k);
    case LearnerKind::kCartTree: return LearnerSpec::tree();
    case LearnerKind::kConstant: return LearnerSpec::constant();
  }
  return LearnerSpec::tree();
}

CellResult run_cell(const PreparedData& data, SimProblem problem, Method method, LearnerKind learner,
                    std::uint64_t seed, const ExperimentSettings& settings) {
  const auto start = std::chrono::steady_clock::now();
  const LearnerSpec spec = learner_for(learner, settings);
  CellResult cell;
  cell.problem = problem;
  cell.method = method;
  cell.learner = learner;
  cell.seed = seed;

  Ensemble ensemble;
  switch (method) {
    case Method::kSingle:
      ensemble = single_model(data.train, spec);
      break;
    case Method::kRsb: {
      RsbConfig cfg;
      cfg.ensemble_size = settings.ensemble_size;
      cfg.cv_folds = settings.rsb_folds;
      auto result = rsb_train(data.train, spec, cfg, Rng(seed).split(kRsbStream));
      cell.chosen_k = static_cast<double>(result.chosen_k);
      ensemble = std::move(result.ensemble);
      break;
    }
    case Method::kPrsb: {
      TrainConfig cfg;
      cfg.ensemble_size = settings.ensemble_size;
      cfg.epochs = settings.epochs;
      cfg.restarts = settings.restarts;
      cfg.learning_rate = settings.learning_rate;
      cfg.seed = seed;
      cfg.parallel_restarts = settings.parallel_restarts;
      cfg.verbose = settings.verbose;
      auto result = train(data.train, spec, LossSpec::for_task(data.train.task), cfg);
      cell.alpha_sum = result.alpha.sum();
      cell.aupr = ranking_aupr(result.alpha, data);
      cell.aupr_tied = expected_aupr(result.alpha.values(), data.relevant);
      ensemble = std::move(result.ensemble);
      break;
    }
    case Method::kEda: {
      const auto result = eda_rank(data.train, spec, settings.eda, Rng(seed).split(kEdaStream));
      cell.alpha_sum = result.alpha.sum();
      cell.aupr = ranking_aupr(result.alpha, data);
      cell.aupr_tied = expected_aupr(result.alpha.values(), data.relevant);
      cell.iterations = static_cast<double>(result.iterations);
      // EDA ranks features only; its predictor is a single model on the
      // features it keeps with probability above one half.
      FeatureSubset keep(result.alpha.size());
      for (std::size_t j = 0; j < keep.size(); ++j) keep.set(j, result.alpha[j] > 0.5);
      std::vector<std::size_t> rows(data.train.rows());
      for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
      ensemble.models.push_back(fit(spec, data.train, keep, rows));
      ensemble.alpha = result.alpha;
      ensemble.task = data.train.task;
      ensemble.output_dim = data.train.output_dim();
      break;
    }
  }
  const auto predictions = ensemble.predict_all(data.test);
  cell.test_error = test_error(predictions, data.test.target, data.test.task, data.test.output_dim());
  cell.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return cell;
}

CellResult run_cell(SimProblem problem, Method method, LearnerKind learner, std::uint64_t seed,
                    const ExperimentSettings& settings) {
  return run_cell(prepare(SimProblemSpec::standard(problem, seed)), problem, method, learner, seed, settings);
}

}  // namespace prsb
