#pragma once

// Logistic-regression fitting of the seven SGSS weights from pairwise
// preferences: P(left preferred) = sigmoid(w . f), no intercept.

#include <array>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgss/sgss.hpp"

namespace sgss {

struct FitConfig {
  double l2_lambda = 1e-3;
  int max_iters = 10000;
  double tolerance = 1e-8;  // on the projected-gradient norm
  bool project_non_negative = true;
  std::array<bool, kFeatureCount> mask = {true, true, true, true, true, true, true};
};

struct TrainingExample {
  FeatureArray features{};
  double target = 0.5;  // fraction of labellers preferring LEFT
};

struct FitDiagnostics {
  double loss = 0.0;
  int iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;
  std::vector<double> loss_history;  // loss after each accepted step, starting at w = 0
};

struct FitResult {
  SgssWeights weights;
  FitDiagnostics diagnostics;
};

// Sum of fractional cross-entropies plus lambda * |w|^2.
double logistic_loss(const std::vector<TrainingExample>& examples, const FeatureArray& w,
                     double l2_lambda);

// Projected Newton iterations with Armijo backtracking, starting from w = 0. Masked-out features keep weight 0.
FitResult fit_weights(const std::vector<TrainingExample>& examples, const FitConfig& cfg = {});

std::vector<TrainingExample> training_examples(const std::vector<PreferencePair>& pairs,
                                               const ScoringContext& ctx);

FitConfig fit_config_from_json(const nlohmann::json& j);

nlohmann::ordered_json weights_to_json(const SgssWeights& w,
                                       const FitDiagnostics* fit = nullptr,
                                       const FitConfig* cfg = nullptr);
SgssWeights weights_from_json(const nlohmann::json& j);

}  // namespace sgss
