#include "sgss/fit.hpp"

#include <algorithm>
#include <cmath>

#include "sgss/error.hpp"

namespace sgss {

namespace {

using Vec = FeatureArray;

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Vec gradient(const std::vector<TrainingExample>& ex, const Vec& w, const FitConfig& cfg) {
  Vec g{};
  for (const auto& e : ex) {
    const double r = sigmoid(dot(w, e.features)) - e.target;
    for (std::size_t k = 0; k < g.size(); ++k) g[k] += r * e.features[k];
  }
  for (std::size_t k = 0; k < g.size(); ++k) {
    g[k] += 2.0 * cfg.l2_lambda * w[k];
    if (!cfg.mask[k]) g[k] = 0.0;
  }
  return g;
}

Vec project(Vec w, const FitConfig& cfg) {
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (!cfg.mask[k]) w[k] = 0.0;
    if (cfg.project_non_negative && w[k] < 0.0) w[k] = 0.0;
  }
  return w;
}

// Norm of w - P(w - g): zero exactly at a stationary point of the constrained problem.
double projected_gradient_norm(const Vec& w, const Vec& g, const FitConfig& cfg) {
  Vec step = w;
  for (std::size_t k = 0; k < w.size(); ++k) step[k] -= g[k];
  const Vec p = project(step, cfg);
  double s = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) s += (w[k] - p[k]) * (w[k] - p[k]);
  return std::sqrt(s);
}

using Matrix = std::array<std::array<double, kFeatureCount>, kFeatureCount>;

Matrix hessian(const std::vector<TrainingExample>& ex, const Vec& w, const FitConfig& cfg) {
  Matrix h{};
  for (const auto& e : ex) {
    const double s = sigmoid(dot(w, e.features));
    const double v = s * (1.0 - s);
    for (std::size_t a = 0; a < kFeatureCount; ++a)
      for (std::size_t b = 0; b < kFeatureCount; ++b) h[a][b] += v * e.features[a] * e.features[b];
  }
  for (std::size_t k = 0; k < kFeatureCount; ++k) h[k][k] += 2.0 * cfg.l2_lambda;
  return h;
}

// Solves H_FF d_F = -g_F by Cholesky; false if the free block is not positive definite.
bool newton_direction(const Matrix& h, const Vec& g, const std::array<bool, kFeatureCount>& free, Vec& d) {
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < kFeatureCount; ++k)
    if (free[k]) idx.push_back(k);
  const std::size_t n = idx.size();
  if (n == 0) return true;
  double trace = 0.0;
  for (auto k : idx) trace += h[k][k];
  const double jitter = 1e-12 * std::max(trace, 1.0);
  std::vector<double> l(n * n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b <= a; ++b) {
      double sum = h[idx[a]][idx[b]] + (a == b ? jitter : 0.0);
      for (std::size_t c = 0; c < b; ++c) sum -= l[a * n + c] * l[b * n + c];
      if (a == b) {
        if (!(sum > 0.0)) return false;
        l[a * n + a] = std::sqrt(sum);
      } else {
        l[a * n + b] = sum / l[b * n + b];
      }
    }
  }
  std::vector<double> y(n);
  for (std::size_t a = 0; a < n; ++a) {
    double sum = -g[idx[a]];
    for (std::size_t c = 0; c < a; ++c) sum -= l[a * n + c] * y[c];
    y[a] = sum / l[a * n + a];
  }
  for (std::size_t a = n; a-- > 0;) {
    double sum = y[a];
    for (std::size_t c = a + 1; c < n; ++c) sum -= l[c * n + a] * d[idx[c]];
    d[idx[a]] = sum / l[a * n + a];
  }
  return true;
}

}  // namespace

double logistic_loss(const std::vector<TrainingExample>& examples, const FeatureArray& w,
                     double l2_lambda) {
  double loss = 0.0;
  for (const auto& e : examples) {
    const double z = dot(w, e.features);
    // -y log s(z) - (1-y) log(1-s(z)) = softplus(z) - y z
    loss += softplus(z) - e.target * z;
  }
  return loss + l2_lambda * dot(w, w);
}

FitResult fit_weights(const std::vector<TrainingExample>& examples, const FitConfig& cfg) {
  if (examples.empty()) throw Error("empty training set");
  if (std::none_of(cfg.mask.begin(), cfg.mask.end(), [](bool b) { return b; }))
    throw Error("feature mask selects no features");
  if (cfg.l2_lambda < 0.0) throw Error("l2_lambda must be non-negative");
  bool informative = false;
  double curvature = 2.0 * cfg.l2_lambda;
  for (const auto& e : examples) {
    if (!(e.target >= 0.0 && e.target <= 1.0)) throw Error("training target outside [0,1]");
    for (std::size_t k = 0; k < kFeatureCount; ++k) {
      if (cfg.mask[k] && e.features[k] != 0.0) informative = true;
      if (cfg.mask[k]) curvature += 0.25 * e.features[k] * e.features[k];
    }
  }
  if (!informative) throw Error("all training feature vectors are zero");

  Vec w{};
  double loss = logistic_loss(examples, w, cfg.l2_lambda);
  Vec g = gradient(examples, w, cfg);

  FitDiagnostics diag;
  diag.loss_history.push_back(loss);
  constexpr double armijo = 1e-4;
  int it = 0;
  double pg = projected_gradient_norm(w, g, cfg);
  while (pg > cfg.tolerance && it < cfg.max_iters) {
    ++it;
    // Variables pinned at the bound with the gradient pushing outward stay fixed;
    // the rest take a Newton step.
    std::array<bool, kFeatureCount> free{};
    for (std::size_t k = 0; k < w.size(); ++k) {
      const bool pinned = cfg.project_non_negative && w[k] <= 1e-12 && g[k] > 0.0;
      free[k] = cfg.mask[k] && !pinned;
    }
    Vec d{};
    for (std::size_t k = 0; k < w.size(); ++k)
      if (cfg.mask[k] && !free[k]) d[k] = -g[k] / curvature;
    if (!newton_direction(hessian(examples, w, cfg), g, free, d)) {
      for (std::size_t k = 0; k < w.size(); ++k)
        if (free[k]) d[k] = -g[k] / curvature;
    }

    Vec next{};
    double next_loss = 0.0;
    bool accepted = false;
    double alpha = 1.0;
    for (int backtrack = 0; backtrack < 60; ++backtrack) {
      Vec trial = w;
      for (std::size_t k = 0; k < w.size(); ++k) trial[k] += alpha * d[k];
      next = project(trial, cfg);
      double decrease = 0.0;
      for (std::size_t k = 0; k < w.size(); ++k) decrease += g[k] * (next[k] - w[k]);
      next_loss = logistic_loss(examples, next, cfg.l2_lambda);
      if (decrease < 0.0 && next_loss <= loss + armijo * decrease) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;  // no descent possible at machine precision

    w = next;
    g = gradient(examples, w, cfg);
    loss = next_loss;
    diag.loss_history.push_back(loss);
    pg = projected_gradient_norm(w, g, cfg);
  }

  diag.loss = loss;
  diag.iterations = it;
  diag.gradient_norm = pg;
  diag.converged = pg <= cfg.tolerance;
  return {weights_from_array(w), std::move(diag)};
}

std::vector<TrainingExample> training_examples(const std::vector<PreferencePair>& pairs,
                                               const ScoringContext& ctx) {
  std::vector<TrainingExample> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    if (p.preferences.empty()) throw Error("pair '" + p.pair_id + "' has no preference labels");
    const auto left = std::count_if(p.preferences.begin(), p.preferences.end(),
                                    [](const PreferenceRecord& r) { return r.choice == Choice::LEFT; });
    out.push_back({feature_vector(p, ctx).values,
                   static_cast<double>(left) / static_cast<double>(p.preferences.size())});
  }
  return out;
}

FitConfig fit_config_from_json(const nlohmann::json& j) {
  FitConfig cfg;
  try {
    cfg.l2_lambda = j.value("lambda", cfg.l2_lambda);
    cfg.max_iters = j.value("max_iters", cfg.max_iters);
    cfg.tolerance = j.value("tolerance", cfg.tolerance);
    cfg.project_non_negative = j.value("non_negative", cfg.project_non_negative);
    if (j.contains("features")) {
      cfg.mask.fill(false);
      for (const auto& name : j.at("features")) {
        const auto n = name.get<std::string>();
        auto it = std::find(kFeatureNames.begin(), kFeatureNames.end(), n);
        if (it == kFeatureNames.end()) throw Error("unknown feature '" + n + "'");
        cfg.mask[static_cast<std::size_t>(it - kFeatureNames.begin())] = true;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed fit config: ") + e.what());
  }
  if (cfg.max_iters < 0) throw Error("max_iters must be non-negative");
  return cfg;
}

nlohmann::ordered_json weights_to_json(const SgssWeights& w, const FitDiagnostics* fit,
                                       const FitConfig* cfg) {
  nlohmann::ordered_json j;
  const auto a = to_array(w);
  for (std::size_t k = 0; k < kFeatureCount; ++k) j[std::string("w_") + kFeatureNames[k]] = a[k];
  j["normalized_mode"] = is_normalized(w.xux);
  if (!is_non_negative(w)) j["unconstrained"] = true;
  if (fit) {
    nlohmann::ordered_json f;
    f["lambda"] = cfg ? cfg->l2_lambda : 0.0;
    f["iters"] = fit->iterations;
    f["loss"] = fit->loss;
    f["converged"] = fit->converged;
    j["fit"] = std::move(f);
  }
  return j;
}

SgssWeights weights_from_json(const nlohmann::json& j) {
  FeatureArray a{};
  try {
    for (std::size_t k = 0; k < kFeatureCount; ++k)
      a[k] = j.at(std::string("w_") + kFeatureNames[k]).get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed weights file: ") + e.what());
  }
  const auto w = weights_from_array(a);
  if (!is_non_negative(w) && !j.value("unconstrained", false))
    throw Error("weights must be non-negative");
  if (j.value("normalized_mode", false) && !is_normalized(w.xux))
    throw Error("weights violate the normalised-mode bounds");
  return w;
}

}  // namespace sgss
