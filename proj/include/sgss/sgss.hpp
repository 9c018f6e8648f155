#pragma once

// SGSS = XUX + w_comp * Comp, pairwise differences, and agreement with
// preference labels.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgss/labels.hpp"
#include "sgss/summary.hpp"
#include "sgss/xux.hpp"

namespace sgss {

struct SgssWeights {
  XuxWeights xux = default_xux_weights();
  double comp = 1.0;
};

// Feature order shared by weight vectors and feature vectors.
inline constexpr std::size_t kFeatureCount = 7;
inline constexpr std::array<const char*, kFeatureCount> kFeatureNames = {
    "os", "of", "or", "hr", "srel", "sf", "comp"};

using FeatureArray = std::array<double, kFeatureCount>;

FeatureArray to_array(const SgssWeights& w);
SgssWeights weights_from_array(const FeatureArray& a);
bool is_non_negative(const SgssWeights& w);

double sgss_score(const StructuredSummary& summary, const AggregatedScores& scores,
                  const SgssWeights& weights, double comp, const LmaxConfig& lmax = Unbounded{});

enum class PairOrigin { annotated, derived_degradation };

std::string to_string(PairOrigin o);
PairOrigin parse_pair_origin(const std::string& s);

struct PreferencePair {
  std::string pair_id;
  std::string query_id;
  std::string left_summary_id;
  std::string right_summary_id;
  PairOrigin origin = PairOrigin::annotated;
  std::vector<PreferenceRecord> preferences;  // one per labeller
};

nlohmann::ordered_json to_json(const PreferencePair& p);  // without preferences
PreferencePair pair_from_json(const nlohmann::json& j);
std::vector<PreferencePair> read_pairs(const std::string& path);
std::string dump_pairs(const std::vector<PreferencePair>& pairs);

// Everything needed to score either side of a pair.
struct ScoringContext {
  std::map<std::string, const StructuredSummary*> summaries;
  const AggregatedScores* scores = nullptr;
  std::map<std::string, double> comps;
  LmaxConfig lmax = Unbounded{};

  const StructuredSummary& summary(const std::string& id) const;
  double comp(const std::string& id) const;
};

double delta_sgss(const StructuredSummary& left, const StructuredSummary& right,
                  const AggregatedScores& scores, const SgssWeights& weights, double comp_left,
                  double comp_right, const LmaxConfig& lmax = Unbounded{});
double delta_sgss(const PreferencePair& pair, const ScoringContext& ctx,
                  const SgssWeights& weights);

struct FeatureVector {
  FeatureArray values{};
  double dot(const SgssWeights& w) const;
  bool is_zero() const;
};

// (phi(left) - phi(right), comp(left) - comp(right)), so that
// delta_sgss = w . features exactly.
FeatureVector feature_vector(const StructuredSummary& left, const StructuredSummary& right,
                             const AggregatedScores& scores, double comp_left, double comp_right,
                             const LmaxConfig& lmax = Unbounded{});
FeatureVector feature_vector(const PreferencePair& pair, const ScoringContext& ctx);

enum class TieRule { no_credit, half_credit };

// Fraction of the pair's preference records whose choice matches
// sign(delta). Under no_credit a zero delta agrees with nobody.
double agreement_rate(const std::vector<PreferenceRecord>& preferences, double delta,
                      TieRule tie = TieRule::no_credit);

struct PairEvaluation {
  std::string pair_id;
  double delta = 0.0;
  double ar = 0.0;
};

struct EvalReport {
  std::vector<PairEvaluation> pairs;
  double mar = 0.0;
  std::size_t ties = 0;
};

double mean_agreement_rate(const std::vector<double>& rates);

EvalReport evaluate_pairs(const std::vector<PreferencePair>& pairs, const ScoringContext& ctx,
                          const SgssWeights& weights, TieRule tie = TieRule::no_credit);

nlohmann::ordered_json to_json(const EvalReport& r);

struct Split {
  std::vector<PreferencePair> train;
  std::vector<PreferencePair> test;
};

// Splits by query id so that no query lands on both sides. The number of
// training queries is round(ratio * Q), clamped to [1, Q - 1].
Split train_test_split(const std::vector<PreferencePair>& pairs, double ratio,
                       std::uint64_t seed);

}  // namespace sgss
