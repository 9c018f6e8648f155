#pragma once

// Label vocabulary, label files, multi-labeller aggregation, and label
// inheritance for degraded summaries.

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgss/summary.hpp"

namespace sgss {

enum class Grade3 { Perfectly, Partially, No };

std::string to_string(Grade3 g);
// Accepts "Perfectly", "Partially", "No" and "Not relevant" (any case).
Grade3 parse_grade(const std::string& s);

struct GradeMapping {
  double perfectly = 1.0;
  double partially = 0.5;
  double no = 0.0;
};

double grade_to_score(Grade3 grade, const GradeMapping& mapping = {});

enum class Criterion { OS, OF, OR, HRdirect, HRstatement, SRel, SF, CompAbs, PoolRel };

std::string to_string(Criterion c);
Criterion parse_criterion(const std::string& s);

struct CriterionTarget {
  Criterion criterion = Criterion::OS;
  std::string summary_id;
  int i = 0;  // 1-based section, when the criterion has one
  int j = 0;  // 1-based statement, when the criterion has one
  std::string pooled_section_id;

  auto operator<=>(const CriterionTarget&) const = default;
  std::string describe() const;

  static CriterionTarget overview(Criterion c, std::string summary_id) {
    return {c, std::move(summary_id), 0, 0, {}};
  }
  static CriterionTarget heading(std::string summary_id, int i) {
    return {Criterion::HRdirect, std::move(summary_id), i, 0, {}};
  }
  static CriterionTarget statement(Criterion c, std::string summary_id, int i, int j) {
    return {c, std::move(summary_id), i, j, {}};
  }
  static CriterionTarget pool(std::string summary_id, std::string pooled_id) {
    return {Criterion::PoolRel, std::move(summary_id), 0, 0, std::move(pooled_id)};
  }
};

// True when the target's coordinates exist in `summary` (and it belongs to it).
bool target_exists(const CriterionTarget& target, const StructuredSummary& summary);

// `derived` marks records materialised from a parent summary's labels; they
// are included under every aggregation policy.
enum class LabellerKind { human, llm, derived };

std::string to_string(LabellerKind k);
LabellerKind parse_labeller_kind(const std::string& s);

// A grade, or an already-mapped score (derived labels carry the parent's mean).
using LabelValue = std::variant<Grade3, double>;

struct LabelRecord {
  std::string labeller_id;
  LabellerKind kind = LabellerKind::human;
  CriterionTarget target;
  LabelValue value = Grade3::No;
  std::int64_t ts = 0;  // milliseconds since epoch
};

enum class Choice { LEFT, RIGHT };

std::string to_string(Choice c);
Choice parse_choice(const std::string& s);

struct PreferenceRecord {
  std::string labeller_id;
  LabellerKind kind = LabellerKind::human;
  std::string pair_id;
  Choice choice = Choice::LEFT;
  std::int64_t ts = 0;
};

// Contents of a label file: grade records and preference records interleaved.
struct LabelFile {
  std::vector<LabelRecord> labels;
  std::vector<PreferenceRecord> preferences;
};

nlohmann::ordered_json to_json(const LabelRecord& r);
nlohmann::ordered_json to_json(const PreferenceRecord& r);
nlohmann::ordered_json to_json(const CriterionTarget& t);
CriterionTarget target_from_json(const nlohmann::json& j);
// Parses one label-file line; returns whichever record kind it holds.
std::variant<LabelRecord, PreferenceRecord> label_line_from_json(const nlohmann::json& j);

LabelFile parse_label_file(const std::string& text, const std::string& origin = "labels");
LabelFile read_label_file(const std::string& path);
std::string dump_label_file(const LabelFile& file);

enum class AggregationPolicy { human_only, llm_only, combined };

AggregationPolicy parse_policy(const std::string& s);
bool policy_admits(AggregationPolicy policy, LabellerKind kind);

struct TargetScore {
  double mean = 0.0;
  int count = 0;
};

class AggregatedScores {
 public:
  void set(const CriterionTarget& target, double mean, int count = 1);
  const TargetScore* find(const CriterionTarget& target) const;
  std::optional<double> get(const CriterionTarget& target) const;
  // Throws CoverageError naming the target when absent.
  double require(const CriterionTarget& target) const;

  const std::map<CriterionTarget, TargetScore>& entries() const { return scores_; }
  std::size_t size() const { return scores_.size(); }

  // Adds every entry of `other`, replacing on collision.
  void merge(const AggregatedScores& other);

 private:
  std::map<CriterionTarget, TargetScore> scores_;
};

// Last-write-wins per (labeller, target): the record with the greatest ts
// wins, later records winning ties.
std::vector<LabelRecord> resolve_latest(const std::vector<LabelRecord>& records);
std::vector<PreferenceRecord> resolve_latest(const std::vector<PreferenceRecord>& records);

// Mean mapped score per target under `policy`. Every target in `required`
// must be covered or a CoverageError lists the gaps.
AggregatedScores aggregate(const std::vector<LabelRecord>& records, AggregationPolicy policy,
                           const GradeMapping& mapping = {},
                           const std::vector<CriterionTarget>& required = {});

// Preference records for each pair under `policy`, one per labeller.
std::map<std::string, std::vector<PreferenceRecord>> preferences_by_pair(
    const std::vector<PreferenceRecord>& records, AggregationPolicy policy);

// Targets a human labeller supplies per summary when annotating a pair: OS,
// OF and OR for the overview, HRdirect per heading, SRel and SF per statement,
// CompAbs for the summary.
std::vector<CriterionTarget> annotation_checklist(const StructuredSummary& summary);

struct DerivedLabels {
  AggregatedScores scores;
  std::optional<PreferenceRecord> preference;  // parent preferred as LEFT
};

inline constexpr const char* kDerivedLabellerId = "derived";

std::string derived_pair_id(const std::string& parent_id, const std::string& degraded_id);

// Carries the parent's absolute scores over to the degraded summary and emits
// a synthetic "parent preferred" record when the degradation removed
// something worth having.
DerivedLabels derive_degraded_labels(const AggregatedScores& parent_scores,
                                     const StructuredSummary& parent,
                                     const StructuredSummary& degraded);

// Converts aggregated scores for a summary back into label records that
// reproduce them exactly under any policy.
std::vector<LabelRecord> to_derived_records(const AggregatedScores& scores, std::int64_t ts);

}  // namespace sgss
