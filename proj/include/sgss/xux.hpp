#pragma once

// Expected user experience (XUX) over a structured summary, read top-down by
// a population of users who abandon it at different lines.

#include <array>
#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgss/labels.hpp"
#include "sgss/summary.hpp"

namespace sgss {

// One value per XUX criterion. Used both for weights and for the
// per-criterion decomposition of a score.
struct CriterionVector {
  double os = 0.0;
  double of = 0.0;
  double or_ = 0.0;
  double hr = 0.0;
  double srel = 0.0;
  double sf = 0.0;

  static constexpr std::size_t size = 6;
  std::array<double, size> as_array() const { return {os, of, or_, hr, srel, sf}; }
  static CriterionVector from_array(const std::array<double, size>& a) {
    return {a[0], a[1], a[2], a[3], a[4], a[5]};
  }
};

double dot(const CriterionVector& a, const CriterionVector& b);

using XuxWeights = CriterionVector;
using Phi = CriterionVector;

// 1/3 per overview criterion, 1 for HR, 1/2 per statement criterion. These
// are arbitrary starting values that satisfy the normalisation bounds.
XuxWeights default_xux_weights();

// w_OS + w_OF + w_OR <= 1, w_HR <= 1, w_SRel + w_SF <= 1, all >= 0. Under
// these bounds every line adds at most 1 to X'(l).
bool is_normalized(const XuxWeights& w);
bool is_non_negative(const XuxWeights& w);

struct ReadingModel {
  double minutes = 1.0;
  double chars_per_minute = 500.0;
  double avg_chars_per_line = 0.0;
};

struct Unbounded {};

using LmaxConfig = std::variant<Unbounded, std::size_t, ReadingModel>;

// round-half-up(rate * minutes / avlen), floored at 1.
std::size_t estimate_lmax(const ReadingModel& model);
LineLimit resolve_lmax(const LmaxConfig& cfg);

// Mean characters per line across the given summaries (headings, statements
// and the overview each count as one line).
double average_line_length(const std::vector<StructuredSummary>& summaries);

double overview_quality(const StructuredSummary& summary, const AggregatedScores& scores,
                        const XuxWeights& weights);

// Mean heading relevance of section i's statements when every statement has an
// HRstatement score; otherwise the HRdirect score. Throws CoverageError if
// neither is available.
double heading_representativeness(const StructuredSummary& summary, int section_index,
                                  const AggregatedScores& scores);

// Every score XUX needs for `summary`. HR headings list HRdirect when neither
// source is complete.
std::vector<CriterionTarget> xux_required_targets(const StructuredSummary& summary,
                                                  const AggregatedScores& scores);
void check_xux_coverage(const StructuredSummary& summary, const AggregatedScores& scores);

// Raw criterion scores attached to one line (unweighted).
struct LineScores {
  CriterionVector raw;
};

std::vector<LineScores> line_scores(const StructuredSummary& summary,
                                    const std::vector<Line>& lines,
                                    const AggregatedScores& scores);

// X'(l): cumulative weighted score of every component at or above line l.
std::vector<double> line_prefix_score(const StructuredSummary& summary,
                                      const std::vector<Line>& lines,
                                      const AggregatedScores& scores, const XuxWeights& weights);

// X(l) = X'(l) / l.
std::vector<double> user_experience(const std::vector<double>& prefix);

using Apd = std::vector<double>;

Apd uniform_apd(std::size_t n);
void check_apd(const Apd& apd, std::size_t expected_length);

double xux(const StructuredSummary& summary, const AggregatedScores& scores,
           const XuxWeights& weights, const LmaxConfig& lmax = Unbounded{});
double xux_f(const StructuredSummary& summary, const AggregatedScores& scores,
             const XuxWeights& weights);
double xux_general(const StructuredSummary& summary, const AggregatedScores& scores,
                   const XuxWeights& weights, const Apd& apd, const LmaxConfig& lmax = Unbounded{});

// phi_c = (1/L') sum_l (cumulative raw score of criterion c at l) / l, so that
// xux(w) = dot(w, phi) for every weight vector.
Phi decompose_phi(const StructuredSummary& summary, const AggregatedScores& scores,
                  const LmaxConfig& lmax = Unbounded{});

struct XuxReport {
  std::string summary_id;
  std::size_t L = 0;
  std::size_t L_prime = 0;
  std::vector<double> x_prime;  // over the truncated lines
  std::vector<double> x;
  double xux = 0.0;
  double xux_f = 0.0;
  std::optional<double> xux_g;
  Phi phi;
  bool trailing_overview = false;
};

XuxReport evaluate_xux(const StructuredSummary& summary, const AggregatedScores& scores,
                       const XuxWeights& weights, const LmaxConfig& lmax = Unbounded{},
                       const std::optional<Apd>& apd = std::nullopt);

nlohmann::ordered_json to_json(const XuxReport& r);
XuxReport xux_report_from_json(const nlohmann::json& j);

}  // namespace sgss
