#pragma once

// Comprehensiveness by section pooling: sections from N summaries of one
// query form a pool, each summary gets a relevance distribution over the pool,
// and Comp = 1 - JSD(distribution, uniform).

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgss/labels.hpp"
#include "sgss/summary.hpp"

namespace sgss {

struct PooledSection {
  std::string id;
  std::string source_summary_id;
  int source_index = 0;  // 1-based section index within the source summary
  std::optional<std::string> heading;
  std::vector<Statement> statements;
};

enum class CellProvenance { auto_own, labelled };

struct PoolCell {
  std::optional<double> score;  // mapped, averaged over labellers
  CellProvenance provenance = CellProvenance::labelled;
  int labellers = 0;
};

struct SectionPool {
  std::string query_id;
  std::vector<std::string> summary_ids;  // rows, input order
  std::vector<PooledSection> sections;   // columns: summary order, then section order
  std::vector<std::vector<PoolCell>> matrix;

  std::size_t rows() const { return summary_ids.size(); }
  std::size_t cols() const { return sections.size(); }
};

std::string pooled_section_id(const std::string& summary_id, int section_index);

// Requires N > 1 summaries of one query, each with at least one section. Own
// cells are pre-filled with the Perfectly score; the rest are left empty.
SectionPool build_pool(const std::vector<StructuredSummary>& summaries,
                       const GradeMapping& mapping = {});

// The PoolRel targets that still need a label.
std::vector<CriterionTarget> unlabelled_cells(const SectionPool& pool);

// Fills every non-own cell from the PoolRel scores; throws CoverageError
// listing the cells that have none.
void fill_pool(SectionPool& pool, const AggregatedScores& scores);

using Pmf = std::vector<double>;

// g'(k) = g(k) / sum_k g(k).
Pmf to_pmf(std::span<const double> scores);

// Jensen-Shannon divergence with base-2 logarithms, in [0, 1].
double jsd(std::span<const double> p, std::span<const double> q);

// 1 - JSD(row, gold); gold defaults to the uniform distribution over K >= 2
// pooled sections.
double comprehensiveness(std::span<const double> row_pmf,
                         const std::optional<Pmf>& gold = std::nullopt);

struct CompReport {
  SectionPool pool;
  std::vector<double> comp;  // per row
  std::vector<Pmf> pmfs;

  std::optional<double> comp_of(const std::string& summary_id) const;
};

CompReport comp_report(const std::vector<StructuredSummary>& summaries,
                       const AggregatedScores& scores, const GradeMapping& mapping = {});

nlohmann::ordered_json to_json(const SectionPool& pool, const GradeMapping& mapping = {});
nlohmann::ordered_json to_json(const CompReport& report, const GradeMapping& mapping = {});

}  // namespace sgss
