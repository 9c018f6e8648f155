#pragma once

// Structured search summaries: an overview, headed sections of statements
// and the doclist they cite. Lines are the unit of reading position.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace sgss {

struct Query {
  std::string id;
  std::string text;
  std::string language = "en";
};

struct DocEntry {
  int citation_number = 1;
  std::string url;
  std::string title;
  std::optional<std::string> snippet;
};

struct Statement {
  std::string text;
  std::vector<int> citations;  // sorted, unique
};

struct Section {
  // nullopt once the heading has been stripped (NoHeadings). The container is
  // kept so that statement coordinates (i, j) stay stable.
  std::optional<std::string> heading;
  std::vector<Statement> statements;
};

enum class OverviewPosition { leading, trailing };

struct Overview {
  std::string text;
  std::vector<int> citations;
  OverviewPosition position = OverviewPosition::leading;
};

enum class DegradeStrategy { no_headings, no_section1 };

std::string to_string(DegradeStrategy s);
DegradeStrategy parse_degrade_strategy(const std::string& s);

struct Provenance {
  std::string parent_id;
  DegradeStrategy strategy = DegradeStrategy::no_headings;
};

struct StructuredSummary {
  std::string id;
  std::string query_id;
  std::string system_id;
  Overview overview;
  std::vector<Section> sections;
  std::vector<DocEntry> doclist;
  std::optional<Provenance> provenance;

  std::size_t section_count() const { return sections.size(); }
  const DocEntry* find_doc(int citation_number) const;
};

enum class LineKind { overview, heading, statement };

struct Line {
  int index = 0;    // 1-based
  LineKind kind = LineKind::overview;
  int section = 0;    // 1-based section i; 0 for the overview
  int statement = 0;  // 1-based statement j; 0 unless kind == statement
  bool section_final = false;  // F(l)
};

// Total structural lines: 1 + I + sum_i J_i, counting only headings that are
// still present.
std::size_t line_count(const StructuredSummary& summary);

std::vector<Line> enumerate_lines(const StructuredSummary& summary);

// Maximum lines read. nullopt means unbounded.
using LineLimit = std::optional<std::size_t>;

// First min(L, l_max) lines. Throws sgss::Error on l_max == 0.
std::vector<Line> truncate_lines(const std::vector<Line>& lines, LineLimit l_max);

StructuredSummary degrade_no_headings(const StructuredSummary& summary);
StructuredSummary degrade_no_section1(const StructuredSummary& summary);
StructuredSummary degrade(const StructuredSummary& summary, DegradeStrategy strategy);

struct Violation {
  std::string path;
  std::string rule;
};

std::vector<Violation> validate(const StructuredSummary& summary);

// One record of a summary dataset: the summary plus the query it answers.
struct SummaryDocument {
  Query query;
  StructuredSummary summary;
};

inline constexpr int kSummaryFormatVersion = 1;

nlohmann::ordered_json to_json(const SummaryDocument& doc);
SummaryDocument summary_document_from_json(const nlohmann::json& j);

// Newline-delimited datasets, one document per line. Blank lines are skipped.
std::vector<SummaryDocument> read_summary_dataset(const std::string& path);
std::string dump_summary_dataset(const std::vector<SummaryDocument>& docs);

}  // namespace sgss
