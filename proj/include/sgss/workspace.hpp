#pragma once

// On-disk layout of a working directory and the loaders the commands share.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sgss/labels.hpp"
#include "sgss/sgss.hpp"
#include "sgss/summary.hpp"
#include "sgss/xux.hpp"

namespace sgss {

class Workspace {
 public:
  explicit Workspace(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path summaries_path() const { return root_ / "summaries.ndjson"; }
  std::filesystem::path labels_path() const { return root_ / "labels.ndjson"; }
  std::filesystem::path pairs_path() const { return root_ / "pairs.ndjson"; }
  std::filesystem::path weights_path() const { return root_ / "weights.json"; }
  std::filesystem::path split_path() const { return root_ / "split.json"; }
  std::filesystem::path transcripts_path() const { return root_ / "transcripts.ndjson"; }
  std::filesystem::path xux_reports_path() const { return root_ / "reports" / "xux.ndjson"; }
  std::filesystem::path eval_report_path() const { return root_ / "reports" / "eval.json"; }
  std::filesystem::path plot_path() const { return root_ / "reports" / "plot.csv"; }
  std::filesystem::path pool_path(const std::string& query_id) const;
  std::filesystem::path comp_path(const std::string& query_id) const;
  std::filesystem::path assignments_path() const { return root_ / "service" / "assignments.ndjson"; }
  std::filesystem::path skips_path() const { return root_ / "service" / "skips.ndjson"; }

  std::vector<SummaryDocument> load_summaries() const;  // required
  LabelFile load_labels() const;                       // empty when absent
  // Preference records are attached to their pairs under `policy`.
  std::vector<PreferencePair> load_pairs(AggregationPolicy policy = AggregationPolicy::combined) const;
  // Comp per summary from every comp report; degraded summaries inherit their
  // parent's value when they have none of their own.
  std::map<std::string, double> load_comps() const;
  SgssWeights load_weights(const std::optional<std::filesystem::path>& path = std::nullopt) const;

  void save_summaries(const std::vector<SummaryDocument>& docs) const;
  void save_labels(const LabelFile& file) const;
  void append_labels(const LabelFile& extra) const;
  void save_pairs(const std::vector<PreferencePair>& pairs) const;

 private:
  std::filesystem::path root_;
};

// Query id -> summaries, in file order.
std::map<std::string, std::vector<StructuredSummary>> summaries_by_query(
    const std::vector<SummaryDocument>& docs, bool include_degraded = false);

// Every summary id must be unique and every pair side must resolve.
void check_references(const std::vector<SummaryDocument>& docs, const std::vector<PreferencePair>& pairs);

}  // namespace sgss
