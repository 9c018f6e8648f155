#include "sgss/workspace.hpp"

#include <algorithm>
#include <set>

#include "sgss/error.hpp"
#include "sgss/fit.hpp"
#include "sgss/io.hpp"

namespace sgss {

namespace fs = std::filesystem;

Workspace::Workspace(fs::path root) : root_(std::move(root)) {
  if (!fs::is_directory(root_)) throw Error("workspace '" + root_.string() + "' is not a directory");
}

fs::path Workspace::pool_path(const std::string& query_id) const {
  return root_ / "pools" / (query_id + ".json");
}

fs::path Workspace::comp_path(const std::string& query_id) const {
  return root_ / "comp" / (query_id + ".json");
}

std::vector<SummaryDocument> Workspace::load_summaries() const {
  if (!fs::exists(summaries_path())) throw Error("missing " + summaries_path().string());
  return read_summary_dataset(summaries_path().string());
}

LabelFile Workspace::load_labels() const {
  if (!fs::exists(labels_path())) return {};
  return read_label_file(labels_path().string());
}

std::vector<PreferencePair> Workspace::load_pairs(AggregationPolicy policy) const {
  if (!fs::exists(pairs_path())) return {};
  auto pairs = read_pairs(pairs_path().string());
  const auto prefs = preferences_by_pair(load_labels().preferences, policy);
  for (auto& p : pairs) {
    auto it = prefs.find(p.pair_id);
    if (it != prefs.end()) p.preferences = it->second;
  }
  return pairs;
}

std::map<std::string, double> Workspace::load_comps() const {
  std::map<std::string, double> out;
  const auto dir = root_ / "comp";
  if (fs::is_directory(dir)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
      if (e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      try {
        const auto j = nlohmann::json::parse(io::read_file(f));
        for (const auto& [id, v] : j.at("comp").items()) out[id] = v.get<double>();
      } catch (const nlohmann::json::exception& e) {
        throw Error(f.string() + ": " + e.what());
      }
    }
  }
  if (fs::exists(summaries_path())) {
    for (const auto& d : load_summaries()) {
      const auto& s = d.summary;
      if (out.count(s.id) || !s.provenance) continue;
      auto it = out.find(s.provenance->parent_id);
      if (it != out.end()) out[s.id] = it->second;
    }
  }
  return out;
}

SgssWeights Workspace::load_weights(const std::optional<fs::path>& path) const {
  const auto p = path ? *path : weights_path();
  if (!fs::exists(p)) {
    if (path) throw Error("missing weights file " + p.string());
    return SgssWeights{};
  }
  try {
    return weights_from_json(nlohmann::json::parse(io::read_file(p)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(p.string() + ": " + e.what());
  }
}

void Workspace::save_summaries(const std::vector<SummaryDocument>& docs) const {
  io::write_file_atomic(summaries_path(), dump_summary_dataset(docs));
}

void Workspace::save_labels(const LabelFile& file) const {
  io::write_file_atomic(labels_path(), dump_label_file(file));
}

void Workspace::append_labels(const LabelFile& extra) const {
  auto file = load_labels();
  file.labels.insert(file.labels.end(), extra.labels.begin(), extra.labels.end());
  file.preferences.insert(file.preferences.end(), extra.preferences.begin(), extra.preferences.end());
  save_labels(file);
}

void Workspace::save_pairs(const std::vector<PreferencePair>& pairs) const {
  io::write_file_atomic(pairs_path(), dump_pairs(pairs));
}

std::map<std::string, std::vector<StructuredSummary>> summaries_by_query(
    const std::vector<SummaryDocument>& docs, bool include_degraded) {
  std::map<std::string, std::vector<StructuredSummary>> out;
  for (const auto& d : docs)
    if (include_degraded || !d.summary.provenance) out[d.summary.query_id].push_back(d.summary);
  return out;
}

void check_references(const std::vector<SummaryDocument>& docs, const std::vector<PreferencePair>& pairs) {
  std::map<std::string, std::string> query_of;
  for (const auto& d : docs)
    if (!query_of.emplace(d.summary.id, d.summary.query_id).second)
      throw Error("duplicate summary id '" + d.summary.id + "'");
  for (const auto& p : pairs) {
    for (const auto* side : {&p.left_summary_id, &p.right_summary_id}) {
      auto it = query_of.find(*side);
      if (it == query_of.end())
        throw Error("pair '" + p.pair_id + "' references unknown summary '" + *side + "'");
      if (it->second != p.query_id)
        throw Error("pair '" + p.pair_id + "': summary '" + *side + "' belongs to query '" + it->second + "'");
    }
  }
}

}  // namespace sgss
