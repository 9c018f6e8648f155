#include "sgss/labels.hpp"

#include <algorithm>
#include <cctype>

#include "sgss/error.hpp"
#include "sgss/io.hpp"

namespace sgss {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool has_section(Criterion c) {
  return c == Criterion::HRdirect || c == Criterion::HRstatement || c == Criterion::SRel ||
         c == Criterion::SF;
}

bool has_statement(Criterion c) {
  return c == Criterion::HRstatement || c == Criterion::SRel || c == Criterion::SF;
}

}  // namespace

std::string to_string(Grade3 g) {
  switch (g) {
    case Grade3::Perfectly:
      return "Perfectly";
    case Grade3::Partially:
      return "Partially";
    case Grade3::No:
      return "No";
  }
  return "?";
}

Grade3 parse_grade(const std::string& s) {
  const auto l = lower(s);
  if (l == "perfectly") return Grade3::Perfectly;
  if (l == "partially") return Grade3::Partially;
  if (l == "no" || l == "not relevant") return Grade3::No;
  throw Error("unknown grade '" + s + "'");
}

double grade_to_score(Grade3 grade, const GradeMapping& mapping) {
  switch (grade) {
    case Grade3::Perfectly:
      return mapping.perfectly;
    case Grade3::Partially:
      return mapping.partially;
    case Grade3::No:
      return mapping.no;
  }
  return 0.0;
}

std::string to_string(Criterion c) {
  switch (c) {
    case Criterion::OS:
      return "OS";
    case Criterion::OF:
      return "OF";
    case Criterion::OR:
      return "OR";
    case Criterion::HRdirect:
      return "HRdirect";
    case Criterion::HRstatement:
      return "HRstatement";
    case Criterion::SRel:
      return "SRel";
    case Criterion::SF:
      return "SF";
    case Criterion::CompAbs:
      return "CompAbs";
    case Criterion::PoolRel:
      return "PoolRel";
  }
  return "?";
}

Criterion parse_criterion(const std::string& s) {
  for (auto c : {Criterion::OS, Criterion::OF, Criterion::OR, Criterion::HRdirect,
                 Criterion::HRstatement, Criterion::SRel, Criterion::SF, Criterion::CompAbs,
                 Criterion::PoolRel})
    if (to_string(c) == s) return c;
  throw Error("unknown criterion '" + s + "'");
}

std::string CriterionTarget::describe() const {
  std::string out = to_string(criterion) + "(" + summary_id;
  if (has_section(criterion)) out += ", i=" + std::to_string(i);
  if (has_statement(criterion)) out += ", j=" + std::to_string(j);
  if (criterion == Criterion::PoolRel) out += ", " + pooled_section_id;
  return out + ")";
}

bool target_exists(const CriterionTarget& t, const StructuredSummary& summary) {
  if (t.summary_id != summary.id) return false;
  if (!has_section(t.criterion)) return true;
  if (t.i < 1 || t.i > static_cast<int>(summary.sections.size())) return false;
  const auto& sec = summary.sections[static_cast<std::size_t>(t.i - 1)];
  if (t.criterion == Criterion::HRdirect) return true;
  return t.j >= 1 && t.j <= static_cast<int>(sec.statements.size());
}

std::string to_string(LabellerKind k) {
  switch (k) {
    case LabellerKind::human:
      return "human";
    case LabellerKind::llm:
      return "llm";
    case LabellerKind::derived:
      return "derived";
  }
  return "?";
}

LabellerKind parse_labeller_kind(const std::string& s) {
  if (s == "human") return LabellerKind::human;
  if (s == "llm") return LabellerKind::llm;
  if (s == "derived") return LabellerKind::derived;
  throw Error("unknown labeller kind '" + s + "'");
}

std::string to_string(Choice c) { return c == Choice::LEFT ? "LEFT" : "RIGHT"; }

Choice parse_choice(const std::string& s) {
  if (s == "LEFT") return Choice::LEFT;
  if (s == "RIGHT") return Choice::RIGHT;
  throw Error("unknown preference choice '" + s + "'");
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::ordered_json to_json(const CriterionTarget& t) {
  nlohmann::ordered_json j;
  j["criterion"] = to_string(t.criterion);
  j["summary_id"] = t.summary_id;
  if (has_section(t.criterion)) j["i"] = t.i;
  if (has_statement(t.criterion)) j["j"] = t.j;
  if (t.criterion == Criterion::PoolRel) j["pooled_section_id"] = t.pooled_section_id;
  return j;
}

CriterionTarget target_from_json(const nlohmann::json& j) {
  CriterionTarget t;
  t.criterion = parse_criterion(j.at("criterion").get<std::string>());
  t.summary_id = j.at("summary_id").get<std::string>();
  if (has_section(t.criterion)) t.i = j.at("i").get<int>();
  if (has_statement(t.criterion)) t.j = j.at("j").get<int>();
  if (t.criterion == Criterion::PoolRel)
    t.pooled_section_id = j.at("pooled_section_id").get<std::string>();
  return t;
}

nlohmann::ordered_json to_json(const LabelRecord& r) {
  nlohmann::ordered_json j;
  j["labeller_id"] = r.labeller_id;
  j["kind"] = to_string(r.kind);
  j["target"] = to_json(r.target);
  if (const auto* g = std::get_if<Grade3>(&r.value))
    j["grade"] = to_string(*g);
  else
    j["score"] = std::get<double>(r.value);
  j["ts"] = r.ts;
  return j;
}

nlohmann::ordered_json to_json(const PreferenceRecord& r) {
  nlohmann::ordered_json j;
  j["labeller_id"] = r.labeller_id;
  j["kind"] = to_string(r.kind);
  j["target"] = nlohmann::ordered_json{{"criterion", "Preference"}, {"pair_id", r.pair_id}};
  j["choice"] = to_string(r.choice);
  j["ts"] = r.ts;
  return j;
}

std::variant<LabelRecord, PreferenceRecord> label_line_from_json(const nlohmann::json& j) {
  try {
    const auto labeller = j.at("labeller_id").get<std::string>();
    if (labeller.empty()) throw Error("labeller_id must be non-empty");
    const auto kind = parse_labeller_kind(j.at("kind").get<std::string>());
    const auto ts = j.value("ts", std::int64_t{0});
    const auto& target = j.at("target");
    if (j.contains("choice")) {
      return PreferenceRecord{labeller, kind, target.at("pair_id").get<std::string>(),
                              parse_choice(j.at("choice").get<std::string>()), ts};
    }
    LabelRecord r{labeller, kind, target_from_json(target), Grade3::No, ts};
    if (j.contains("grade")) {
      r.value = parse_grade(j.at("grade").get<std::string>());
    } else {
      const double score = j.at("score").get<double>();
      if (!(score >= 0.0 && score <= 1.0)) throw Error("score outside [0,1]");
      r.value = score;
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed label record: ") + e.what());
  }
}

LabelFile parse_label_file(const std::string& text, const std::string& origin) {
  LabelFile out;
  int n = 0;
  for (const auto& row : io::parse_ndjson(text, origin)) {
    ++n;
    try {
      auto rec = label_line_from_json(row);
      if (auto* l = std::get_if<LabelRecord>(&rec))
        out.labels.push_back(std::move(*l));
      else
        out.preferences.push_back(std::get<PreferenceRecord>(std::move(rec)));
    } catch (const Error& e) {
      throw Error(origin + " record " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

LabelFile read_label_file(const std::string& path) {
  return parse_label_file(io::read_file(path), path);
}

std::string dump_label_file(const LabelFile& file) {
  std::string out;
  for (const auto& r : file.labels) out += to_json(r).dump() + "\n";
  for (const auto& r : file.preferences) out += to_json(r).dump() + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Aggregation

AggregationPolicy parse_policy(const std::string& s) {
  if (s == "human_only" || s == "human") return AggregationPolicy::human_only;
  if (s == "llm_only" || s == "llm") return AggregationPolicy::llm_only;
  if (s == "combined") return AggregationPolicy::combined;
  throw Error("unknown aggregation policy '" + s + "'");
}

bool policy_admits(AggregationPolicy policy, LabellerKind kind) {
  if (kind == LabellerKind::derived) return true;
  switch (policy) {
    case AggregationPolicy::human_only:
      return kind == LabellerKind::human;
    case AggregationPolicy::llm_only:
      return kind == LabellerKind::llm;
    case AggregationPolicy::combined:
      return true;
  }
  return false;
}

void AggregatedScores::set(const CriterionTarget& target, double mean, int count) {
  scores_[target] = TargetScore{mean, count};
}

const TargetScore* AggregatedScores::find(const CriterionTarget& target) const {
  auto it = scores_.find(target);
  return it == scores_.end() ? nullptr : &it->second;
}

std::optional<double> AggregatedScores::get(const CriterionTarget& target) const {
  if (const auto* s = find(target)) return s->mean;
  return std::nullopt;
}

double AggregatedScores::require(const CriterionTarget& target) const {
  if (const auto* s = find(target)) return s->mean;
  throw CoverageError("uncovered target " + target.describe(), {target.describe()});
}

void AggregatedScores::merge(const AggregatedScores& other) {
  for (const auto& [t, s] : other.scores_) scores_[t] = s;
}

namespace {

template <typename Record, typename Key>
std::vector<Record> latest_by(const std::vector<Record>& records, Key key) {
  std::map<decltype(key(records.front())), std::size_t> winner;
  for (std::size_t k = 0; k < records.size(); ++k) {
    auto [it, inserted] = winner.emplace(key(records[k]), k);
    if (!inserted && records[k].ts >= records[it->second].ts) it->second = k;
  }
  std::vector<std::size_t> keep;
  keep.reserve(winner.size());
  for (const auto& [_, idx] : winner) keep.push_back(idx);
  std::sort(keep.begin(), keep.end());
  std::vector<Record> out;
  out.reserve(keep.size());
  for (auto idx : keep) out.push_back(records[idx]);
  return out;
}

}  // namespace

std::vector<LabelRecord> resolve_latest(const std::vector<LabelRecord>& records) {
  if (records.empty()) return {};
  return latest_by(records, [](const LabelRecord& r) { return std::pair(r.labeller_id, r.target); });
}

std::vector<PreferenceRecord> resolve_latest(const std::vector<PreferenceRecord>& records) {
  if (records.empty()) return {};
  return latest_by(records,
                   [](const PreferenceRecord& r) { return std::pair(r.labeller_id, r.pair_id); });
}

AggregatedScores aggregate(const std::vector<LabelRecord>& records, AggregationPolicy policy,
                           const GradeMapping& mapping,
                           const std::vector<CriterionTarget>& required) {
  std::map<CriterionTarget, std::pair<double, int>> sums;
  for (const auto& r : resolve_latest(records)) {
    if (!policy_admits(policy, r.kind)) continue;
    const double s = std::holds_alternative<Grade3>(r.value)
                         ? grade_to_score(std::get<Grade3>(r.value), mapping)
                         : std::get<double>(r.value);
    auto& acc = sums[r.target];
    acc.first += s;
    acc.second += 1;
  }
  AggregatedScores out;
  for (const auto& [t, acc] : sums) out.set(t, acc.first / acc.second, acc.second);

  std::vector<std::string> missing;
  for (const auto& t : required)
    if (!out.find(t)) missing.push_back(t.describe());
  if (!missing.empty())
    throw CoverageError(std::to_string(missing.size()) + " uncovered target(s)", missing);
  return out;
}

std::map<std::string, std::vector<PreferenceRecord>> preferences_by_pair(
    const std::vector<PreferenceRecord>& records, AggregationPolicy policy) {
  std::map<std::string, std::vector<PreferenceRecord>> out;
  for (const auto& r : resolve_latest(records))
    if (policy_admits(policy, r.kind)) out[r.pair_id].push_back(r);
  return out;
}

std::vector<CriterionTarget> annotation_checklist(const StructuredSummary& s) {
  std::vector<CriterionTarget> out;
  for (auto c : {Criterion::OS, Criterion::OF, Criterion::OR})
    out.push_back(CriterionTarget::overview(c, s.id));
  for (std::size_t i = 0; i < s.sections.size(); ++i) {
    const int si = static_cast<int>(i) + 1;
    if (s.sections[i].heading) out.push_back(CriterionTarget::heading(s.id, si));
    for (std::size_t j = 0; j < s.sections[i].statements.size(); ++j) {
      const int sj = static_cast<int>(j) + 1;
      out.push_back(CriterionTarget::statement(Criterion::SRel, s.id, si, sj));
      out.push_back(CriterionTarget::statement(Criterion::SF, s.id, si, sj));
    }
  }
  out.push_back(CriterionTarget::overview(Criterion::CompAbs, s.id));
  return out;
}

// ---------------------------------------------------------------------------
// Degraded summaries

std::string derived_pair_id(const std::string& parent_id, const std::string& degraded_id) {
  return parent_id + "|" + degraded_id;
}

DerivedLabels derive_degraded_labels(const AggregatedScores& parent_scores,
                                     const StructuredSummary& parent,
                                     const StructuredSummary& degraded) {
  if (!degraded.provenance || degraded.provenance->parent_id != parent.id)
    throw Error("provenance mismatch: '" + degraded.id + "' is not derived from '" + parent.id +
                "'");
  const auto strategy = degraded.provenance->strategy;
  DerivedLabels out;
  bool removed_relevant = false;

  for (const auto& [target, score] : parent_scores.entries()) {
    if (target.summary_id != parent.id) continue;
    // Pool cells belong to a specific pool, which the degraded summary is not in.
    if (target.criterion == Criterion::PoolRel) continue;
    CriterionTarget moved = target;
    moved.summary_id = degraded.id;
    double mean = score.mean;
    if (strategy == DegradeStrategy::no_section1 && has_section(target.criterion)) {
      if (target.i == 1) {
        if (target.criterion == Criterion::SRel && score.mean > 0.0) removed_relevant = true;
        continue;
      }
      moved.i = target.i - 1;
    }
    if (strategy == DegradeStrategy::no_headings &&
        (target.criterion == Criterion::HRdirect || target.criterion == Criterion::HRstatement))
      mean = 0.0;
    if (!target_exists(moved, degraded)) continue;
    out.scores.set(moved, mean, score.count);
  }

  if (strategy == DegradeStrategy::no_headings || removed_relevant)
    out.preference = PreferenceRecord{kDerivedLabellerId, LabellerKind::derived,
                                      derived_pair_id(parent.id, degraded.id), Choice::LEFT, 0};
  return out;
}

std::vector<LabelRecord> to_derived_records(const AggregatedScores& scores, std::int64_t ts) {
  std::vector<LabelRecord> out;
  out.reserve(scores.size());
  for (const auto& [t, s] : scores.entries())
    out.push_back(LabelRecord{kDerivedLabellerId, LabellerKind::derived, t, s.mean, ts});
  return out;
}

}  // namespace sgss
