#include "sgss/summary.hpp"

#include <algorithm>
#include <set>

#include "sgss/error.hpp"
#include "sgss/io.hpp"

namespace sgss {

std::string to_string(DegradeStrategy s) {
  switch (s) {
    case DegradeStrategy::no_headings:
      return "NoHeadings";
    case DegradeStrategy::no_section1:
      return "NoSection1";
  }
  return "?";
}

DegradeStrategy parse_degrade_strategy(const std::string& s) {
  if (s == "NoHeadings" || s == "no-headings") return DegradeStrategy::no_headings;
  if (s == "NoSection1" || s == "no-section1") return DegradeStrategy::no_section1;
  throw Error("unknown degradation strategy '" + s + "'");
}

const DocEntry* StructuredSummary::find_doc(int citation_number) const {
  for (const auto& d : doclist)
    if (d.citation_number == citation_number) return &d;
  return nullptr;
}

std::size_t line_count(const StructuredSummary& summary) {
  std::size_t n = 1;
  for (const auto& sec : summary.sections) {
    if (sec.heading) ++n;
    n += sec.statements.size();
  }
  return n;
}

std::vector<Line> enumerate_lines(const StructuredSummary& summary) {
  std::vector<Line> lines;
  lines.reserve(line_count(summary));
  auto push = [&](LineKind kind, int i, int j, bool final) {
    lines.push_back(Line{static_cast<int>(lines.size()) + 1, kind, i, j, final});
  };
  const bool leading = summary.overview.position == OverviewPosition::leading;
  if (leading) push(LineKind::overview, 0, 0, true);
  for (std::size_t i = 0; i < summary.sections.size(); ++i) {
    const auto& sec = summary.sections[i];
    const int si = static_cast<int>(i) + 1;
    if (sec.heading) push(LineKind::heading, si, 0, sec.statements.empty());
    for (std::size_t j = 0; j < sec.statements.size(); ++j)
      push(LineKind::statement, si, static_cast<int>(j) + 1, j + 1 == sec.statements.size());
  }
  if (!leading) push(LineKind::overview, 0, 0, true);
  return lines;
}

std::vector<Line> truncate_lines(const std::vector<Line>& lines, LineLimit l_max) {
  if (l_max && *l_max == 0) throw Error("L_max must be positive");
  const std::size_t keep = l_max ? std::min(lines.size(), *l_max) : lines.size();
  return {lines.begin(), lines.begin() + static_cast<std::ptrdiff_t>(keep)};
}

StructuredSummary degrade_no_headings(const StructuredSummary& summary) {
  if (summary.sections.empty())
    throw Error("NoHeadings: summary '" + summary.id + "' has no sections");
  StructuredSummary out = summary;
  out.id = summary.id + "~NoHeadings";
  for (auto& sec : out.sections) sec.heading.reset();
  out.provenance = Provenance{summary.id, DegradeStrategy::no_headings};
  return out;
}

StructuredSummary degrade_no_section1(const StructuredSummary& summary) {
  if (summary.sections.empty())
    throw Error("NoSection1: summary '" + summary.id + "' has no sections");
  StructuredSummary out = summary;
  out.id = summary.id + "~NoSection1";
  out.sections.erase(out.sections.begin());
  out.provenance = Provenance{summary.id, DegradeStrategy::no_section1};
  return out;
}

StructuredSummary degrade(const StructuredSummary& summary, DegradeStrategy strategy) {
  return strategy == DegradeStrategy::no_headings ? degrade_no_headings(summary)
                                                  : degrade_no_section1(summary);
}

std::vector<Violation> validate(const StructuredSummary& summary) {
  std::vector<Violation> out;
  if (summary.id.empty()) out.push_back({"summary.id", "id must be non-empty"});
  std::set<int> numbers;
  for (std::size_t k = 0; k < summary.doclist.size(); ++k) {
    const int n = summary.doclist[k].citation_number;
    const std::string path = "doclist[" + std::to_string(k) + "]";
    if (n < 1) out.push_back({path, "citation number must be >= 1"});
    if (!numbers.insert(n).second) out.push_back({path, "duplicate citation number"});
  }
  auto check_citations = [&](const std::vector<int>& cites, const std::string& path) {
    for (int c : cites)
      if (!numbers.count(c))
        out.push_back({path, "unresolved citation [" + std::to_string(c) + "]"});
  };
  check_citations(summary.overview.citations, "overview");
  for (std::size_t i = 0; i < summary.sections.size(); ++i) {
    const auto& sec = summary.sections[i];
    const std::string path = "sections[" + std::to_string(i) + "]";
    if (sec.statements.empty()) out.push_back({path, "J_i must be > 0"});
    for (std::size_t j = 0; j < sec.statements.size(); ++j)
      check_citations(sec.statements[j].citations,
                      path + ".statements[" + std::to_string(j) + "]");
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

std::vector<int> citations_from(const nlohmann::json& j) {
  std::vector<int> c = j.value("citations", std::vector<int>{});
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  return c;
}

}  // namespace

nlohmann::ordered_json to_json(const SummaryDocument& doc) {
  using oj = nlohmann::ordered_json;
  const auto& s = doc.summary;
  oj summary;
  summary["id"] = s.id;
  summary["system_id"] = s.system_id;
  summary["overview"] = oj{{"text", s.overview.text},
                           {"citations", s.overview.citations},
                           {"position", s.overview.position == OverviewPosition::leading
                                            ? "leading"
                                            : "trailing"}};
  oj sections = oj::array();
  for (const auto& sec : s.sections) {
    oj st = oj::array();
    for (const auto& stmt : sec.statements)
      st.push_back(oj{{"text", stmt.text}, {"citations", stmt.citations}});
    oj o;
    o["heading"] = sec.heading ? oj(*sec.heading) : oj(nullptr);
    o["statements"] = std::move(st);
    sections.push_back(std::move(o));
  }
  summary["sections"] = std::move(sections);
  oj docs = oj::array();
  for (const auto& d : s.doclist) {
    oj o{{"n", d.citation_number}, {"url", d.url}, {"title", d.title}};
    if (d.snippet) o["snippet"] = *d.snippet;
    docs.push_back(std::move(o));
  }
  summary["doclist"] = std::move(docs);
  if (s.provenance)
    summary["provenance"] =
        oj{{"parent_id", s.provenance->parent_id}, {"strategy", to_string(s.provenance->strategy)}};

  oj out;
  out["version"] = kSummaryFormatVersion;
  out["query"] = oj{{"id", doc.query.id}, {"text", doc.query.text}, {"language", doc.query.language}};
  out["summary"] = std::move(summary);
  return out;
}

SummaryDocument summary_document_from_json(const nlohmann::json& j) {
  try {
    const int version = j.at("version").get<int>();
    if (version != kSummaryFormatVersion)
      throw Error("unsupported summary format version " + std::to_string(version));
    SummaryDocument doc;
    const auto& q = j.at("query");
    doc.query.id = q.at("id").get<std::string>();
    doc.query.text = q.at("text").get<std::string>();
    doc.query.language = q.value("language", std::string("en"));
    if (doc.query.text.empty()) throw Error("query '" + doc.query.id + "' has empty text");

    const auto& s = j.at("summary");
    auto& out = doc.summary;
    out.id = s.at("id").get<std::string>();
    out.query_id = doc.query.id;
    out.system_id = s.value("system_id", std::string());
    const auto& ov = s.at("overview");
    out.overview.text = ov.at("text").get<std::string>();
    out.overview.citations = citations_from(ov);
    const std::string pos = ov.value("position", std::string("leading"));
    if (pos == "leading")
      out.overview.position = OverviewPosition::leading;
    else if (pos == "trailing")
      out.overview.position = OverviewPosition::trailing;
    else
      throw Error("summary '" + out.id + "': bad overview position '" + pos + "'");
    for (const auto& sec : s.value("sections", nlohmann::json::array())) {
      Section section;
      if (!sec.at("heading").is_null()) section.heading = sec.at("heading").get<std::string>();
      for (const auto& st : sec.at("statements"))
        section.statements.push_back(Statement{st.at("text").get<std::string>(), citations_from(st)});
      out.sections.push_back(std::move(section));
    }
    for (const auto& d : s.value("doclist", nlohmann::json::array())) {
      DocEntry e;
      e.citation_number = d.at("n").get<int>();
      e.url = d.value("url", std::string());
      e.title = d.value("title", std::string());
      if (d.contains("snippet") && !d.at("snippet").is_null())
        e.snippet = d.at("snippet").get<std::string>();
      out.doclist.push_back(std::move(e));
    }
    if (s.contains("provenance")) {
      const auto& p = s.at("provenance");
      out.provenance = Provenance{p.at("parent_id").get<std::string>(),
                                  parse_degrade_strategy(p.at("strategy").get<std::string>())};
    }
    return doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed summary document: ") + e.what());
  }
}

std::vector<SummaryDocument> read_summary_dataset(const std::string& path) {
  std::vector<SummaryDocument> docs;
  std::set<std::string> ids;
  for (const auto& row : io::read_ndjson(path)) {
    docs.push_back(summary_document_from_json(row));
    if (!ids.insert(docs.back().summary.id).second)
      throw Error(path + ": duplicate summary id '" + docs.back().summary.id + "'");
  }
  return docs;
}

std::string dump_summary_dataset(const std::vector<SummaryDocument>& docs) {
  std::vector<nlohmann::ordered_json> rows;
  rows.reserve(docs.size());
  for (const auto& d : docs) rows.push_back(to_json(d));
  return io::dump_ndjson(rows);
}

}  // namespace sgss
