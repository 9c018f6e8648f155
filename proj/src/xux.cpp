#include "sgss/xux.hpp"

#include <cmath>
#include <numeric>

#include "sgss/error.hpp"

namespace sgss {

double dot(const CriterionVector& a, const CriterionVector& b) {
  return a.os * b.os + a.of * b.of + a.or_ * b.or_ + a.hr * b.hr + a.srel * b.srel + a.sf * b.sf;
}

XuxWeights default_xux_weights() { return {1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0, 0.5, 0.5}; }

bool is_non_negative(const XuxWeights& w) {
  for (double v : w.as_array())
    if (!(v >= 0.0)) return false;
  return true;
}

bool is_normalized(const XuxWeights& w) {
  constexpr double eps = 1e-12;
  return is_non_negative(w) && w.os + w.of + w.or_ <= 1.0 + eps && w.hr <= 1.0 + eps &&
         w.srel + w.sf <= 1.0 + eps;
}

std::size_t estimate_lmax(const ReadingModel& m) {
  if (!(m.avg_chars_per_line > 0.0)) throw Error("average line length must be positive");
  if (!(m.minutes > 0.0) || !(m.chars_per_minute > 0.0))
    throw Error("reading time and speed must be positive");
  const double raw = m.chars_per_minute * m.minutes / m.avg_chars_per_line;
  const double rounded = std::floor(raw + 0.5);
  return rounded < 1.0 ? 1 : static_cast<std::size_t>(rounded);
}

LineLimit resolve_lmax(const LmaxConfig& cfg) {
  if (std::holds_alternative<Unbounded>(cfg)) return std::nullopt;
  if (const auto* n = std::get_if<std::size_t>(&cfg)) {
    if (*n == 0) throw Error("L_max must be positive");
    return *n;
  }
  return estimate_lmax(std::get<ReadingModel>(cfg));
}

double average_line_length(const std::vector<StructuredSummary>& summaries) {
  std::size_t chars = 0, lines = 0;
  for (const auto& s : summaries) {
    chars += s.overview.text.size();
    ++lines;
    for (const auto& sec : s.sections) {
      if (sec.heading) {
        chars += sec.heading->size();
        ++lines;
      }
      for (const auto& st : sec.statements) {
        chars += st.text.size();
        ++lines;
      }
    }
  }
  return lines == 0 ? 0.0 : static_cast<double>(chars) / static_cast<double>(lines);
}

double overview_quality(const StructuredSummary& summary, const AggregatedScores& scores,
                        const XuxWeights& w) {
  const auto& id = summary.id;
  return w.os * scores.require(CriterionTarget::overview(Criterion::OS, id)) +
         w.of * scores.require(CriterionTarget::overview(Criterion::OF, id)) +
         w.or_ * scores.require(CriterionTarget::overview(Criterion::OR, id));
}

namespace {

// Mean of the HRstatement scores of section i, or nullopt if any is missing.
std::optional<double> hr_from_statements(const StructuredSummary& summary, int i,
                                         const AggregatedScores& scores) {
  const auto& sec = summary.sections.at(static_cast<std::size_t>(i - 1));
  if (sec.statements.empty()) return std::nullopt;
  double sum = 0.0;
  for (std::size_t j = 0; j < sec.statements.size(); ++j) {
    auto g = scores.get(
        CriterionTarget::statement(Criterion::HRstatement, summary.id, i, static_cast<int>(j) + 1));
    if (!g) return std::nullopt;
    sum += *g;
  }
  return sum / static_cast<double>(sec.statements.size());
}

}  // namespace

double heading_representativeness(const StructuredSummary& summary, int i,
                                  const AggregatedScores& scores) {
  if (i < 1 || i > static_cast<int>(summary.sections.size()))
    throw Error("section index " + std::to_string(i) + " out of range for '" + summary.id + "'");
  if (auto hr = hr_from_statements(summary, i, scores)) return *hr;
  return scores.require(CriterionTarget::heading(summary.id, i));
}

std::vector<CriterionTarget> xux_required_targets(const StructuredSummary& s,
                                                  const AggregatedScores& scores) {
  std::vector<CriterionTarget> out;
  for (auto c : {Criterion::OS, Criterion::OF, Criterion::OR})
    out.push_back(CriterionTarget::overview(c, s.id));
  for (std::size_t i = 0; i < s.sections.size(); ++i) {
    const int si = static_cast<int>(i) + 1;
    if (s.sections[i].heading) {
      const bool statement_level = hr_from_statements(s, si, scores).has_value();
      if (!statement_level) out.push_back(CriterionTarget::heading(s.id, si));
    }
    for (std::size_t j = 0; j < s.sections[i].statements.size(); ++j) {
      const int sj = static_cast<int>(j) + 1;
      out.push_back(CriterionTarget::statement(Criterion::SRel, s.id, si, sj));
      out.push_back(CriterionTarget::statement(Criterion::SF, s.id, si, sj));
    }
  }
  return out;
}

void check_xux_coverage(const StructuredSummary& summary, const AggregatedScores& scores) {
  std::vector<std::string> missing;
  for (const auto& t : xux_required_targets(summary, scores))
    if (!scores.find(t)) missing.push_back(t.describe());
  if (!missing.empty())
    throw CoverageError("summary '" + summary.id + "' has " + std::to_string(missing.size()) +
                            " uncovered target(s)",
                        missing);
}

std::vector<LineScores> line_scores(const StructuredSummary& s, const std::vector<Line>& lines,
                                    const AggregatedScores& scores) {
  check_xux_coverage(s, scores);
  std::vector<LineScores> out(lines.size());
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const auto& line = lines[k];
    auto& raw = out[k].raw;
    switch (line.kind) {
      case LineKind::overview:
        raw.os = scores.require(CriterionTarget::overview(Criterion::OS, s.id));
        raw.of = scores.require(CriterionTarget::overview(Criterion::OF, s.id));
        raw.or_ = scores.require(CriterionTarget::overview(Criterion::OR, s.id));
        break;
      case LineKind::heading:
        raw.hr = heading_representativeness(s, line.section, scores);
        break;
      case LineKind::statement:
        raw.srel = scores.require(
            CriterionTarget::statement(Criterion::SRel, s.id, line.section, line.statement));
        raw.sf = scores.require(
            CriterionTarget::statement(Criterion::SF, s.id, line.section, line.statement));
        break;
    }
  }
  return out;
}

std::vector<double> line_prefix_score(const StructuredSummary& summary,
                                      const std::vector<Line>& lines,
                                      const AggregatedScores& scores, const XuxWeights& weights) {
  std::vector<double> prefix;
  prefix.reserve(lines.size());
  double acc = 0.0;
  for (const auto& ls : line_scores(summary, lines, scores)) {
    acc += dot(weights, ls.raw);
    prefix.push_back(acc);
  }
  return prefix;
}

std::vector<double> user_experience(const std::vector<double>& prefix) {
  std::vector<double> x(prefix.size());
  for (std::size_t k = 0; k < prefix.size(); ++k) x[k] = prefix[k] / static_cast<double>(k + 1);
  return x;
}

Apd uniform_apd(std::size_t n) {
  if (n == 0) throw Error("APD over zero lines");
  return Apd(n, 1.0 / static_cast<double>(n));
}

void check_apd(const Apd& apd, std::size_t expected_length) {
  if (apd.size() != expected_length)
    throw Error("APD has " + std::to_string(apd.size()) + " entries, expected " +
                std::to_string(expected_length));
  double total = 0.0;
  for (double p : apd) {
    if (!(p >= 0.0)) throw Error("APD has a negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error("APD does not sum to 1");
}

namespace {

double expectation(const std::vector<double>& x, const Apd& apd) {
  double v = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) v += apd[k] * x[k];
  return v;
}

double mean(const std::vector<double>& x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

std::vector<double> experience_over(const StructuredSummary& summary,
                                    const AggregatedScores& scores, const XuxWeights& weights,
                                    LineLimit limit) {
  const auto lines = truncate_lines(enumerate_lines(summary), limit);
  return user_experience(line_prefix_score(summary, lines, scores, weights));
}

}  // namespace

double xux(const StructuredSummary& summary, const AggregatedScores& scores,
           const XuxWeights& weights, const LmaxConfig& lmax) {
  return mean(experience_over(summary, scores, weights, resolve_lmax(lmax)));
}

double xux_f(const StructuredSummary& summary, const AggregatedScores& scores,
             const XuxWeights& weights) {
  const auto lines = enumerate_lines(summary);
  const auto x = user_experience(line_prefix_score(summary, lines, scores, weights));
  double sum = 0.0;
  for (std::size_t k = 0; k < lines.size(); ++k)
    if (lines[k].section_final) sum += x[k];
  return sum / static_cast<double>(1 + summary.sections.size());
}

double xux_general(const StructuredSummary& summary, const AggregatedScores& scores,
                   const XuxWeights& weights, const Apd& apd, const LmaxConfig& lmax) {
  const auto x = experience_over(summary, scores, weights, resolve_lmax(lmax));
  check_apd(apd, x.size());
  return expectation(x, apd);
}

Phi decompose_phi(const StructuredSummary& summary, const AggregatedScores& scores,
                  const LmaxConfig& lmax) {
  const auto lines = truncate_lines(enumerate_lines(summary), resolve_lmax(lmax));
  std::array<double, CriterionVector::size> cumulative{};
  std::array<double, CriterionVector::size> phi{};
  const auto per_line = line_scores(summary, lines, scores);
  for (std::size_t k = 0; k < per_line.size(); ++k) {
    const auto raw = per_line[k].raw.as_array();
    for (std::size_t c = 0; c < raw.size(); ++c) {
      cumulative[c] += raw[c];
      phi[c] += cumulative[c] / static_cast<double>(k + 1);
    }
  }
  for (auto& v : phi) v /= static_cast<double>(lines.size());
  return CriterionVector::from_array(phi);
}

XuxReport evaluate_xux(const StructuredSummary& summary, const AggregatedScores& scores,
                       const XuxWeights& weights, const LmaxConfig& lmax,
                       const std::optional<Apd>& apd) {
  XuxReport r;
  r.summary_id = summary.id;
  const auto all = enumerate_lines(summary);
  const auto lines = truncate_lines(all, resolve_lmax(lmax));
  r.L = all.size();
  r.L_prime = lines.size();
  r.x_prime = line_prefix_score(summary, lines, scores, weights);
  r.x = user_experience(r.x_prime);
  r.xux = mean(r.x);
  r.xux_f = xux_f(summary, scores, weights);
  if (apd) {
    check_apd(*apd, r.x.size());
    r.xux_g = expectation(r.x, *apd);
  }
  r.phi = decompose_phi(summary, scores, lmax);
  r.trailing_overview = summary.overview.position == OverviewPosition::trailing;
  return r;
}

nlohmann::ordered_json to_json(const XuxReport& r) {
  nlohmann::ordered_json j;
  j["summary_id"] = r.summary_id;
  j["L"] = r.L;
  j["L_prime"] = r.L_prime;
  j["x_prime"] = r.x_prime;
  j["x"] = r.x;
  j["xux"] = r.xux;
  j["xux_f"] = r.xux_f;
  if (r.xux_g) j["xux_g"] = *r.xux_g;
  j["phi"] = nlohmann::ordered_json{{"os", r.phi.os},     {"of", r.phi.of},
                                    {"or", r.phi.or_},    {"hr", r.phi.hr},
                                    {"srel", r.phi.srel}, {"sf", r.phi.sf}};
  if (r.trailing_overview) j["overview_position"] = "trailing";
  return j;
}

XuxReport xux_report_from_json(const nlohmann::json& j) {
  try {
    XuxReport r;
    r.summary_id = j.at("summary_id").get<std::string>();
    r.L = j.at("L").get<std::size_t>();
    r.L_prime = j.at("L_prime").get<std::size_t>();
    r.x_prime = j.at("x_prime").get<std::vector<double>>();
    r.x = j.at("x").get<std::vector<double>>();
    r.xux = j.at("xux").get<double>();
    r.xux_f = j.at("xux_f").get<double>();
    if (j.contains("xux_g")) r.xux_g = j.at("xux_g").get<double>();
    const auto& p = j.at("phi");
    r.phi = {p.at("os").get<double>(), p.at("of").get<double>(), p.at("or").get<double>(),
             p.at("hr").get<double>(), p.at("srel").get<double>(), p.at("sf").get<double>()};
    r.trailing_overview = j.value("overview_position", std::string("leading")) == "trailing";
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed XUX report: ") + e.what());
  }
}

}  // namespace sgss
