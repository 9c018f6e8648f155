#pragma once

// Shared builders and independent reference computations for the test suites.
// The oracles here number lines and sum components on their own; they never
// call the library's line enumeration or prefix-score code.

#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sgss/comp.hpp"
#include "sgss/labels.hpp"
#include "sgss/sgss.hpp"
#include "sgss/summary.hpp"
#include "sgss/xux.hpp"

namespace sgss::testing {

inline StructuredSummary make_summary(const std::string& id, const std::vector<int>& statements_per_section,
                                      const std::string& query_id = "q1",
                                      OverviewPosition position = OverviewPosition::leading) {
  StructuredSummary s;
  s.id = id;
  s.query_id = query_id;
  s.system_id = "sys-" + id;
  s.overview = Overview{"Overview of " + id + " [1]", {1}, position};
  for (std::size_t i = 0; i < statements_per_section.size(); ++i) {
    Section sec;
    sec.heading = "Heading " + std::to_string(i + 1);
    for (int j = 0; j < statements_per_section[i]; ++j)
      sec.statements.push_back(
          Statement{"Statement " + std::to_string(i + 1) + "." + std::to_string(j + 1), {1 + (j % 3)}});
    s.sections.push_back(std::move(sec));
  }
  for (int n = 1; n <= 3; ++n)
    s.doclist.push_back(DocEntry{n, "https://example.org/" + std::to_string(n), "Doc " + std::to_string(n),
                                 "Snippet " + std::to_string(n)});
  return s;
}

inline SummaryDocument make_document(const StructuredSummary& s, const std::string& text = "test query") {
  return SummaryDocument{Query{s.query_id, text, "en"}, s};
}

// Per-component scores for one summary; vectors are indexed by section then statement.
struct ComponentScores {
  double os = 0, of = 0, or_ = 0;
  std::vector<double> hr;                 // HRdirect per section
  std::vector<std::vector<double>> srel;  // per statement
  std::vector<std::vector<double>> sf;
};

inline void put_scores(AggregatedScores& out, const StructuredSummary& s, const ComponentScores& c) {
  out.set(CriterionTarget::overview(Criterion::OS, s.id), c.os);
  out.set(CriterionTarget::overview(Criterion::OF, s.id), c.of);
  out.set(CriterionTarget::overview(Criterion::OR, s.id), c.or_);
  for (std::size_t i = 0; i < s.sections.size(); ++i) {
    const int si = static_cast<int>(i) + 1;
    out.set(CriterionTarget::heading(s.id, si), c.hr.at(i));
    for (std::size_t j = 0; j < s.sections[i].statements.size(); ++j) {
      const int sj = static_cast<int>(j) + 1;
      out.set(CriterionTarget::statement(Criterion::SRel, s.id, si, sj), c.srel.at(i).at(j));
      out.set(CriterionTarget::statement(Criterion::SF, s.id, si, sj), c.sf.at(i).at(j));
    }
  }
}

inline ComponentScores uniform_components(const StructuredSummary& s, double v) {
  ComponentScores c{v, v, v, {}, {}, {}};
  for (const auto& sec : s.sections) {
    c.hr.push_back(v);
    c.srel.emplace_back(sec.statements.size(), v);
    c.sf.emplace_back(sec.statements.size(), v);
  }
  return c;
}

inline double random_grade_score(std::mt19937_64& rng) {
  static constexpr double values[] = {0.0, 0.5, 1.0};
  return values[std::uniform_int_distribution<int>(0, 2)(rng)];
}

inline ComponentScores random_components(const StructuredSummary& s, std::mt19937_64& rng) {
  ComponentScores c{random_grade_score(rng), random_grade_score(rng), random_grade_score(rng), {}, {}, {}};
  for (const auto& sec : s.sections) {
    c.hr.push_back(random_grade_score(rng));
    std::vector<double> r, f;
    for (std::size_t j = 0; j < sec.statements.size(); ++j) {
      r.push_back(random_grade_score(rng));
      f.push_back(random_grade_score(rng));
    }
    c.srel.push_back(r);
    c.sf.push_back(f);
  }
  return c;
}

inline StructuredSummary random_summary(std::mt19937_64& rng, const std::string& id,
                                        const std::string& query_id = "q1", int max_sections = 10,
                                        int max_statements = 8, int min_sections = 0) {
  const int I = std::uniform_int_distribution<int>(min_sections, max_sections)(rng);
  std::vector<int> J;
  for (int i = 0; i < I; ++i) J.push_back(std::uniform_int_distribution<int>(1, max_statements)(rng));
  const auto pos = std::bernoulli_distribution(0.2)(rng) ? OverviewPosition::trailing
                                                         : OverviewPosition::leading;
  return make_summary(id, J, query_id, pos);
}

inline XuxWeights random_weights(std::mt19937_64& rng, double hi = 2.0) {
  std::uniform_real_distribution<double> u(0.0, hi);
  return {u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
}

// Random weights satisfying the normalisation bounds.
inline XuxWeights random_normalized_weights(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto simplex3 = [&] {
    double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
    const double t = a + b + c + d;  // slack absorbs the remainder
    return std::array<double, 3>{a / t, b / t, c / t};
  };
  const auto o = simplex3();
  const double srel = u(rng);
  const double sf = u(rng) * (1.0 - srel);
  return {o[0], o[1], o[2], u(rng), srel, sf};
}

// ---------------------------------------------------------------------------
// Top-heaviness example: three one-statement sections, one of them all-zero,
// scored with w_OS = w_HR = w_SRel = 1.

inline XuxWeights top_heavy_weights() { return {1.0, 0.0, 0.0, 1.0, 1.0, 0.0}; }

struct TopHeavyExample {
  StructuredSummary summary;
  AggregatedScores scores;
};

// `zero_section` is the 1-based position of the zero-scored section.
inline TopHeavyExample top_heavy_example(int zero_section, const std::string& id = "th") {
  TopHeavyExample f;
  f.summary = make_summary(id, {1, 1, 1});
  ComponentScores c{1.0, 0.0, 0.0, {1, 1, 1}, {{1}, {1}, {1}}, {{0}, {0}, {0}}};
  const auto z = static_cast<std::size_t>(zero_section - 1);
  c.hr[z] = 0.0;
  c.srel[z][0] = 0.0;
  put_scores(f.scores, f.summary, c);
  return f;
}

// ---------------------------------------------------------------------------
// Two-summary pooling example: a = {a1, a2}, b = {b1}; a is partially relevant to
// b1, b is not relevant to a1 and partially relevant to a2.

struct PoolingExample {
  std::vector<StructuredSummary> summaries;
  std::vector<LabelRecord> labels;
};

inline PoolingExample pooling_example() {
  PoolingExample f;
  f.summaries = {make_summary("a", {2, 1}), make_summary("b", {1})};
  auto cell = [](const std::string& row, const std::string& col, Grade3 g) {
    return LabelRecord{"h1", LabellerKind::human, CriterionTarget::pool(row, col), g, 0};
  };
  f.labels = {cell("a", pooled_section_id("b", 1), Grade3::Partially),
              cell("b", pooled_section_id("a", 1), Grade3::No),
              cell("b", pooled_section_id("a", 2), Grade3::Partially)};
  return f;
}

// ---------------------------------------------------------------------------
// Direct-formula oracles.

struct OracleComponent {
  enum Kind { overview, heading, statement } kind;
  int line;
  int i, j;
};

// Numbers the components of `s` in reading order without the library.
inline std::vector<OracleComponent> oracle_components(const StructuredSummary& s) {
  std::vector<OracleComponent> out;
  int line = 0;
  const bool leading = s.overview.position == OverviewPosition::leading;
  if (leading) out.push_back({OracleComponent::overview, ++line, 0, 0});
  for (std::size_t i = 0; i < s.sections.size(); ++i) {
    if (s.sections[i].heading) out.push_back({OracleComponent::heading, ++line, int(i) + 1, 0});
    for (std::size_t j = 0; j < s.sections[i].statements.size(); ++j)
      out.push_back({OracleComponent::statement, ++line, int(i) + 1, int(j) + 1});
  }
  if (!leading) out.push_back({OracleComponent::overview, ++line, 0, 0});
  return out;
}

// X(l) for l = 1..L' by summing every component with line(c) <= l afresh.
inline std::vector<double> oracle_x(const StructuredSummary& s, const AggregatedScores& scores,
                                    const XuxWeights& w, std::optional<std::size_t> lmax = {}) {
  const auto comps = oracle_components(s);
  const std::size_t L = comps.size();
  const std::size_t Lp = lmax ? std::min(L, *lmax) : L;
  auto get = [&](Criterion c, int i = 0, int j = 0) {
    return *scores.get(CriterionTarget{c, s.id, i, j, {}});
  };
  std::vector<double> x;
  for (std::size_t l = 1; l <= Lp; ++l) {
    double xp = 0.0;
    for (const auto& c : comps) {
      if (c.line > static_cast<int>(l)) continue;
      switch (c.kind) {
        case OracleComponent::overview:
          xp += w.os * get(Criterion::OS) + w.of * get(Criterion::OF) + w.or_ * get(Criterion::OR);
          break;
        case OracleComponent::heading:
          xp += w.hr * get(Criterion::HRdirect, c.i);
          break;
        case OracleComponent::statement:
          xp += w.srel * get(Criterion::SRel, c.i, c.j) + w.sf * get(Criterion::SF, c.i, c.j);
          break;
      }
    }
    x.push_back(xp / static_cast<double>(l));
  }
  return x;
}

inline double oracle_xux(const StructuredSummary& s, const AggregatedScores& scores, const XuxWeights& w,
                         std::optional<std::size_t> lmax = {}) {
  const auto x = oracle_x(s, scores, w, lmax);
  double sum = 0.0;
  for (double v : x) sum += v;
  return sum / static_cast<double>(x.size());
}

// Straight KL-based JSD in bits with explicit zero handling.
inline double oracle_jsd(const std::vector<double>& p, const std::vector<double>& q) {
  double d = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double m = (p[k] + q[k]) / 2.0;
    if (p[k] > 0) d += 0.5 * p[k] * std::log(p[k] / m) / std::log(2.0);
    if (q[k] > 0) d += 0.5 * q[k] * std::log(q[k] / m) / std::log(2.0);
  }
  return d;
}

}  // namespace sgss::testing
