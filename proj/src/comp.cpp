#include "sgss/comp.hpp"

#include <cmath>
#include <numeric>

#include "sgss/error.hpp"

namespace sgss {

std::string pooled_section_id(const std::string& summary_id, int section_index) {
  return summary_id + "#" + std::to_string(section_index);
}

SectionPool build_pool(const std::vector<StructuredSummary>& summaries,
                       const GradeMapping& mapping) {
  if (summaries.size() <= 1)
    throw Error("pooling needs more than one summary, got " + std::to_string(summaries.size()));
  SectionPool pool;
  pool.query_id = summaries.front().query_id;
  for (const auto& s : summaries) {
    if (s.query_id != pool.query_id)
      throw Error("summary '" + s.id + "' answers query '" + s.query_id + "', not '" +
                  pool.query_id + "'");
    if (s.sections.empty())
      throw Error("summary '" + s.id + "' has no sections and cannot be pooled");
    pool.summary_ids.push_back(s.id);
    for (std::size_t i = 0; i < s.sections.size(); ++i) {
      const int si = static_cast<int>(i) + 1;
      pool.sections.push_back(PooledSection{pooled_section_id(s.id, si), s.id, si,
                                            s.sections[i].heading, s.sections[i].statements});
    }
  }
  pool.matrix.assign(pool.rows(), std::vector<PoolCell>(pool.cols()));
  for (std::size_t n = 0; n < pool.rows(); ++n)
    for (std::size_t k = 0; k < pool.cols(); ++k)
      if (pool.sections[k].source_summary_id == pool.summary_ids[n])
        pool.matrix[n][k] = PoolCell{mapping.perfectly, CellProvenance::auto_own, 0};
  return pool;
}

std::vector<CriterionTarget> unlabelled_cells(const SectionPool& pool) {
  std::vector<CriterionTarget> out;
  for (std::size_t n = 0; n < pool.rows(); ++n)
    for (std::size_t k = 0; k < pool.cols(); ++k)
      if (!pool.matrix[n][k].score)
        out.push_back(CriterionTarget::pool(pool.summary_ids[n], pool.sections[k].id));
  return out;
}

void fill_pool(SectionPool& pool, const AggregatedScores& scores) {
  std::vector<std::string> missing;
  for (std::size_t n = 0; n < pool.rows(); ++n) {
    for (std::size_t k = 0; k < pool.cols(); ++k) {
      auto& cell = pool.matrix[n][k];
      if (cell.provenance == CellProvenance::auto_own) continue;
      const auto target = CriterionTarget::pool(pool.summary_ids[n], pool.sections[k].id);
      if (const auto* s = scores.find(target)) {
        cell = PoolCell{s->mean, CellProvenance::labelled, s->count};
      } else {
        missing.push_back(target.describe());
      }
    }
  }
  if (!missing.empty())
    throw CoverageError("pool for query '" + pool.query_id + "' has " +
                            std::to_string(missing.size()) + " unlabelled cell(s)",
                        missing);
}

Pmf to_pmf(std::span<const double> scores) {
  double total = 0.0;
  for (double g : scores) {
    if (!(g >= 0.0)) throw Error("relevance scores must be non-negative");
    total += g;
  }
  if (!(total > 0.0)) throw Error("cannot normalise an all-zero relevance row");
  Pmf out(scores.size());
  for (std::size_t k = 0; k < scores.size(); ++k) out[k] = scores[k] / total;
  return out;
}

namespace {

// KL(p || m) in bits; terms with p(k) = 0 contribute nothing.
double kl_to_mixture(std::span<const double> p, std::span<const double> m) {
  double d = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k)
    if (p[k] > 0.0) d += p[k] * std::log2(p[k] / m[k]);
  return d;
}

}  // namespace

double jsd(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size())
    throw Error("JSD over distributions of different sizes (" + std::to_string(p.size()) +
                " vs " + std::to_string(q.size()) + ")");
  std::vector<double> m(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) m[k] = 0.5 * (p[k] + q[k]);
  const double d = 0.5 * kl_to_mixture(p, m) + 0.5 * kl_to_mixture(q, m);
  // Rounding can leave tiny negatives or values a hair above 1.
  return std::clamp(d, 0.0, 1.0);
}

double comprehensiveness(std::span<const double> row_pmf, const std::optional<Pmf>& gold) {
  if (row_pmf.size() < 2) throw Error("comprehensiveness needs at least two pooled sections");
  if (gold) return 1.0 - jsd(row_pmf, *gold);
  const Pmf uniform(row_pmf.size(), 1.0 / static_cast<double>(row_pmf.size()));
  return 1.0 - jsd(row_pmf, uniform);
}

std::optional<double> CompReport::comp_of(const std::string& summary_id) const {
  for (std::size_t n = 0; n < pool.rows(); ++n)
    if (pool.summary_ids[n] == summary_id) return comp[n];
  return std::nullopt;
}

CompReport comp_report(const std::vector<StructuredSummary>& summaries,
                       const AggregatedScores& scores, const GradeMapping& mapping) {
  CompReport r;
  r.pool = build_pool(summaries, mapping);
  fill_pool(r.pool, scores);
  for (const auto& row : r.pool.matrix) {
    std::vector<double> g;
    g.reserve(row.size());
    for (const auto& cell : row) g.push_back(*cell.score);
    r.pmfs.push_back(to_pmf(g));
    r.comp.push_back(comprehensiveness(r.pmfs.back()));
  }
  return r;
}

namespace {

std::optional<std::string> grade_name(double score, const GradeMapping& m) {
  if (score == m.perfectly) return to_string(Grade3::Perfectly);
  if (score == m.partially) return to_string(Grade3::Partially);
  if (score == m.no) return to_string(Grade3::No);
  return std::nullopt;
}

}  // namespace

nlohmann::ordered_json to_json(const SectionPool& pool, const GradeMapping& mapping) {
  using oj = nlohmann::ordered_json;
  oj j;
  j["query_id"] = pool.query_id;
  oj sections = oj::array();
  for (const auto& s : pool.sections)
    sections.push_back(oj{{"id", s.id},
                          {"source_summary", s.source_summary_id},
                          {"i", s.source_index},
                          {"heading", s.heading ? oj(*s.heading) : oj(nullptr)}});
  j["pooled_sections"] = std::move(sections);
  oj matrix = oj::array();
  for (std::size_t n = 0; n < pool.rows(); ++n) {
    oj cells = oj::array();
    for (std::size_t k = 0; k < pool.cols(); ++k) {
      const auto& cell = pool.matrix[n][k];
      oj c;
      c["pooled_id"] = pool.sections[k].id;
      if (cell.score) {
        const auto g = grade_name(*cell.score, mapping);
        c["grade"] = g ? oj(*g) : oj(nullptr);
        c["score"] = *cell.score;
      } else {
        c["grade"] = nullptr;
      }
      c["provenance"] = cell.provenance == CellProvenance::auto_own ? "auto_own" : "labelled";
      if (cell.provenance == CellProvenance::labelled) c["labellers"] = cell.labellers;
      cells.push_back(std::move(c));
    }
    matrix.push_back(oj{{"summary_id", pool.summary_ids[n]}, {"cells", std::move(cells)}});
  }
  j["matrix"] = std::move(matrix);
  return j;
}

nlohmann::ordered_json to_json(const CompReport& report, const GradeMapping& mapping) {
  auto j = to_json(report.pool, mapping);
  nlohmann::ordered_json comp = nlohmann::ordered_json::object();
  for (std::size_t n = 0; n < report.pool.rows(); ++n)
    comp[report.pool.summary_ids[n]] = report.comp[n];
  j["comp"] = std::move(comp);
  return j;
}

}  // namespace sgss
