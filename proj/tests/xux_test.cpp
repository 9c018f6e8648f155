#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "sgss/error.hpp"
#include "sgss/xux.hpp"

namespace sgss {
namespace {

using testing::make_summary;
using testing::put_scores;

constexpr double kTol = 1e-9;

AggregatedScores scores_for(const StructuredSummary& s, const testing::ComponentScores& c) {
  AggregatedScores out;
  put_scores(out, s, c);
  return out;
}

TEST(OverviewQuality, WeightedSum) {
  const auto s = make_summary("s", {});
  auto scores = scores_for(s, {1.0, 0.5, 0.0, {}, {}, {}});
  EXPECT_NEAR(overview_quality(s, scores, {1.0 / 3, 1.0 / 3, 1.0 / 3, 0, 0, 0}), 0.5, kTol);
  EXPECT_NEAR(overview_quality(s, scores, {1, 0, 0, 0, 0, 0}), 1.0, kTol);
  EXPECT_EQ(overview_quality(s, scores_for(s, {0, 0, 0, {}, {}, {}}), default_xux_weights()), 0.0);
  EXPECT_THROW(overview_quality(s, AggregatedScores{}, default_xux_weights()), CoverageError);
}

TEST(HeadingRepresentativeness, StatementLevelAverage) {
  const auto s = make_summary("s", {2, 1});
  AggregatedScores scores;
  scores.set(CriterionTarget::statement(Criterion::HRstatement, "s", 1, 1), 1.0);
  scores.set(CriterionTarget::statement(Criterion::HRstatement, "s", 1, 2), 0.0);
  scores.set(CriterionTarget::statement(Criterion::HRstatement, "s", 2, 1), 0.5);
  EXPECT_NEAR(heading_representativeness(s, 1, scores), 0.5, kTol);
  EXPECT_NEAR(heading_representativeness(s, 2, scores), 0.5, kTol);
}

TEST(HeadingRepresentativeness, DirectFallbackAndPrecedence) {
  const auto s = make_summary("s", {2});
  AggregatedScores scores;
  scores.set(CriterionTarget::heading("s", 1), 1.0);
  EXPECT_NEAR(heading_representativeness(s, 1, scores), 1.0, kTol);
  // A consistent statement-level labelling gives the same value.
  scores.set(CriterionTarget::statement(Criterion::HRstatement, "s", 1, 1), 1.0);
  EXPECT_NEAR(heading_representativeness(s, 1, scores), 1.0, kTol);
  // Complete statement-level labels take precedence over the direct label.
  scores.set(CriterionTarget::statement(Criterion::HRstatement, "s", 1, 2), 0.0);
  EXPECT_NEAR(heading_representativeness(s, 1, scores), 0.5, kTol);
  EXPECT_THROW(heading_representativeness(s, 1, AggregatedScores{}), CoverageError);
}

TEST(LinePrefixScore, TopHeavyExample) {
  const auto f = testing::top_heavy_example(3);
  const auto lines = enumerate_lines(f.summary);
  const auto xp = line_prefix_score(f.summary, lines, f.scores, testing::top_heavy_weights());
  EXPECT_EQ(xp, (std::vector<double>{1, 2, 3, 4, 5, 5, 5}));
  const auto x = user_experience(xp);
  const std::vector<double> expected = {1, 1, 1, 1, 1, 5.0 / 6, 5.0 / 7};
  for (std::size_t k = 0; k < x.size(); ++k) EXPECT_NEAR(x[k], expected[k], kTol);
}

TEST(LinePrefixScore, DegenerateCases) {
  const auto s = make_summary("s", {2, 1});
  const auto zero = scores_for(s, testing::uniform_components(s, 0.0));
  for (double v : line_prefix_score(s, enumerate_lines(s), zero, default_xux_weights())) EXPECT_EQ(v, 0.0);

  const auto o = make_summary("o", {});
  const auto xp = line_prefix_score(o, enumerate_lines(o), scores_for(o, {0.8, 0.8, 0.8, {}, {}, {}}),
                                    {1.0 / 3, 1.0 / 3, 1.0 / 3, 0, 0, 0});
  ASSERT_EQ(xp.size(), 1u);
  EXPECT_NEAR(xp[0], 0.8, kTol);
}

TEST(LinePrefixScore, TrailingOverviewCountsOnlyOnceRead) {
  const auto s = make_summary("s", {1}, "q1", OverviewPosition::trailing);
  auto scores = scores_for(s, {1, 1, 1, {0}, {{0}}, {{0}}});
  const auto xp = line_prefix_score(s, enumerate_lines(s), scores, {1, 0, 0, 0, 0, 0});
  EXPECT_EQ(xp, (std::vector<double>{0, 0, 1}));
}

TEST(LinePrefixScore, UncoveredTargetIsAnError) {
  const auto s = make_summary("s", {1});
  auto scores = scores_for(s, testing::uniform_components(s, 1.0));
  AggregatedScores partial;
  for (const auto& [t, v] : scores.entries())
    if (t.criterion != Criterion::SRel) partial.set(t, v.mean);
  try {
    line_prefix_score(s, enumerate_lines(s), partial, default_xux_weights());
    FAIL();
  } catch (const CoverageError& e) {
    ASSERT_EQ(e.missing().size(), 1u);
    EXPECT_EQ(e.missing()[0], "SRel(s, i=1, j=1)");
  }
}

TEST(UserExperience, DividesByLine) {
  EXPECT_EQ(user_experience({0}), (std::vector<double>{0}));
  const auto x = user_experience({2, 2, 2, 2});
  for (std::size_t k = 1; k < x.size(); ++k) EXPECT_LT(x[k], x[k - 1]);
}

TEST(Xux, TopHeavyOrdering) {
  const auto a = testing::top_heavy_example(3);
  const auto b = testing::top_heavy_example(2);
  const double xa = xux(a.summary, a.scores, testing::top_heavy_weights());
  const double xb = xux(b.summary, b.scores, testing::top_heavy_weights());
  EXPECT_NEAR(xa, 0.9354, 1e-4);
  EXPECT_NEAR(xb, 0.8187, 1e-4);
  // Exact values from the per-line sums.
  EXPECT_NEAR(xa, (5.0 + 5.0 / 6 + 5.0 / 7) / 7, kTol);
  EXPECT_NEAR(xb, (3.0 + 3.0 / 4 + 3.0 / 5 + 4.0 / 6 + 5.0 / 7) / 7, kTol);
  EXPECT_GT(xa, xb);
}

TEST(Xux, OverviewOnlyAndZero) {
  const auto o = make_summary("o", {});
  EXPECT_NEAR(xux(o, scores_for(o, {1, 1, 1, {}, {}, {}}), default_xux_weights()), 1.0, kTol);
  const auto s = make_summary("s", {2, 3});
  EXPECT_EQ(xux(s, scores_for(s, testing::uniform_components(s, 0.0)), default_xux_weights()), 0.0);
}

TEST(Xux, TruncationUsesFirstLmaxLines) {
  const auto f = testing::top_heavy_example(3);
  const auto w = testing::top_heavy_weights();
  EXPECT_NEAR(xux(f.summary, f.scores, w, std::size_t{5}), 1.0, kTol);
  EXPECT_NEAR(xux(f.summary, f.scores, w, std::size_t{100}), xux(f.summary, f.scores, w), kTol);
  EXPECT_THROW(xux(f.summary, f.scores, w, std::size_t{0}), Error);
}

TEST(XuxF, SectionFinalLines) {
  const auto f = testing::top_heavy_example(3);
  EXPECT_NEAR(xux_f(f.summary, f.scores, testing::top_heavy_weights()), (3.0 + 5.0 / 7) / 4, kTol);
  EXPECT_NEAR(xux_f(f.summary, f.scores, testing::top_heavy_weights()), 0.9286, 1e-4);

  const auto o = make_summary("o", {});
  const auto os = scores_for(o, {0.5, 1, 0, {}, {}, {}});
  EXPECT_NEAR(xux_f(o, os, default_xux_weights()), xux(o, os, default_xux_weights()), kTol);
  const auto s = make_summary("s", {1, 2});
  EXPECT_EQ(xux_f(s, scores_for(s, testing::uniform_components(s, 0.0)), default_xux_weights()), 0.0);
}

TEST(XuxGeneral, ApdVariants) {
  const auto f = testing::top_heavy_example(2);
  const auto w = testing::top_heavy_weights();
  const auto lines = enumerate_lines(f.summary);
  EXPECT_NEAR(xux_general(f.summary, f.scores, w, uniform_apd(lines.size())), xux(f.summary, f.scores, w),
              1e-12);
  Apd point(lines.size(), 0.0);
  point[0] = 1.0;
  EXPECT_NEAR(xux_general(f.summary, f.scores, w, point), 1.0, kTol);

  Apd finals(lines.size(), 0.0);
  for (std::size_t k = 0; k < lines.size(); ++k)
    if (lines[k].section_final) finals[k] = 1.0 / 4;
  EXPECT_NEAR(xux_general(f.summary, f.scores, w, finals), xux_f(f.summary, f.scores, w), kTol);

  EXPECT_THROW(xux_general(f.summary, f.scores, w, uniform_apd(3)), Error);
  Apd bad(lines.size(), 0.1);
  EXPECT_THROW(xux_general(f.summary, f.scores, w, bad), Error);
}

TEST(EstimateLmax, ReadingModel) {
  EXPECT_EQ(estimate_lmax({2, 500, 40}), 25u);
  EXPECT_EQ(estimate_lmax({1, 500, 500}), 1u);
  EXPECT_EQ(estimate_lmax({1, 500, 10000}), 1u);  // floor at one line
  EXPECT_EQ(estimate_lmax({1, 500, 200}), 3u);    // 2.5 rounds half up
  EXPECT_THROW(estimate_lmax({1, 500, 0}), Error);
}

TEST(DecomposePhi, UnitWeightsAndZero) {
  const auto f = testing::top_heavy_example(3);
  const auto phi = decompose_phi(f.summary, f.scores);
  EXPECT_NEAR(xux(f.summary, f.scores, {0, 0, 0, 0, 1, 0}), phi.srel, kTol);
  const auto s = make_summary("s", {2});
  const auto zero = decompose_phi(s, scores_for(s, testing::uniform_components(s, 0.0)));
  for (double v : zero.as_array()) EXPECT_EQ(v, 0.0);
}

TEST(XuxReport, JsonShape) {
  const auto f = testing::top_heavy_example(3);
  const auto r = evaluate_xux(f.summary, f.scores, testing::top_heavy_weights(), std::size_t{5},
                              uniform_apd(5));
  EXPECT_EQ(r.L, 7u);
  EXPECT_EQ(r.L_prime, 5u);
  EXPECT_EQ(r.x_prime.size(), 5u);
  ASSERT_TRUE(r.xux_g);
  EXPECT_NEAR(*r.xux_g, r.xux, 1e-12);
  const auto j = to_json(r);
  for (const char* key : {"L", "L_prime", "x_prime", "x", "xux", "xux_f", "xux_g", "phi"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(to_json(xux_report_from_json(nlohmann::json::parse(j.dump()))).dump(), j.dump());
}

// ---------------------------------------------------------------------------
// Properties over randomised summaries.

struct Instance {
  StructuredSummary summary;
  AggregatedScores scores;
};

Instance random_instance(std::mt19937_64& rng, int min_sections = 0) {
  Instance in;
  in.summary = testing::random_summary(rng, "r", "q1", 10, 8, min_sections);
  put_scores(in.scores, in.summary, testing::random_components(in.summary, rng));
  return in;
}

TEST(XuxProperties, MatchesDirectOracle) {
  std::mt19937_64 rng(101);
  for (int n = 0; n < 300; ++n) {
    const auto in = random_instance(rng);
    const auto w = testing::random_weights(rng);
    std::optional<std::size_t> lmax;
    if (n % 2) lmax = std::uniform_int_distribution<std::size_t>(1, 30)(rng);
    const LmaxConfig cfg = lmax ? LmaxConfig{*lmax} : LmaxConfig{Unbounded{}};
    ASSERT_NEAR(xux(in.summary, in.scores, w, cfg), testing::oracle_xux(in.summary, in.scores, w, lmax), kTol);
  }
}

TEST(XuxProperties, PrefixMonotoneAndBounded) {
  std::mt19937_64 rng(202);
  for (int n = 0; n < 300; ++n) {
    const auto in = random_instance(rng);
    const auto w = testing::random_normalized_weights(rng);
    ASSERT_TRUE(is_normalized(w));
    const auto xp = line_prefix_score(in.summary, enumerate_lines(in.summary), in.scores, w);
    for (std::size_t k = 0; k < xp.size(); ++k) {
      if (k) ASSERT_GE(xp[k], xp[k - 1]);
      ASSERT_LE(xp[k], static_cast<double>(k + 1) + kTol);
    }
    ASSERT_LE(xux(in.summary, in.scores, w), 1.0 + kTol);
  }
}

TEST(XuxProperties, ScoreMonotonicity) {
  std::mt19937_64 rng(303);
  for (int n = 0; n < 200; ++n) {
    auto in = random_instance(rng, 1);
    const auto w = testing::random_weights(rng);
    const double before = xux(in.summary, in.scores, w);
    const double before_f = xux_f(in.summary, in.scores, w);
    const auto& entries = in.scores.entries();
    auto it = entries.begin();
    std::advance(it, std::uniform_int_distribution<std::size_t>(0, entries.size() - 1)(rng));
    const auto target = it->first;
    in.scores.set(target, std::min(1.0, it->second.mean + 0.5));
    ASSERT_GE(xux(in.summary, in.scores, w), before - 1e-12);
    ASSERT_GE(xux_f(in.summary, in.scores, w), before_f - 1e-12);
  }
}

TEST(XuxProperties, ZeroSectionLaterIsBetter) {
  std::mt19937_64 rng(404);
  for (int n = 0; n < 200; ++n) {
    const int I = std::uniform_int_distribution<int>(2, 6)(rng);
    std::vector<int> J;
    for (int i = 0; i < I; ++i) J.push_back(std::uniform_int_distribution<int>(1, 4)(rng));
    auto s = make_summary("t", J);
    std::uniform_real_distribution<double> pos(0.5, 1.0);
    testing::ComponentScores c{pos(rng), pos(rng), pos(rng), {}, {}, {}};
    for (int j : J) {
      c.hr.push_back(pos(rng));
      std::vector<double> r, f;
      for (int k = 0; k < j; ++k) {
        r.push_back(pos(rng));
        f.push_back(pos(rng));
      }
      c.srel.push_back(r);
      c.sf.push_back(f);
    }
    int zero = 0;
    c.hr[0] = 0;
    std::fill(c.srel[0].begin(), c.srel[0].end(), 0.0);
    std::fill(c.sf[0].begin(), c.sf[0].end(), 0.0);
    const auto w = default_xux_weights();
    double prev = xux(s, scores_for(s, c), w);
    while (zero + 1 < I) {
      std::swap(s.sections[zero], s.sections[zero + 1]);
      std::swap(c.hr[zero], c.hr[zero + 1]);
      std::swap(c.srel[zero], c.srel[zero + 1]);
      std::swap(c.sf[zero], c.sf[zero + 1]);
      ++zero;
      const double next = xux(s, scores_for(s, c), w);
      ASSERT_GT(next, prev);
      prev = next;
    }
  }
}

TEST(XuxProperties, LinearDecomposition) {
  std::mt19937_64 rng(505);
  for (int n = 0; n < 300; ++n) {
    const auto in = random_instance(rng);
    const auto w = testing::random_weights(rng);
    const LmaxConfig cfg = n % 3 ? LmaxConfig{Unbounded{}} : LmaxConfig{std::size_t{4}};
    const auto phi = decompose_phi(in.summary, in.scores, cfg);
    ASSERT_NEAR(dot(w, phi), xux(in.summary, in.scores, w, cfg), kTol);
  }
}

}  // namespace
}  // namespace sgss
