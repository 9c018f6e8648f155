#pragma once

// Scratch workspaces on disk and an in-process runner for the command line.

#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "sgss/cli.hpp"
#include "sgss/fit.hpp"
#include "sgss/io.hpp"
#include "sgss/workspace.hpp"

namespace sgss::testing {

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("sgss-test-" + std::to_string(rd()) + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string str() const { return path_.string(); }

 private:
  std::filesystem::path path_;
};

struct RunResult {
  int code = 0;
  std::string out;
  std::string err;
};

inline RunResult run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  RunResult r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

// Every target as a human score record.
inline std::vector<LabelRecord> score_records(const AggregatedScores& scores, const std::string& labeller = "h1") {
  std::vector<LabelRecord> out;
  for (const auto& [t, s] : scores.entries()) out.push_back(LabelRecord{labeller, LabellerKind::human, t, s.mean, 0});
  return out;
}

inline void write_workspace(const Workspace& ws, const std::vector<StructuredSummary>& summaries,
                            const LabelFile& labels, const std::vector<PreferencePair>& pairs = {}) {
  std::vector<SummaryDocument> docs;
  for (const auto& s : summaries) docs.push_back(make_document(s, "query " + s.query_id));
  ws.save_summaries(docs);
  ws.save_labels(labels);
  ws.save_pairs(pairs);
}

inline void write_weights(const std::filesystem::path& path, const SgssWeights& w) {
  io::write_file_atomic(path, weights_to_json(w).dump(2) + "\n");
}

// One annotated pair per query with fully labelled sides and a single
// preference given by the sign of truth . f. Comp comes from per-query report
// files so the command line path is exercised end to end.
inline void synthetic_workspace(const Workspace& ws, std::uint64_t seed, std::size_t n_queries,
                                const FeatureArray& truth) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<StructuredSummary> summaries;
  AggregatedScores scores;
  std::vector<PreferencePair> pairs;
  LabelFile labels;
  summaries.reserve(2 * n_queries);
  for (std::size_t n = 0; n < n_queries; ++n) {
    const std::string q = "q" + std::to_string(n);
    const auto a = random_summary(rng, q + "a", q, 4, 3, 1);
    const auto b = random_summary(rng, q + "b", q, 4, 3, 1);
    put_scores(scores, a, random_components(a, rng));
    put_scores(scores, b, random_components(b, rng));
    const double ca = u(rng), cb = u(rng);
    nlohmann::ordered_json comp;
    comp["comp"] = {{a.id, ca}, {b.id, cb}};
    io::write_file_atomic(ws.comp_path(q), comp.dump() + "\n");

    ScoringContext ctx;
    ctx.summaries = {{a.id, &a}, {b.id, &b}};
    ctx.scores = &scores;
    ctx.comps = {{a.id, ca}, {b.id, cb}};
    const PreferencePair pair{"p" + std::to_string(n), q, a.id, b.id, PairOrigin::annotated, {}};
    const auto f = feature_vector(pair, ctx).values;
    double margin = 0;
    for (std::size_t k = 0; k < kFeatureCount; ++k) margin += truth[k] * f[k];
    summaries.push_back(a);
    summaries.push_back(b);
    if (margin == 0) continue;
    pairs.push_back(pair);
    labels.preferences.push_back(
        PreferenceRecord{"h1", LabellerKind::human, pair.pair_id, margin > 0 ? Choice::LEFT : Choice::RIGHT, 0});
  }
  labels.labels = score_records(scores);
  write_workspace(ws, summaries, labels, pairs);
}

}  // namespace sgss::testing
