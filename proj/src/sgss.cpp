#include "sgss/sgss.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "sgss/error.hpp"
#include "sgss/io.hpp"

namespace sgss {

FeatureArray to_array(const SgssWeights& w) {
  const auto x = w.xux.as_array();
  return {x[0], x[1], x[2], x[3], x[4], x[5], w.comp};
}

SgssWeights weights_from_array(const FeatureArray& a) {
  return {CriterionVector::from_array({a[0], a[1], a[2], a[3], a[4], a[5]}), a[6]};
}

bool is_non_negative(const SgssWeights& w) { return is_non_negative(w.xux) && w.comp >= 0.0; }

double sgss_score(const StructuredSummary& summary, const AggregatedScores& scores,
                  const SgssWeights& weights, double comp, const LmaxConfig& lmax) {
  if (!(comp >= 0.0 && comp <= 1.0)) throw Error("Comp outside [0,1] for '" + summary.id + "'");
  return xux(summary, scores, weights.xux, lmax) + weights.comp * comp;
}

std::string to_string(PairOrigin o) {
  return o == PairOrigin::annotated ? "annotated" : "derived_degradation";
}

PairOrigin parse_pair_origin(const std::string& s) {
  if (s == "annotated") return PairOrigin::annotated;
  if (s == "derived_degradation") return PairOrigin::derived_degradation;
  throw Error("unknown pair origin '" + s + "'");
}

nlohmann::ordered_json to_json(const PreferencePair& p) {
  return nlohmann::ordered_json{{"pair_id", p.pair_id},
                                {"query_id", p.query_id},
                                {"left", p.left_summary_id},
                                {"right", p.right_summary_id},
                                {"origin", to_string(p.origin)}};
}

PreferencePair pair_from_json(const nlohmann::json& j) {
  try {
    PreferencePair p;
    p.pair_id = j.at("pair_id").get<std::string>();
    p.query_id = j.at("query_id").get<std::string>();
    p.left_summary_id = j.at("left").get<std::string>();
    p.right_summary_id = j.at("right").get<std::string>();
    p.origin = parse_pair_origin(j.value("origin", std::string("annotated")));
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed pair record: ") + e.what());
  }
}

std::vector<PreferencePair> read_pairs(const std::string& path) {
  std::vector<PreferencePair> out;
  std::set<std::string> ids;
  for (const auto& row : io::read_ndjson(path)) {
    out.push_back(pair_from_json(row));
    if (!ids.insert(out.back().pair_id).second)
      throw Error(path + ": duplicate pair id '" + out.back().pair_id + "'");
  }
  return out;
}

std::string dump_pairs(const std::vector<PreferencePair>& pairs) {
  std::string out;
  for (const auto& p : pairs) out += to_json(p).dump() + "\n";
  return out;
}

const StructuredSummary& ScoringContext::summary(const std::string& id) const {
  auto it = summaries.find(id);
  if (it == summaries.end()) throw Error("unknown summary '" + id + "'");
  return *it->second;
}

double ScoringContext::comp(const std::string& id) const {
  auto it = comps.find(id);
  if (it == comps.end()) throw CoverageError("no Comp value for '" + id + "'", {"Comp(" + id + ")"});
  return it->second;
}

double delta_sgss(const StructuredSummary& left, const StructuredSummary& right,
                  const AggregatedScores& scores, const SgssWeights& weights, double comp_left,
                  double comp_right, const LmaxConfig& lmax) {
  if (left.query_id != right.query_id)
    throw Error("pair sides answer different queries ('" + left.query_id + "' vs '" +
                right.query_id + "')");
  return sgss_score(left, scores, weights, comp_left, lmax) -
         sgss_score(right, scores, weights, comp_right, lmax);
}

double delta_sgss(const PreferencePair& pair, const ScoringContext& ctx,
                  const SgssWeights& weights) {
  return delta_sgss(ctx.summary(pair.left_summary_id), ctx.summary(pair.right_summary_id),
                    *ctx.scores, weights, ctx.comp(pair.left_summary_id),
                    ctx.comp(pair.right_summary_id), ctx.lmax);
}

double FeatureVector::dot(const SgssWeights& w) const {
  const auto a = to_array(w);
  return std::inner_product(values.begin(), values.end(), a.begin(), 0.0);
}

bool FeatureVector::is_zero() const {
  return std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; });
}

FeatureVector feature_vector(const StructuredSummary& left, const StructuredSummary& right,
                             const AggregatedScores& scores, double comp_left, double comp_right,
                             const LmaxConfig& lmax) {
  if (left.query_id != right.query_id)
    throw Error("pair sides answer different queries ('" + left.query_id + "' vs '" +
                right.query_id + "')");
  const auto pl = decompose_phi(left, scores, lmax).as_array();
  const auto pr = decompose_phi(right, scores, lmax).as_array();
  FeatureVector f;
  for (std::size_t c = 0; c < pl.size(); ++c) f.values[c] = pl[c] - pr[c];
  f.values[6] = comp_left - comp_right;
  return f;
}

FeatureVector feature_vector(const PreferencePair& pair, const ScoringContext& ctx) {
  return feature_vector(ctx.summary(pair.left_summary_id), ctx.summary(pair.right_summary_id),
                        *ctx.scores, ctx.comp(pair.left_summary_id),
                        ctx.comp(pair.right_summary_id), ctx.lmax);
}

double agreement_rate(const std::vector<PreferenceRecord>& preferences, double delta,
                      TieRule tie) {
  if (preferences.empty()) throw Error("agreement rate needs at least one preference label");
  const double h = static_cast<double>(preferences.size());
  if (delta == 0.0) return tie == TieRule::half_credit ? 0.5 : 0.0;
  const Choice predicted = delta > 0.0 ? Choice::LEFT : Choice::RIGHT;
  const auto agree = std::count_if(preferences.begin(), preferences.end(),
                                   [&](const PreferenceRecord& r) { return r.choice == predicted; });
  return static_cast<double>(agree) / h;
}

double mean_agreement_rate(const std::vector<double>& rates) {
  if (rates.empty()) throw Error("mean agreement rate over an empty pair set");
  return std::accumulate(rates.begin(), rates.end(), 0.0) / static_cast<double>(rates.size());
}

EvalReport evaluate_pairs(const std::vector<PreferencePair>& pairs, const ScoringContext& ctx,
                          const SgssWeights& weights, TieRule tie) {
  if (pairs.empty()) throw Error("no pairs to evaluate");
  EvalReport r;
  std::vector<double> rates;
  for (const auto& p : pairs) {
    if (p.preferences.empty()) throw Error("pair '" + p.pair_id + "' has no preference labels");
    const double d = delta_sgss(p, ctx, weights);
    const double ar = agreement_rate(p.preferences, d, tie);
    if (d == 0.0) ++r.ties;
    r.pairs.push_back({p.pair_id, d, ar});
    rates.push_back(ar);
  }
  r.mar = mean_agreement_rate(rates);
  return r;
}

nlohmann::ordered_json to_json(const EvalReport& r) {
  nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
  for (const auto& p : r.pairs)
    pairs.push_back({{"pair_id", p.pair_id}, {"delta", p.delta}, {"ar", p.ar}});
  return {{"pairs", std::move(pairs)}, {"mar", r.mar}, {"ties", r.ties}};
}

Split train_test_split(const std::vector<PreferencePair>& pairs, double ratio,
                       std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error("split ratio must lie in (0,1)");
  std::vector<std::string> queries;
  for (const auto& p : pairs)
    if (std::find(queries.begin(), queries.end(), p.query_id) == queries.end())
      queries.push_back(p.query_id);
  if (queries.size() < 2)
    throw Error("need at least two queries to split, got " + std::to_string(queries.size()));
  std::sort(queries.begin(), queries.end());
  std::mt19937_64 rng(seed);
  // Fisher-Yates with our own index draws; std::shuffle's output is not
  // specified across standard libraries.
  for (std::size_t k = queries.size() - 1; k > 0; --k) {
    const std::size_t r = static_cast<std::size_t>(rng() % (k + 1));
    std::swap(queries[k], queries[r]);
  }
  const double q = static_cast<double>(queries.size());
  auto n_train = static_cast<std::size_t>(std::floor(ratio * q + 0.5));
  n_train = std::clamp<std::size_t>(n_train, 1, queries.size() - 1);
  const std::set<std::string> train_queries(queries.begin(),
                                            queries.begin() + static_cast<std::ptrdiff_t>(n_train));
  Split out;
  for (const auto& p : pairs) (train_queries.count(p.query_id) ? out.train : out.test).push_back(p);
  return out;
}

}  // namespace sgss
