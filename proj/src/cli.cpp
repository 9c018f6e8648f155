#include "sgss/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "sgss/comp.hpp"
#include "sgss/error.hpp"
#include "sgss/fit.hpp"
#include "sgss/io.hpp"
#include "sgss/llm_labeller.hpp"
#include "sgss/service.hpp"
#include "sgss/workspace.hpp"
#include "sgss/xux.hpp"

#ifndef SGSS_DATA_DIR
#define SGSS_DATA_DIR "data"
#endif

namespace sgss::cli {

namespace fs = std::filesystem;

namespace {

struct Common {
  std::string workspace = ".";
  std::uint64_t seed = 0;
  std::string policy = "combined";
  std::string weights;
  std::optional<std::size_t> lmax;
  std::optional<double> lmax_minutes;
  double lmax_cpm = 500.0;
  std::optional<double> avlen;
  std::optional<std::int64_t> fixed_time;
};

class NotConverged : public Error {
 public:
  using Error::Error;
};

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

AggregationPolicy policy_of(const Common& c) { return parse_policy(c.policy); }

std::optional<fs::path> weights_arg(const Common& c) {
  if (c.weights.empty()) return std::nullopt;
  return fs::path(c.weights);
}

LmaxConfig lmax_of(const Common& c, const std::vector<SummaryDocument>& docs, std::ostream& out) {
  if (c.lmax) {
    out << "L_max = " << *c.lmax << "\n";
    return *c.lmax;
  }
  if (!c.lmax_minutes) return Unbounded{};
  ReadingModel m{*c.lmax_minutes, c.lmax_cpm, 0.0};
  if (c.avlen) {
    m.avg_chars_per_line = *c.avlen;
  } else {
    std::vector<StructuredSummary> all;
    for (const auto& d : docs) all.push_back(d.summary);
    m.avg_chars_per_line = average_line_length(all);
  }
  const auto l = estimate_lmax(m);
  out << "L_max = " << l << "\n";
  return l;
}

std::int64_t now(const Common& c) {
  if (c.fixed_time) return *c.fixed_time;
  return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

const Query& query_of(const std::vector<SummaryDocument>& docs, const std::string& query_id) {
  for (const auto& d : docs)
    if (d.query.id == query_id) return d.query;
  throw Error("unknown query '" + query_id + "'");
}

ScoringContext make_context(const std::vector<SummaryDocument>& docs, const AggregatedScores& scores,
                            const std::map<std::string, double>& comps, LmaxConfig lmax) {
  ScoringContext ctx;
  for (const auto& d : docs) ctx.summaries[d.summary.id] = &d.summary;
  ctx.scores = &scores;
  ctx.comps = comps;
  ctx.lmax = std::move(lmax);
  return ctx;
}

std::vector<PreferencePair> filter_origin(std::vector<PreferencePair> pairs, const std::string& origin) {
  if (origin == "all") return pairs;
  const auto want = origin == "annotated" ? PairOrigin::annotated : PairOrigin::derived_degradation;
  pairs.erase(std::remove_if(pairs.begin(), pairs.end(), [&](const PreferencePair& p) { return p.origin != want; }),
              pairs.end());
  return pairs;
}

// ---------------------------------------------------------------------------

int cmd_score(const Common& c, std::ostream& out) {
  const Workspace ws(c.workspace);
  const auto docs = ws.load_summaries();
  const auto scores = aggregate(ws.load_labels().labels, policy_of(c));
  const auto weights = ws.load_weights(weights_arg(c)).xux;
  const auto lmax = lmax_of(c, docs, out);

  std::vector<std::string> gaps;
  for (const auto& d : docs) {
    try {
      check_xux_coverage(d.summary, scores);
    } catch (const CoverageError& e) {
      gaps.insert(gaps.end(), e.missing().begin(), e.missing().end());
    }
  }
  if (!gaps.empty()) throw CoverageError("labels do not cover every scored target", gaps);

  std::vector<nlohmann::ordered_json> rows;
  out << "summary_id\tL\tL'\txux\txux_f\n";
  for (const auto& d : docs) {
    const auto r = evaluate_xux(d.summary, scores, weights, lmax);
    out << r.summary_id << "\t" << r.L << "\t" << r.L_prime << "\t" << num(r.xux) << "\t" << num(r.xux_f) << "\n";
    rows.push_back(to_json(r));
  }
  io::write_file_atomic(ws.xux_reports_path(), io::dump_ndjson(rows));
  return kExitOk;
}

std::vector<std::string> pool_queries(const std::map<std::string, std::vector<StructuredSummary>>& by_query,
                                      const std::string& query) {
  if (!query.empty()) {
    if (!by_query.count(query)) throw Error("no summaries for query '" + query + "'");
    return {query};
  }
  std::vector<std::string> out;
  for (const auto& [q, ss] : by_query)
    if (ss.size() > 1) out.push_back(q);
  if (out.empty()) throw Error("no query has more than one summary to pool");
  return out;
}

int cmd_pool(const Common& c, const std::string& query, std::ostream& out) {
  const Workspace ws(c.workspace);
  const auto docs = ws.load_summaries();
  const auto by_query = summaries_by_query(docs);
  const auto scores = aggregate(ws.load_labels().labels, policy_of(c));
  for (const auto& q : pool_queries(by_query, query)) {
    auto pool = build_pool(by_query.at(q));
    for (std::size_t n = 0; n < pool.rows(); ++n)
      for (std::size_t k = 0; k < pool.cols(); ++k) {
        auto& cell = pool.matrix[n][k];
        if (cell.provenance == CellProvenance::auto_own) continue;
        if (const auto* s = scores.find(CriterionTarget::pool(pool.summary_ids[n], pool.sections[k].id))) {
          cell.score = s->mean;
          cell.labellers = s->count;
        }
      }
    io::write_file_atomic(ws.pool_path(q), to_json(pool).dump(2) + "\n");
    out << q << "\t" << pool.rows() << " summaries\t" << pool.cols() << " pooled sections\t"
        << unlabelled_cells(pool).size() << " unlabelled cells\n";
  }
  return kExitOk;
}

int cmd_comp(const Common& c, const std::string& query, std::ostream& out) {
  const Workspace ws(c.workspace);
  const auto docs = ws.load_summaries();
  const auto by_query = summaries_by_query(docs);
  const auto scores = aggregate(ws.load_labels().labels, policy_of(c));
  for (const auto& q : pool_queries(by_query, query)) {
    const auto r = comp_report(by_query.at(q), scores);
    io::write_file_atomic(ws.comp_path(q), to_json(r).dump(2) + "\n");
    for (std::size_t n = 0; n < r.comp.size(); ++n)
      out << q << "\t" << r.pool.summary_ids[n] << "\t" << num(r.comp[n]) << "\n";
  }
  return kExitOk;
}

int cmd_degrade(const Common& c, const std::string& strategy_name, std::ostream& out, std::ostream& err) {
  const Workspace ws(c.workspace);
  const auto strategy = parse_degrade_strategy(strategy_name);
  auto docs = ws.load_summaries();
  auto labels = ws.load_labels();
  auto pairs = fs::exists(ws.pairs_path()) ? read_pairs(ws.pairs_path().string()) : std::vector<PreferencePair>{};
  const auto scores = aggregate(labels.labels, policy_of(c));

  std::vector<SummaryDocument> originals;
  for (const auto& d : docs)
    if (!d.summary.provenance) originals.push_back(d);

  std::size_t made = 0, derived_pairs = 0;
  for (const auto& parent : originals) {
    if (parent.summary.sections.empty()) {
      err << "skipping '" << parent.summary.id << "': no sections to degrade\n";
      continue;
    }
    const auto degraded = degrade(parent.summary, strategy);
    const auto derived = derive_degraded_labels(scores, parent.summary, degraded);
    const auto pair_id = derived_pair_id(parent.summary.id, degraded.id);

    // Re-running replaces everything previously derived for this summary.
    std::erase_if(docs, [&](const SummaryDocument& d) { return d.summary.id == degraded.id; });
    std::erase_if(labels.labels, [&](const LabelRecord& r) {
      return r.kind == LabellerKind::derived && r.target.summary_id == degraded.id;
    });
    std::erase_if(labels.preferences, [&](const PreferenceRecord& p) { return p.pair_id == pair_id; });
    std::erase_if(pairs, [&](const PreferencePair& p) { return p.pair_id == pair_id; });

    docs.push_back(SummaryDocument{parent.query, degraded});
    const auto records = to_derived_records(derived.scores, 0);
    labels.labels.insert(labels.labels.end(), records.begin(), records.end());
    ++made;
    if (derived.preference) {
      labels.preferences.push_back(*derived.preference);
      pairs.push_back(PreferencePair{pair_id, parent.query.id, parent.summary.id, degraded.id,
                                     PairOrigin::derived_degradation, {}});
      ++derived_pairs;
    }
  }
  ws.save_summaries(docs);
  ws.save_labels(labels);
  ws.save_pairs(pairs);
  out << to_string(strategy) << ": " << made << " degraded summaries, " << derived_pairs << " derived pairs\n";
  return kExitOk;
}

struct LlmArgs {
  std::string config;
  std::string endpoint;
  std::string prompts = SGSS_DATA_DIR "/prompts.json";
  std::vector<std::string> targets = {"summaries", "pools", "pairs"};
};

int cmd_label_llm(const Common& c, const LlmArgs& a, std::ostream& out, std::ostream& err) {
  const Workspace ws(c.workspace);
  auto cfg = a.config.empty() ? llm::LabellerConfig{}
                              : llm::labeller_config_from_json(nlohmann::json::parse(io::read_file(a.config)));
  if (!a.endpoint.empty()) cfg.endpoint = a.endpoint;
  const auto prompts = llm::PromptLibrary::load(a.prompts);
  const auto docs = ws.load_summaries();
  const auto existing = ws.load_labels();
  const std::set<std::string> want(a.targets.begin(), a.targets.end());
  for (const auto& t : want)
    if (t != "summaries" && t != "pools" && t != "pairs") throw Error("unknown target set '" + t + "'");

  std::set<CriterionTarget> done;
  std::set<std::string> done_pairs;
  for (const auto& r : existing.labels)
    if (r.labeller_id == cfg.labeller_id()) done.insert(r.target);
  for (const auto& p : existing.preferences)
    if (p.labeller_id == cfg.labeller_id()) done_pairs.insert(p.pair_id);

  std::vector<llm::LlmTask> tasks;
  auto keep = [&](std::vector<llm::LlmTask> batch) {
    for (auto& t : batch)
      if (!(t.target && done.count(*t.target))) tasks.push_back(std::move(t));
  };
  if (want.count("summaries"))
    for (const auto& d : docs)
      if (!d.summary.provenance) keep(llm::summary_tasks(d.query, d.summary, prompts, cfg));
  if (want.count("pools"))
    for (const auto& [q, ss] : summaries_by_query(docs))
      if (ss.size() > 1) keep(llm::pool_tasks(query_of(docs, q), build_pool(ss), ss, prompts));
  if (want.count("pairs")) {
    std::map<std::string, const StructuredSummary*> by_id;
    for (const auto& d : docs) by_id[d.summary.id] = &d.summary;
    std::mt19937_64 rng(c.seed);
    const auto pairs = fs::exists(ws.pairs_path()) ? read_pairs(ws.pairs_path().string()) : std::vector<PreferencePair>{};
    check_references(docs, pairs);
    for (const auto& p : pairs) {
      if (p.origin != PairOrigin::annotated) continue;
      auto t = llm::preference_task(query_of(docs, p.query_id), p.pair_id, *by_id.at(p.left_summary_id),
                                    *by_id.at(p.right_summary_id), prompts, rng);
      if (!done_pairs.count(p.pair_id)) tasks.push_back(std::move(t));
    }
  }

  llm::HttpTransport transport(cfg);
  const std::int64_t ts = now(c);
  llm::Labeller labeller(cfg, transport, {}, [&c, ts] { return c.fixed_time ? *c.fixed_time : ts; });
  const auto result = labeller.batch_label(tasks);

  ws.append_labels(LabelFile{result.labels, result.preferences});
  std::string log = fs::exists(ws.transcripts_path()) ? io::read_file(ws.transcripts_path()) : std::string{};
  for (const auto& t : result.transcripts) log += to_json(t).dump() + "\n";
  for (const auto& f : result.failures) {
    auto j = to_json(f.transcript);
    j["error"] = f.message;
    log += j.dump() + "\n";
  }
  io::write_file_atomic(ws.transcripts_path(), log);

  const auto counters = labeller.position_counters();
  out << result.labels.size() << " labels, " << result.preferences.size() << " preferences, "
      << result.failures.size() << " failures (presentation order: " << counters.unswapped << " as given, "
      << counters.swapped << " swapped)\n";
  for (const auto& f : result.failures) err << f.message << "\n";
  return result.failures.empty() ? kExitOk : kExitData;
}

struct FitArgs {
  std::string config;
  std::string out;
  std::string origin = "all";
  double split_ratio = 0.8;
  bool train_all = false;
};

int cmd_fit(const Common& c, const FitArgs& a, std::ostream& out) {
  const Workspace ws(c.workspace);
  const auto docs = ws.load_summaries();
  auto pairs = filter_origin(ws.load_pairs(policy_of(c)), a.origin);
  check_references(docs, pairs);
  std::erase_if(pairs, [](const PreferencePair& p) { return p.preferences.empty(); });
  if (pairs.empty()) throw Error("no labelled preference pairs to fit on");

  const auto cfg = a.config.empty() ? FitConfig{} : fit_config_from_json(nlohmann::json::parse(io::read_file(a.config)));
  std::vector<PreferencePair> train = pairs;
  if (!a.train_all) {
    const auto split = train_test_split(pairs, a.split_ratio, c.seed);
    train = split.train;
    nlohmann::ordered_json j;
    j["seed"] = c.seed;
    j["ratio"] = a.split_ratio;
    j["train"] = nlohmann::ordered_json::array();
    j["test"] = nlohmann::ordered_json::array();
    for (const auto& p : split.train) j["train"].push_back(p.pair_id);
    for (const auto& p : split.test) j["test"].push_back(p.pair_id);
    io::write_file_atomic(ws.split_path(), j.dump(2) + "\n");
  } else if (fs::exists(ws.split_path())) {
    fs::remove(ws.split_path());
  }

  const auto scores = aggregate(ws.load_labels().labels, policy_of(c));
  const auto comps = ws.load_comps();
  const auto ctx = make_context(docs, scores, comps, lmax_of(c, docs, out));
  const auto result = fit_weights(training_examples(train, ctx), cfg);
  const auto path = a.out.empty() ? ws.weights_path() : fs::path(a.out);
  io::write_file_atomic(path, weights_to_json(result.weights, &result.diagnostics, &cfg).dump(2) + "\n");

  const auto w = to_array(result.weights);
  for (std::size_t k = 0; k < kFeatureCount; ++k) out << "w_" << kFeatureNames[k] << "\t" << num(w[k]) << "\n";
  out << "train pairs\t" << train.size() << "\niterations\t" << result.diagnostics.iterations << "\nloss\t"
      << num(result.diagnostics.loss) << "\nconverged\t" << (result.diagnostics.converged ? "true" : "false") << "\n";
  if (!result.diagnostics.converged)
    throw NotConverged("fit did not converge within " + std::to_string(cfg.max_iters) + " iterations");
  return kExitOk;
}

struct EvalArgs {
  std::string split = "auto";
  std::string tie = "no_credit";
  std::string origin = "all";
};

int cmd_evaluate(const Common& c, const EvalArgs& a, std::ostream& out) {
  const Workspace ws(c.workspace);
  const auto docs = ws.load_summaries();
  auto pairs = filter_origin(ws.load_pairs(policy_of(c)), a.origin);
  check_references(docs, pairs);
  std::erase_if(pairs, [](const PreferencePair& p) { return p.preferences.empty(); });

  std::string split = a.split;
  if (split == "auto") split = fs::exists(ws.split_path()) ? "test" : "all";
  if (split != "all") {
    if (!fs::exists(ws.split_path())) throw Error("no split recorded; run fit first or use --split all");
    const auto j = nlohmann::json::parse(io::read_file(ws.split_path()));
    std::set<std::string> ids;
    for (const auto& id : j.at(split)) ids.insert(id.get<std::string>());
    std::erase_if(pairs, [&](const PreferencePair& p) { return !ids.count(p.pair_id); });
  }
  if (pairs.empty()) throw Error("no labelled preference pairs to evaluate");

  const auto scores = aggregate(ws.load_labels().labels, policy_of(c));
  const auto ctx = make_context(docs, scores, ws.load_comps(), lmax_of(c, docs, out));
  const auto tie = a.tie == "half_credit" ? TieRule::half_credit : TieRule::no_credit;
  const auto report = evaluate_pairs(pairs, ctx, ws.load_weights(weights_arg(c)), tie);
  io::write_file_atomic(ws.eval_report_path(), to_json(report).dump(2) + "\n");
  out << "pair_id\tdelta\tar\n";
  for (const auto& p : report.pairs) out << p.pair_id << "\t" << num(p.delta) << "\t" << num(p.ar) << "\n";
  out << "MAR\t" << num(report.mar) << "\nties\t" << report.ties << "\n";
  return kExitOk;
}

int cmd_plot_data(const Common& c, const std::string& out_path, std::ostream& out) {
  const Workspace ws(c.workspace);
  const auto docs = ws.load_summaries();
  std::map<std::string, std::string> query_of_summary;
  for (const auto& d : docs) query_of_summary[d.summary.id] = d.query.id;
  if (!fs::exists(ws.xux_reports_path())) throw Error("no XUX reports; run score first");
  const auto comps = ws.load_comps();
  if (comps.empty()) throw Error("no Comp reports; run comp first");
  const auto w = ws.load_weights(weights_arg(c));

  std::ostringstream csv;
  csv << "summary_id,query_id,xux,comp,sgss\n";
  std::size_t rows = 0;
  for (const auto& j : io::read_ndjson(ws.xux_reports_path())) {
    const auto r = xux_report_from_json(j);
    auto q = query_of_summary.find(r.summary_id);
    if (q == query_of_summary.end()) throw Error("XUX report for unknown summary '" + r.summary_id + "'");
    auto comp = comps.find(r.summary_id);
    if (comp == comps.end()) continue;  // not pooled
    csv << r.summary_id << "," << q->second << "," << num(r.xux) << "," << num(comp->second) << ","
        << num(r.xux + w.comp * comp->second) << "\n";
    ++rows;
  }
  for (const auto& [id, _] : comps)
    if (!query_of_summary.count(id)) throw Error("Comp report for unknown summary '" + id + "'");
  if (rows == 0) throw Error("no summary has both an XUX report and a Comp value");
  const auto path = out_path.empty() ? ws.plot_path() : fs::path(out_path);
  io::write_file_atomic(path, csv.str());
  out << rows << " rows written to " << path.string() << "\n";
  return kExitOk;
}

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string ui;
};

int cmd_serve(const Common& c, const ServeArgs& a, std::ostream& out) {
  ServiceOptions opts;
  opts.seed = c.seed;
  const fs::path ui = a.ui.empty() ? fs::path(c.workspace) / "ui" : fs::path(a.ui);
  if (fs::is_directory(ui)) opts.ui_dir = ui;
  if (c.fixed_time) {
    const auto t = *c.fixed_time;
    opts.clock = [t] { return t; };
  }
  AnnotationService service(Workspace(c.workspace), opts);
  HttpServer server(service);
  const int port = server.bind(a.host, a.port);
  out << "serving " << c.workspace << " on http://" << a.host << ":" << port << "\n" << std::flush;
  server.listen();
  return kExitOk;
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--workspace,-w", c.workspace, "Workspace directory")->check(CLI::ExistingDirectory);
  sub->add_option("--seed", c.seed, "Seed for every random draw");
  sub->add_option("--policy", c.policy, "Label aggregation policy")
      ->check(CLI::IsMember({"human_only", "llm_only", "combined"}));
  sub->add_option("--weights", c.weights, "Weights file (default: workspace weights.json)");
}

void add_lmax(CLI::App* sub, Common& c) {
  auto* fixed = sub->add_option("--lmax", c.lmax, "Read at most this many lines")->check(CLI::PositiveNumber);
  auto* minutes = sub->add_option("--lmax-minutes", c.lmax_minutes, "Reading time in minutes")
                      ->check(CLI::PositiveNumber);
  sub->add_option("--lmax-cpm", c.lmax_cpm, "Reading speed in characters per minute")->check(CLI::PositiveNumber);
  sub->add_option("--avlen", c.avlen, "Average characters per line (default: measured)")
      ->check(CLI::PositiveNumber);
  fixed->excludes(minutes);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Structured summary evaluation: XUX, Comp and SGSS", "sgss"};
  app.require_subcommand(1);
  Common c;

  auto* score = app.add_subcommand("score", "Compute XUX reports for every summary");
  add_common(score, c);
  add_lmax(score, c);

  std::string query;
  auto* pool = app.add_subcommand("pool", "Build section pools and list unlabelled cells");
  add_common(pool, c);
  pool->add_option("--query", query, "Only this query");

  auto* comp = app.add_subcommand("comp", "Compute Comp for the pooled summaries of each query");
  add_common(comp, c);
  comp->add_option("--query", query, "Only this query");

  std::string strategy;
  auto* degrade_cmd = app.add_subcommand("degrade", "Derive degraded summaries, labels and pairs");
  add_common(degrade_cmd, c);
  degrade_cmd->add_option("--strategy", strategy, "NoHeadings or NoSection1")
      ->required()
      ->check(CLI::IsMember({"NoHeadings", "NoSection1", "no-headings", "no-section1"}));

  LlmArgs llm_args;
  auto* label_llm = app.add_subcommand("label-llm", "Collect labels from a chat endpoint");
  add_common(label_llm, c);
  label_llm->add_option("--config", llm_args.config, "Labeller config JSON");
  label_llm->add_option("--endpoint", llm_args.endpoint, "Override the endpoint URL");
  label_llm->add_option("--prompts", llm_args.prompts, "Prompt template file");
  label_llm->add_option("--targets", llm_args.targets, "Any of: summaries pools pairs");
  label_llm->add_option("--fixed-time", c.fixed_time, "Timestamp for every record");

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "Fit SGSS weights to preference labels");
  add_common(fit, c);
  add_lmax(fit, c);
  fit->add_option("--config", fit_args.config, "Fit config JSON");
  fit->add_option("--out", fit_args.out, "Weights output (default: workspace weights.json)");
  fit->add_option("--origin", fit_args.origin, "Pairs to use")->check(CLI::IsMember({"annotated", "derived", "all"}));
  fit->add_option("--split-ratio", fit_args.split_ratio, "Fraction of queries used for training");
  fit->add_flag("--train-all", fit_args.train_all, "Train on every pair, no held-out split");

  EvalArgs eval_args;
  auto* evaluate = app.add_subcommand("evaluate", "Agreement of SGSS with preference labels");
  add_common(evaluate, c);
  add_lmax(evaluate, c);
  evaluate->add_option("--split", eval_args.split, "Pairs to evaluate")
      ->check(CLI::IsMember({"auto", "train", "test", "all"}));
  evaluate->add_option("--tie", eval_args.tie, "Credit for a zero delta")
      ->check(CLI::IsMember({"no_credit", "half_credit"}));
  evaluate->add_option("--origin", eval_args.origin, "Pairs to use")
      ->check(CLI::IsMember({"annotated", "derived", "all"}));

  std::string plot_out;
  auto* plot = app.add_subcommand("plot-data", "Write the XUX vs Comp table as CSV");
  add_common(plot, c);
  plot->add_option("--out", plot_out, "CSV path (default: workspace reports/plot.csv)");

  ServeArgs serve_args;
  auto* serve = app.add_subcommand("serve", "Run the annotation service");
  add_common(serve, c);
  serve->add_option("--host", serve_args.host, "Bind address");
  serve->add_option("--port", serve_args.port, "Port (0 picks a free one)");
  serve->add_option("--ui", serve_args.ui, "Directory with the built annotation UI");
  serve->add_option("--fixed-time", c.fixed_time, "Timestamp for every stored record");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*score) return cmd_score(c, out);
    if (*pool) return cmd_pool(c, query, out);
    if (*comp) return cmd_comp(c, query, out);
    if (*degrade_cmd) return cmd_degrade(c, strategy, out, err);
    if (*label_llm) return cmd_label_llm(c, llm_args, out, err);
    if (*fit) return cmd_fit(c, fit_args, out);
    if (*evaluate) return cmd_evaluate(c, eval_args, out);
    if (*plot) return cmd_plot_data(c, plot_out, out);
    if (*serve) return cmd_serve(c, serve_args, out);
  } catch (const NotConverged& e) {
    err << "sgss: " << e.what() << "\n";
    return kExitNoConvergence;
  } catch (const CoverageError& e) {
    err << "sgss: " << e.what() << "\n";
    for (const auto& m : e.missing()) err << "  missing: " << m << "\n";
    return kExitData;
  } catch (const Error& e) {
    err << "sgss: " << e.what() << "\n";
    return kExitData;
  } catch (const nlohmann::json::exception& e) {
    err << "sgss: " << e.what() << "\n";
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "sgss: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace sgss::cli
