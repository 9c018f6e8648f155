#include "sgss/llm_labeller.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdlib>
#include <set>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "sgss/io.hpp"

namespace sgss::llm {

LabellerConfig labeller_config_from_json(const nlohmann::json& j) {
  LabellerConfig cfg;
  try {
    cfg.endpoint = j.value("endpoint", cfg.endpoint);
    cfg.model = j.value("model", cfg.model);
    cfg.auth_env = j.value("auth_env", cfg.auth_env);
    cfg.timeout = std::chrono::milliseconds(j.value("timeout_ms", cfg.timeout.count()));
    cfg.max_retries = j.value("max_retries", cfg.max_retries);
    cfg.backoff_base = std::chrono::milliseconds(j.value("backoff_ms", cfg.backoff_base.count()));
    cfg.temperature = j.value("temperature", cfg.temperature);
    cfg.concurrency = j.value("concurrency", cfg.concurrency);
    cfg.heading_by_statement = j.value("heading_by_statement", cfg.heading_by_statement);
    const auto zc = j.value("zero_citation", std::string("record_no"));
    if (zc == "record_no")
      cfg.zero_citation = ZeroCitationPolicy::record_no;
    else if (zc == "full_doclist")
      cfg.zero_citation = ZeroCitationPolicy::full_doclist;
    else
      throw Error("unknown zero_citation policy '" + zc + "'");
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed labeller config: ") + e.what());
  }
  if (cfg.max_retries < 0) throw Error("max_retries must be >= 0");
  if (cfg.concurrency < 1) throw Error("concurrency must be >= 1");
  return cfg;
}

nlohmann::ordered_json to_json(const ChatRequest& r) {
  nlohmann::ordered_json j;
  j["model"] = r.model;
  j["messages"] = nlohmann::ordered_json::array();
  for (const auto& m : r.messages) j["messages"].push_back({{"role", m.role}, {"content", m.content}});
  j["temperature"] = r.temperature;
  return j;
}

bool is_transient(int status) { return status == 0 || status == 429 || status >= 500; }

HttpTransport::HttpTransport(const LabellerConfig& cfg) : timeout_(cfg.timeout) {
  const auto& url = cfg.endpoint;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos || url.substr(0, scheme_end) != "http")
    throw Error("endpoint must be an http:// URL: '" + url + "'");
  const auto path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
  if (!cfg.auth_env.empty()) {
    if (const char* t = std::getenv(cfg.auth_env.c_str()); t && *t) token_ = t;
  }
}

ChatResponse HttpTransport::send(const ChatRequest& request) {
  httplib::Client client(scheme_host_port_);
  const auto secs = timeout_.count() / 1000;
  const auto usecs = (timeout_.count() % 1000) * 1000;
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  httplib::Headers headers;
  if (token_) headers.emplace("Authorization", "Bearer " + *token_);
  auto res = client.Post(path_, headers, to_json(request).dump(), "application/json");
  if (!res) return {0, {}, httplib::to_string(res.error())};
  ChatResponse out{res->status, {}, {}};
  if (res->status != 200) {
    out.error = res->body;
    return out;
  }
  try {
    out.content = nlohmann::json::parse(res->body).at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    // A malformed body is treated like an unusable answer.
    out.error = std::string("malformed response body: ") + e.what();
    out.content.clear();
  }
  return out;
}

// ---------------------------------------------------------------------------

PromptLibrary PromptLibrary::from_json(const nlohmann::json& j) {
  PromptLibrary lib;
  try {
    for (const auto& [kind, t] : j.at("templates").items()) {
      PromptTemplate pt;
      pt.kind = kind;
      pt.text = t.at("text").get<std::string>();
      const auto answer = t.value("answer", std::string("grade"));
      if (answer == "grade")
        pt.answer = AnswerKind::grade;
      else if (answer == "choice")
        pt.answer = AnswerKind::choice;
      else
        throw Error("template '" + kind + "': unknown answer kind '" + answer + "'");
      lib.templates_[kind] = std::move(pt);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed prompt library: ") + e.what());
  }
  return lib;
}

PromptLibrary PromptLibrary::load(const std::string& path) {
  try {
    return from_json(nlohmann::json::parse(io::read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(path + ": " + e.what());
  }
}

const PromptTemplate& PromptLibrary::get(const std::string& kind) const {
  auto it = templates_.find(kind);
  if (it == templates_.end()) throw Error("no prompt template for '" + kind + "'");
  return it->second;
}

std::string PromptLibrary::render(const std::string& kind,
                                  const std::map<std::string, std::string>& values) const {
  const auto& text = get(kind).text;
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto open = text.find('{', pos);
    if (open == std::string::npos) {
      out.append(text, pos);
      break;
    }
    const auto close = text.find('}', open);
    if (close == std::string::npos) throw Error("template '" + kind + "': unterminated placeholder");
    out.append(text, pos, open - pos);
    const auto name = text.substr(open + 1, close - open - 1);
    auto it = values.find(name);
    if (it == values.end()) throw Error("template '" + kind + "': no value for {" + name + "}");
    out += it->second;
    pos = close + 1;
  }
  return out;
}

namespace {

std::string normalize_answer(const std::string& response) {
  std::string s;
  for (char c : response) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  auto strip = [](char c) {
    return std::isspace(static_cast<unsigned char>(c)) || c == '"' || c == '\'' || c == '*' ||
           c == '`' || c == '.' || c == '!' || c == ',' || c == ';' || c == ':';
  };
  std::size_t b = 0, e = s.size();
  while (b < e && strip(s[b])) ++b;
  while (e > b && strip(s[e - 1])) --e;
  s = s.substr(b, e - b);
  // Collapse internal whitespace runs.
  std::string out;
  bool space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = true;
      continue;
    }
    if (space && !out.empty()) out += ' ';
    space = false;
    out += c;
  }
  return out;
}

}  // namespace

std::optional<Grade3> parse_grade_answer(const std::string& response) {
  const auto s = normalize_answer(response);
  if (s == "perfectly" || s == "perfectly relevant") return Grade3::Perfectly;
  if (s == "partially" || s == "partially relevant") return Grade3::Partially;
  if (s == "no" || s == "not relevant") return Grade3::No;
  return std::nullopt;
}

std::optional<Choice> parse_choice_answer(const std::string& response) {
  const auto s = normalize_answer(response);
  if (s == "left") return Choice::LEFT;
  if (s == "right") return Choice::RIGHT;
  return std::nullopt;
}

// ---------------------------------------------------------------------------

namespace {

std::string join_citations(const std::vector<int>& citations) {
  std::string out;
  for (int n : citations) out += "[" + std::to_string(n) + "]";
  return out;
}

std::string render_docs(const StructuredSummary& s, const std::vector<int>& citations) {
  std::ostringstream out;
  for (int n : citations) {
    const auto* d = s.find_doc(n);
    if (!d) throw Error("summary '" + s.id + "': unresolved citation [" + std::to_string(n) + "]");
    out << "[" << n << "] " << d->title << "\n" << d->url << "\n";
    if (d->snippet) out << *d->snippet << "\n";
  }
  return out.str();
}

std::vector<int> all_citations(const StructuredSummary& s) {
  std::vector<int> out;
  for (const auto& d : s.doclist) out.push_back(d.citation_number);
  return out;
}

std::string render_section(const std::optional<std::string>& heading, const std::vector<Statement>& st) {
  std::ostringstream out;
  if (heading) out << "## " << *heading << "\n";
  for (const auto& x : st) out << "- " << x.text << " " << join_citations(x.citations) << "\n";
  return out.str();
}

}  // namespace

std::string render_summary(const StructuredSummary& s) {
  std::ostringstream out;
  const std::string overview = s.overview.text + " " + join_citations(s.overview.citations) + "\n";
  if (s.overview.position == OverviewPosition::leading) out << overview << "\n";
  for (const auto& sec : s.sections) out << render_section(sec.heading, sec.statements) << "\n";
  if (s.overview.position == OverviewPosition::trailing) out << overview << "\n";
  out << "Documents:\n" << render_docs(s, all_citations(s));
  return out.str();
}

std::vector<LlmTask> summary_tasks(const Query& query, const StructuredSummary& s,
                                   const PromptLibrary& prompts, const LabellerConfig& cfg) {
  std::vector<LlmTask> out;
  auto add = [&](CriterionTarget t, std::map<std::string, std::string> values,
                 std::optional<Grade3> preset = std::nullopt) {
    values.emplace("query", query.text);
    LlmTask task;
    task.task_id = t.describe();
    const auto kind = to_string(t.criterion);
    task.answer = prompts.get(kind).answer;
    if (!preset) task.prompt = prompts.render(kind, values);
    task.preset = preset;
    task.target = std::move(t);
    out.push_back(std::move(task));
  };
  // Faithfulness is judged against the cited documents only.
  auto faithfulness = [&](CriterionTarget t, const std::string& key, const std::string& text,
                          const std::vector<int>& citations) {
    if (citations.empty() && cfg.zero_citation == ZeroCitationPolicy::record_no) {
      add(std::move(t), {}, Grade3::No);
      return;
    }
    const auto docs = render_docs(s, citations.empty() ? all_citations(s) : citations);
    add(std::move(t), {{key, text}, {"cited_docs", docs}});
  };

  const auto& ov = s.overview;
  add(CriterionTarget::overview(Criterion::OS, s.id), {{"overview", ov.text}});
  faithfulness(CriterionTarget::overview(Criterion::OF, s.id), "overview", ov.text, ov.citations);
  add(CriterionTarget::overview(Criterion::OR, s.id), {{"overview", ov.text}, {"summary", render_summary(s)}});
  for (std::size_t i = 0; i < s.sections.size(); ++i) {
    const auto& sec = s.sections[i];
    const int si = static_cast<int>(i) + 1;
    if (sec.heading && !cfg.heading_by_statement)
      add(CriterionTarget::heading(s.id, si),
          {{"heading", *sec.heading}, {"section", render_section(std::nullopt, sec.statements)}});
    for (std::size_t j = 0; j < sec.statements.size(); ++j) {
      const auto& st = sec.statements[j];
      const int sj = static_cast<int>(j) + 1;
      if (sec.heading && cfg.heading_by_statement)
        add(CriterionTarget::statement(Criterion::HRstatement, s.id, si, sj),
            {{"heading", *sec.heading}, {"statement", st.text}});
      add(CriterionTarget::statement(Criterion::SRel, s.id, si, sj), {{"statement", st.text}});
      faithfulness(CriterionTarget::statement(Criterion::SF, s.id, si, sj), "statement", st.text,
                   st.citations);
    }
  }
  add(CriterionTarget::overview(Criterion::CompAbs, s.id), {{"summary", render_summary(s)}});
  return out;
}

std::vector<LlmTask> pool_tasks(const Query& query, const SectionPool& pool,
                                const std::vector<StructuredSummary>& summaries,
                                const PromptLibrary& prompts) {
  std::vector<LlmTask> out;
  for (const auto& t : unlabelled_cells(pool)) {
    const auto row = std::find_if(summaries.begin(), summaries.end(),
                                  [&](const StructuredSummary& s) { return s.id == t.summary_id; });
    if (row == summaries.end()) throw Error("pool row '" + t.summary_id + "' not among the summaries");
    const auto col = std::find_if(pool.sections.begin(), pool.sections.end(),
                                  [&](const PooledSection& p) { return p.id == t.pooled_section_id; });
    LlmTask task;
    task.task_id = t.describe();
    task.target = t;
    task.answer = prompts.get("PoolRel").answer;
    task.prompt = prompts.render("PoolRel", {{"query", query.text},
                                             {"summary", render_summary(*row)},
                                             {"pooled_section", render_section(col->heading, col->statements)}});
    out.push_back(std::move(task));
  }
  return out;
}

LlmTask preference_task(const Query& query, const std::string& pair_id, const StructuredSummary& left,
                        const StructuredSummary& right, const PromptLibrary& prompts,
                        std::mt19937_64& rng) {
  LlmTask task;
  task.task_id = "Preference(" + pair_id + ")";
  task.pair_id = pair_id;
  task.swapped = std::bernoulli_distribution(0.5)(rng);
  task.answer = prompts.get("Preference").answer;
  const auto& first = task.swapped ? right : left;
  const auto& second = task.swapped ? left : right;
  task.prompt = prompts.render("Preference", {{"query", query.text},
                                              {"left", render_summary(first)},
                                              {"right", render_summary(second)}});
  return task;
}

// ---------------------------------------------------------------------------

nlohmann::ordered_json to_json(const Transcript& t) {
  nlohmann::ordered_json j;
  j["task_id"] = t.task_id;
  if (t.swapped) j["swapped"] = true;
  j["exchanges"] = nlohmann::ordered_json::array();
  for (const auto& e : t.exchanges)
    j["exchanges"].push_back({{"prompt", e.prompt}, {"status", e.status}, {"response", e.response}});
  return j;
}

Labeller::Labeller(LabellerConfig cfg, ChatTransport& transport, Sleep sleep, Clock clock)
    : cfg_(std::move(cfg)), transport_(transport), sleep_(std::move(sleep)), clock_(std::move(clock)) {
  if (cfg_.max_retries < 0) throw Error("max_retries must be >= 0");
  if (cfg_.concurrency < 1) throw Error("concurrency must be >= 1");
  if (!sleep_) sleep_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  if (!clock_)
    clock_ = [] {
      return std::chrono::duration_cast<std::chrono::seconds>(
                 std::chrono::system_clock::now().time_since_epoch())
          .count();
    };
}

std::string Labeller::ask(const LlmTask& task, Transcript& transcript,
                          const std::function<bool(const std::string&)>& accept) {
  transcript.task_id = task.task_id;
  transcript.swapped = task.swapped;
  const ChatRequest request{cfg_.model, {{"user", task.prompt}}, cfg_.temperature};
  std::string last_error;
  for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
    if (attempt > 0) sleep_(cfg_.backoff_base * (1LL << (attempt - 1)));
    const auto res = transport_.send(request);
    transcript.exchanges.push_back({task.prompt, res.status, res.status == 200 ? res.content : res.error});
    if (res.status == 200) {
      if (accept(res.content)) return res.content;
      last_error = "unparseable answer '" + res.content + "'";
      continue;
    }
    last_error = "HTTP status " + std::to_string(res.status) + (res.error.empty() ? "" : ": " + res.error);
    if (!is_transient(res.status)) break;
  }
  throw LabellingFailed("labelling failed for " + task.task_id + ": " + last_error, transcript);
}

LabelRecord Labeller::label_criterion(const LlmTask& task, Transcript* transcript) {
  if (!task.target) throw Error("task '" + task.task_id + "' has no criterion target");
  LabelRecord r{cfg_.labeller_id(), LabellerKind::llm, *task.target, Grade3::No, clock_()};
  Transcript local;
  Transcript& t = transcript ? *transcript : local;
  if (task.preset) {
    t.task_id = task.task_id;
    r.value = *task.preset;
    return r;
  }
  const auto answer = ask(task, t, [](const std::string& a) { return parse_grade_answer(a).has_value(); });
  r.value = *parse_grade_answer(answer);
  return r;
}

PreferenceRecord Labeller::label_pair_preference(const LlmTask& task, Transcript* transcript) {
  if (!task.pair_id) throw Error("task '" + task.task_id + "' is not a preference task");
  Transcript local;
  Transcript& t = transcript ? *transcript : local;
  {
    std::lock_guard lock(mu_);
    ++(task.swapped ? counters_.swapped : counters_.unswapped);
  }
  const auto answer = ask(task, t, [](const std::string& a) { return parse_choice_answer(a).has_value(); });
  Choice shown = *parse_choice_answer(answer);
  if (task.swapped) shown = shown == Choice::LEFT ? Choice::RIGHT : Choice::LEFT;
  return PreferenceRecord{cfg_.labeller_id(), LabellerKind::llm, *task.pair_id, shown, clock_()};
}

BatchResult Labeller::batch_label(const std::vector<LlmTask>& tasks) {
  struct Slot {
    std::optional<LabelRecord> label;
    std::optional<PreferenceRecord> preference;
    Transcript transcript;
    std::optional<std::string> error;
  };
  std::vector<Slot> slots(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < tasks.size(); k = next++) {
      auto& slot = slots[k];
      try {
        if (tasks[k].pair_id)
          slot.preference = label_pair_preference(tasks[k], &slot.transcript);
        else
          slot.label = label_criterion(tasks[k], &slot.transcript);
      } catch (const LabellingFailed& e) {
        slot.error = e.what();
        slot.transcript = e.transcript();
      } catch (const std::exception& e) {
        slot.error = e.what();
        slot.transcript.task_id = tasks[k].task_id;
      }
    }
  };
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(cfg_.concurrency), tasks.size());
  std::vector<std::thread> pool;
  for (std::size_t k = 0; k < n; ++k) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  BatchResult out;
  for (std::size_t k = 0; k < slots.size(); ++k) {
    auto& slot = slots[k];
    if (slot.error) {
      out.failures.push_back({tasks[k].task_id, *slot.error, std::move(slot.transcript)});
      continue;
    }
    if (slot.label) out.labels.push_back(std::move(*slot.label));
    if (slot.preference) out.preferences.push_back(std::move(*slot.preference));
    out.transcripts.push_back(std::move(slot.transcript));
  }
  return out;
}

PositionCounters Labeller::position_counters() const {
  std::lock_guard lock(mu_);
  return counters_;
}

}  // namespace sgss::llm
