#include "sgss/service.hpp"

#include <algorithm>
#include <chrono>
#include <thread>

#include <httplib.h>

#include "sgss/error.hpp"
#include "sgss/io.hpp"

namespace sgss {

namespace fs = std::filesystem;

std::string to_string(TaskStatus s) {
  switch (s) {
    case TaskStatus::open:
      return "open";
    case TaskStatus::partial:
      return "partial";
    case TaskStatus::complete:
      return "complete";
  }
  return "open";
}

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

ServiceResponse error_response(int status, const std::string& message) {
  nlohmann::ordered_json j;
  j["error"] = message;
  return {status, std::move(j)};
}

std::string preference_key(const std::string& pair_id) { return "Preference(" + pair_id + ")"; }

}  // namespace

AnnotationService::AnnotationService(Workspace workspace, ServiceOptions options)
    : workspace_(std::move(workspace)), options_(std::move(options)) {
  for (auto& d : workspace_.load_summaries()) docs_.emplace(d.summary.id, std::move(d));
  for (auto& p : workspace_.load_pairs())
    if (p.origin == PairOrigin::annotated) pairs_.push_back(std::move(p));
  std::vector<SummaryDocument> all;
  for (const auto& [_, d] : docs_) all.push_back(d);
  check_references(all, pairs_);
  labels_ = workspace_.load_labels();
  if (fs::exists(workspace_.assignments_path()))
    for (const auto& row : io::read_ndjson(workspace_.assignments_path()))
      assignments_[{row.at("pair_id").get<std::string>(), row.at("labeller_id").get<std::string>()}] =
          row.at("swapped").get<bool>();
  if (fs::exists(workspace_.skips_path()))
    for (const auto& row : io::read_ndjson(workspace_.skips_path()))
      skips_.emplace_back(row.at("pair_id").get<std::string>(), row.at("labeller_id").get<std::string>());
  if (!options_.clock)
    options_.clock = [] {
      return std::chrono::duration_cast<std::chrono::seconds>(
                 std::chrono::system_clock::now().time_since_epoch())
          .count();
    };
}

std::int64_t AnnotationService::now() const { return options_.clock(); }

const PreferencePair* AnnotationService::find_pair(const std::string& pair_id) const {
  auto it = std::find_if(pairs_.begin(), pairs_.end(), [&](const PreferencePair& p) { return p.pair_id == pair_id; });
  return it == pairs_.end() ? nullptr : &*it;
}

std::vector<CriterionTarget> AnnotationService::checklist(const PreferencePair& pair) const {
  auto out = annotation_checklist(docs_.at(pair.left_summary_id).summary);
  const auto right = annotation_checklist(docs_.at(pair.right_summary_id).summary);
  out.insert(out.end(), right.begin(), right.end());
  return out;
}

std::vector<std::string> AnnotationService::missing(const PreferencePair& pair, const std::string& labeller,
                                                    const std::vector<LabelRecord>& extra,
                                                    bool extra_preference) const {
  std::set<CriterionTarget> have;
  for (const auto& r : labels_.labels)
    if (r.labeller_id == labeller) have.insert(r.target);
  for (const auto& r : extra) have.insert(r.target);
  std::vector<std::string> out;
  for (const auto& t : checklist(pair))
    if (!have.count(t)) out.push_back(t.describe());
  const bool has_pref =
      extra_preference || std::any_of(labels_.preferences.begin(), labels_.preferences.end(), [&](const PreferenceRecord& p) {
        return p.pair_id == pair.pair_id && p.labeller_id == labeller;
      });
  if (!has_pref) out.push_back(preference_key(pair.pair_id));
  return out;
}

TaskStatus AnnotationService::status(const PreferencePair& pair, const std::string& labeller) const {
  const auto gaps = missing(pair, labeller, {}, false);
  if (gaps.empty()) return TaskStatus::complete;
  return gaps.size() == checklist(pair).size() + 1 ? TaskStatus::open : TaskStatus::partial;
}

bool AnnotationService::draw_order(const PreferencePair& pair, const std::string& labeller) const {
  auto it = assignments_.find({pair.pair_id, labeller});
  if (it != assignments_.end()) return it->second;
  return fnv1a(std::to_string(options_.seed) + "\x1f" + pair.pair_id + "\x1f" + labeller) & 1u;
}

bool AnnotationService::swapped_for(const PreferencePair& pair, const std::string& labeller) {
  const auto key = std::make_pair(pair.pair_id, labeller);
  auto it = assignments_.find(key);
  if (it != assignments_.end()) return it->second;
  const bool swapped = draw_order(pair, labeller);
  assignments_[key] = swapped;
  std::vector<nlohmann::ordered_json> rows;
  for (const auto& [k, v] : assignments_) {
    nlohmann::ordered_json row;
    row["pair_id"] = k.first;
    row["labeller_id"] = k.second;
    row["swapped"] = v;
    rows.push_back(std::move(row));
  }
  io::write_file_atomic(workspace_.assignments_path(), io::dump_ndjson(rows));
  return swapped;
}

nlohmann::ordered_json AnnotationService::payload(const PreferencePair& pair,
                                                  const std::optional<std::string>& labeller) {
  const bool swapped = labeller ? swapped_for(pair, *labeller) : false;
  const auto& left = docs_.at(swapped ? pair.right_summary_id : pair.left_summary_id);
  const auto& right = docs_.at(swapped ? pair.left_summary_id : pair.right_summary_id);
  nlohmann::ordered_json j;
  j["pair_id"] = pair.pair_id;
  const auto doc = to_json(left);
  j["query"] = doc["query"];
  j["labeller_id"] = labeller ? nlohmann::ordered_json(*labeller) : nlohmann::ordered_json(nullptr);
  j["columns"] = nlohmann::ordered_json::array();
  for (const auto* side : {&left, &right}) {
    nlohmann::ordered_json col;
    col["position"] = side == &left ? "LEFT" : "RIGHT";
    col["summary"] = to_json(*side)["summary"];
    col["checklist"] = nlohmann::ordered_json::array();
    for (const auto& t : annotation_checklist(side->summary)) col["checklist"].push_back(to_json(t));
    j["columns"].push_back(std::move(col));
  }
  if (labeller) {
    j["status"] = to_string(status(pair, *labeller));
    j["missing"] = missing(pair, *labeller, {}, false);
  }
  return j;
}

ServiceResponse AnnotationService::next_pair(const std::string& labeller) {
  if (labeller.empty()) return error_response(400, "labeller is required");
  std::lock_guard lock(mu_);
  std::vector<const PreferencePair*> fresh, skipped;
  for (const auto& p : pairs_) {
    if (status(p, labeller) == TaskStatus::complete) continue;
    const bool was_skipped = std::any_of(skips_.begin(), skips_.end(), [&](const auto& s) {
      return s.first == p.pair_id && s.second == labeller;
    });
    (was_skipped ? skipped : fresh).push_back(&p);
  }
  // Skipped tasks go back to the end of the queue, oldest skip first.
  std::stable_sort(skipped.begin(), skipped.end(), [&](const PreferencePair* a, const PreferencePair* b) {
    auto last = [&](const PreferencePair* p) {
      std::size_t pos = 0;
      for (std::size_t k = 0; k < skips_.size(); ++k)
        if (skips_[k].first == p->pair_id && skips_[k].second == labeller) pos = k;
      return pos;
    };
    return last(a) < last(b);
  });
  const PreferencePair* pick = !fresh.empty() ? fresh.front() : !skipped.empty() ? skipped.front() : nullptr;
  if (!pick) return {204, nullptr};
  return {200, payload(*pick, labeller)};
}

ServiceResponse AnnotationService::get_pair(const std::string& pair_id,
                                            const std::optional<std::string>& labeller) {
  std::lock_guard lock(mu_);
  const auto* pair = find_pair(pair_id);
  if (!pair) return error_response(404, "unknown pair '" + pair_id + "'");
  return {200, payload(*pair, labeller)};
}

ServiceResponse AnnotationService::submit(const std::string& pair_id, const std::string& body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    return error_response(400, std::string("malformed JSON: ") + e.what());
  }
  std::lock_guard lock(mu_);
  const auto* pair = find_pair(pair_id);
  if (!pair) return error_response(404, "unknown pair '" + pair_id + "'");
  if (!j.is_object() || !j.contains("labeller_id") || !j["labeller_id"].is_string() ||
      j["labeller_id"].get<std::string>().empty())
    return error_response(400, "labeller_id is required");
  const auto labeller = j["labeller_id"].get<std::string>();
  const auto ts = now();

  const auto required = checklist(*pair);
  const std::set<CriterionTarget> allowed(required.begin(), required.end());
  std::vector<LabelRecord> records;
  std::optional<PreferenceRecord> preference;
  try {
    if (j.contains("labels")) {
      if (!j["labels"].is_array()) return error_response(400, "labels must be an array");
      for (auto line : j["labels"]) {
        if (!line.is_object()) return error_response(400, "label entries must be objects");
        if (!line.contains("labeller_id")) line["labeller_id"] = labeller;
        if (!line.contains("kind")) line["kind"] = "human";
        line["ts"] = ts;
        const auto parsed = label_line_from_json(line);
        if (!std::holds_alternative<LabelRecord>(parsed))
          return error_response(400, "preferences belong in the preference field");
        const auto& r = std::get<LabelRecord>(parsed);
        if (r.labeller_id != labeller) return error_response(400, "label for a different labeller");
        if (r.kind != LabellerKind::human) return error_response(400, "only human labels are accepted");
        if (!std::holds_alternative<Grade3>(r.value)) return error_response(400, "labels must carry a grade");
        if (!allowed.count(r.target))
          return error_response(400, "target not on this pair's checklist: " + r.target.describe());
        records.push_back(r);
      }
    }
    if (j.contains("preference") && !j["preference"].is_null()) {
      const auto& p = j["preference"];
      if (!p.is_object() || !p.contains("choice")) return error_response(400, "preference needs a choice");
      Choice shown = parse_choice(p.at("choice").get<std::string>());
      if (draw_order(*pair, labeller)) shown = shown == Choice::LEFT ? Choice::RIGHT : Choice::LEFT;
      preference = PreferenceRecord{labeller, LabellerKind::human, pair->pair_id, shown, ts};
    }
  } catch (const nlohmann::json::exception& e) {
    return error_response(400, std::string("malformed label: ") + e.what());
  } catch (const Error& e) {
    return error_response(400, e.what());
  }

  const auto gaps = missing(*pair, labeller, records, preference.has_value());
  if (!gaps.empty()) {
    auto r = error_response(409, "submission incomplete");
    r.body["missing"] = gaps;
    return r;
  }

  LabelFile next = labels_;
  next.labels.insert(next.labels.end(), records.begin(), records.end());
  if (preference) next.preferences.push_back(*preference);
  try {
    workspace_.save_labels(next);
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
  labels_ = std::move(next);
  nlohmann::ordered_json ok;
  ok["pair_id"] = pair->pair_id;
  ok["labeller_id"] = labeller;
  ok["status"] = to_string(TaskStatus::complete);
  ok["stored"] = records.size() + (preference ? 1 : 0);
  return {200, std::move(ok)};
}

ServiceResponse AnnotationService::skip(const std::string& pair_id, const std::string& labeller) {
  if (labeller.empty()) return error_response(400, "labeller is required");
  std::lock_guard lock(mu_);
  const auto* pair = find_pair(pair_id);
  if (!pair) return error_response(404, "unknown pair '" + pair_id + "'");
  skips_.emplace_back(pair_id, labeller);
  std::vector<nlohmann::ordered_json> rows;
  for (const auto& [p, l] : skips_) rows.push_back({{"pair_id", p}, {"labeller_id", l}});
  io::write_file_atomic(workspace_.skips_path(), io::dump_ndjson(rows));
  nlohmann::ordered_json j;
  j["pair_id"] = pair_id;
  j["labeller_id"] = labeller;
  j["skipped"] = true;
  return {200, std::move(j)};
}

ServiceResponse AnnotationService::progress() {
  std::lock_guard lock(mu_);
  std::set<std::string> labellers;
  for (const auto& r : labels_.labels)
    if (r.kind == LabellerKind::human) labellers.insert(r.labeller_id);
  for (const auto& [k, _] : assignments_) labellers.insert(k.second);
  for (const auto& [_, l] : skips_) labellers.insert(l);

  nlohmann::ordered_json j;
  j["pairs"] = pairs_.size();
  j["labellers"] = nlohmann::ordered_json::object();
  j["tasks"] = nlohmann::ordered_json::array();
  for (const auto& l : labellers) {
    std::size_t counts[3] = {0, 0, 0};
    std::set<std::string> skipped;
    for (const auto& [p, who] : skips_)
      if (who == l) skipped.insert(p);
    for (const auto& p : pairs_) {
      const auto s = status(p, l);
      ++counts[static_cast<int>(s)];
      j["tasks"].push_back({{"pair_id", p.pair_id}, {"labeller_id", l}, {"status", to_string(s)}});
    }
    j["labellers"][l] = {{"open", counts[0]}, {"partial", counts[1]}, {"complete", counts[2]},
                         {"skipped", skipped.size()}};
  }
  return {200, std::move(j)};
}

// ---------------------------------------------------------------------------

struct HttpServer::Impl {
  AnnotationService& service;
  httplib::Server server;
  std::thread thread;

  explicit Impl(AnnotationService& s) : service(s) {
    auto reply = [](httplib::Response& res, const ServiceResponse& r) {
      res.status = r.status;
      if (r.status != 204) res.set_content(r.body.dump(), "application/json");
    };
    server.Get("/api/pairs/next", [this, reply](const httplib::Request& req, httplib::Response& res) {
      reply(res, service.next_pair(req.get_param_value("labeller")));
    });
    server.Get(R"(/api/pairs/([^/]+))", [this, reply](const httplib::Request& req, httplib::Response& res) {
      std::optional<std::string> labeller;
      if (req.has_param("labeller")) labeller = req.get_param_value("labeller");
      reply(res, service.get_pair(req.matches[1], labeller));
    });
    server.Post(R"(/api/pairs/([^/]+)/labels)", [this, reply](const httplib::Request& req, httplib::Response& res) {
      reply(res, service.submit(req.matches[1], req.body));
    });
    server.Post(R"(/api/pairs/([^/]+)/skip)", [this, reply](const httplib::Request& req, httplib::Response& res) {
      std::string labeller = req.get_param_value("labeller");
      if (labeller.empty() && !req.body.empty()) {
        const auto j = nlohmann::json::parse(req.body, nullptr, false);
        if (j.is_object() && j.contains("labeller_id") && j["labeller_id"].is_string())
          labeller = j["labeller_id"].get<std::string>();
      }
      reply(res, service.skip(req.matches[1], labeller));
    });
    server.Get("/api/progress", [this, reply](const httplib::Request&, httplib::Response& res) {
      reply(res, service.progress());
    });
    if (const auto& ui = service.options().ui_dir; ui && fs::is_directory(*ui))
      server.set_mount_point("/", ui->string());
  }
};

HttpServer::HttpServer(AnnotationService& service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int p = impl_->server.bind_to_any_port(host);
    if (p < 0) throw Error("cannot bind " + host);
    return p;
  }
  if (!impl_->server.bind_to_port(host, port)) throw Error("cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::start() {
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void HttpServer::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace sgss
