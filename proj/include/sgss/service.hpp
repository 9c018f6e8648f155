#pragma once

// Label-collection service behind the annotation UI. Handlers are plain
// methods so they can be exercised without a socket; HttpServer binds them
// to routes.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgss/labels.hpp"
#include "sgss/sgss.hpp"
#include "sgss/summary.hpp"
#include "sgss/workspace.hpp"

namespace sgss {

struct ServiceOptions {
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> ui_dir;
  std::function<std::int64_t()> clock;  // defaults to wall-clock seconds
};

enum class TaskStatus { open, partial, complete };
std::string to_string(TaskStatus s);

struct ServiceResponse {
  int status = 200;
  nlohmann::ordered_json body;
};

class AnnotationService {
 public:
  AnnotationService(Workspace workspace, ServiceOptions options = {});

  ServiceResponse next_pair(const std::string& labeller);
  ServiceResponse get_pair(const std::string& pair_id, const std::optional<std::string>& labeller);
  // Body: {"labeller_id", "labels": [label lines], "preference": {"choice"}}.
  // The choice refers to the columns as shown to that labeller.
  ServiceResponse submit(const std::string& pair_id, const std::string& body);
  ServiceResponse skip(const std::string& pair_id, const std::string& labeller);
  ServiceResponse progress();

  const ServiceOptions& options() const { return options_; }

  // Targets a labeller must supply for a pair, both sides, HRdirect per heading.
  std::vector<CriterionTarget> checklist(const PreferencePair& pair) const;
  TaskStatus status(const PreferencePair& pair, const std::string& labeller) const;

 private:
  const PreferencePair* find_pair(const std::string& pair_id) const;
  bool draw_order(const PreferencePair& pair, const std::string& labeller) const;
  bool swapped_for(const PreferencePair& pair, const std::string& labeller);  // records the draw
  nlohmann::ordered_json payload(const PreferencePair& pair, const std::optional<std::string>& labeller);
  std::vector<std::string> missing(const PreferencePair& pair, const std::string& labeller,
                                   const std::vector<LabelRecord>& extra, bool extra_preference) const;
  std::int64_t now() const;

  Workspace workspace_;
  ServiceOptions options_;
  mutable std::mutex mu_;
  std::map<std::string, SummaryDocument> docs_;
  std::vector<PreferencePair> pairs_;
  LabelFile labels_;
  std::map<std::pair<std::string, std::string>, bool> assignments_;  // (pair, labeller) -> swapped
  std::vector<std::pair<std::string, std::string>> skips_;           // (pair, labeller), in order
};

class HttpServer {
 public:
  explicit HttpServer(AnnotationService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Port 0 picks a free port; returns the bound port.
  int bind(const std::string& host, int port);
  void listen();  // blocks until stop()
  void start();   // listen() on a background thread
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace sgss
