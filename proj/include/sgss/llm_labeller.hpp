#pragma once

// Elicits 3-point labels and pairwise preferences from a chat endpoint, one
// question per request.

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgss/comp.hpp"
#include "sgss/error.hpp"
#include "sgss/labels.hpp"
#include "sgss/summary.hpp"

namespace sgss::llm {

enum class ZeroCitationPolicy { record_no, full_doclist };

struct LabellerConfig {
  std::string endpoint = "http://127.0.0.1:8089/v1/chat";
  std::string model = "default";
  std::string auth_env = "SGSS_LLM_TOKEN";
  std::chrono::milliseconds timeout{30000};
  int max_retries = 3;
  std::chrono::milliseconds backoff_base{250};
  double temperature = 0.0;
  int concurrency = 4;
  ZeroCitationPolicy zero_citation = ZeroCitationPolicy::record_no;
  bool heading_by_statement = true;  // HRstatement per statement instead of HRdirect per heading

  std::string labeller_id() const { return "llm:" + model; }
};

LabellerConfig labeller_config_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Transport

struct ChatMessage {
  std::string role;
  std::string content;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
};

nlohmann::ordered_json to_json(const ChatRequest& r);

// status 0 means the request never produced an HTTP response.
struct ChatResponse {
  int status = 0;
  std::string content;
  std::string error;
};

bool is_transient(int status);

class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  // Must be safe to call from several threads at once.
  virtual ChatResponse send(const ChatRequest& request) = 0;
};

// POST {model, messages, temperature} -> {content}; plain http only.
class HttpTransport : public ChatTransport {
 public:
  explicit HttpTransport(const LabellerConfig& cfg);
  ChatResponse send(const ChatRequest& request) override;

 private:
  std::string scheme_host_port_;
  std::string path_;
  std::optional<std::string> token_;
  std::chrono::milliseconds timeout_;
};

// ---------------------------------------------------------------------------
// Prompts

enum class AnswerKind { grade, choice };

struct PromptTemplate {
  std::string kind;  // criterion name or "Preference"
  std::string text;
  AnswerKind answer = AnswerKind::grade;
};

class PromptLibrary {
 public:
  static PromptLibrary from_json(const nlohmann::json& j);
  static PromptLibrary load(const std::string& path);

  const PromptTemplate& get(const std::string& kind) const;
  // Substitutes {name} placeholders; a placeholder without a value is an error.
  std::string render(const std::string& kind, const std::map<std::string, std::string>& values) const;

 private:
  std::map<std::string, PromptTemplate> templates_;
};

// Lower-cases, trims whitespace, quotes, emphasis markers and trailing
// punctuation. Anything outside the vocabulary yields nullopt.
std::optional<Grade3> parse_grade_answer(const std::string& response);
std::optional<Choice> parse_choice_answer(const std::string& response);

// ---------------------------------------------------------------------------
// Tasks

struct LlmTask {
  std::string task_id;
  std::optional<CriterionTarget> target;  // label task
  std::optional<std::string> pair_id;     // preference task
  bool swapped = false;                   // RIGHT summary shown first
  AnswerKind answer = AnswerKind::grade;
  std::string prompt;
  std::optional<Grade3> preset;  // decided without an endpoint call
};

// Absolute-label tasks for one summary: OS, OF, OR, heading
// representativeness, SRel, SF and CompAbs.
std::vector<LlmTask> summary_tasks(const Query& query, const StructuredSummary& summary,
                                   const PromptLibrary& prompts, const LabellerConfig& cfg);

// PoolRel tasks for every cell of `pool` that is not the row summary's own.
std::vector<LlmTask> pool_tasks(const Query& query, const SectionPool& pool,
                                const std::vector<StructuredSummary>& summaries,
                                const PromptLibrary& prompts);

// Presentation order is drawn from `rng` when the task is built.
LlmTask preference_task(const Query& query, const std::string& pair_id, const StructuredSummary& left,
                        const StructuredSummary& right, const PromptLibrary& prompts,
                        std::mt19937_64& rng);

std::string render_summary(const StructuredSummary& s);

// ---------------------------------------------------------------------------
// Execution

struct Exchange {
  std::string prompt;
  int status = 0;
  std::string response;
};

struct Transcript {
  std::string task_id;
  bool swapped = false;
  std::vector<Exchange> exchanges;
};

nlohmann::ordered_json to_json(const Transcript& t);

class LabellingFailed : public Error {
 public:
  LabellingFailed(const std::string& what, Transcript transcript)
      : Error(what), transcript_(std::move(transcript)) {}
  const Transcript& transcript() const { return transcript_; }

 private:
  Transcript transcript_;
};

struct TaskFailure {
  std::string task_id;
  std::string message;
  Transcript transcript;
};

struct BatchResult {
  std::vector<LabelRecord> labels;
  std::vector<PreferenceRecord> preferences;
  std::vector<Transcript> transcripts;  // successful tasks, in task order
  std::vector<TaskFailure> failures;
};

struct PositionCounters {
  std::size_t unswapped = 0;
  std::size_t swapped = 0;
};

class Labeller {
 public:
  using Sleep = std::function<void(std::chrono::milliseconds)>;
  using Clock = std::function<std::int64_t()>;

  Labeller(LabellerConfig cfg, ChatTransport& transport, Sleep sleep = {}, Clock clock = {});

  // Both throw LabellingFailed once retries are exhausted.
  LabelRecord label_criterion(const LlmTask& task, Transcript* transcript = nullptr);
  PreferenceRecord label_pair_preference(const LlmTask& task, Transcript* transcript = nullptr);

  // Output order follows the task order regardless of completion order.
  BatchResult batch_label(const std::vector<LlmTask>& tasks);

  PositionCounters position_counters() const;

 private:
  std::string ask(const LlmTask& task, Transcript& transcript,
                  const std::function<bool(const std::string&)>& accept);

  LabellerConfig cfg_;
  ChatTransport& transport_;
  Sleep sleep_;
  Clock clock_;
  mutable std::mutex mu_;
  PositionCounters counters_;
};

}  // namespace sgss::llm
