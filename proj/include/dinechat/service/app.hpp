#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "dinechat/dine/trace_store.hpp"
#include "dinechat/eval/experiment.hpp"
#include "dinechat/explain/pipeline.hpp"
#include "dinechat/llm/gateway.hpp"
#include "dinechat/service/session_store.hpp"

namespace dinechat::service {

inline constexpr std::string_view kVersion = "0.1.0";

struct HttpResult {
  int status = 200;
  std::string body;  // JSON text
  std::map<std::string, std::string> headers;
};

struct ServiceOptions {
  std::filesystem::path data_dir;  // traces/, sessions/, experiments/
  explain::PipelineConfig pipeline;
  llm::CompletionParams default_params;
  std::string default_trace_id;
  // "deterministic" or "llm" timestep extraction for asks.
  std::string extractor = "deterministic";
  eval::ExperimentConfig experiment_defaults;
  std::string bank_path;  // empty: generate the default bank from the trace
  eval::ReferenceConstants reference;
};

// Builds the chat backend an experiment asks for ("oracle", "mock", "live").
using BackendFactory = std::function<std::shared_ptr<llm::ChatBackend>(const std::string&)>;

// Request handling behind the HTTP routes, usable without a socket.
class ExplanationService {
 public:
  ExplanationService(ServiceOptions options, std::shared_ptr<llm::LlmGateway> ask_gateway,
                     BackendFactory experiment_backends);
  ~ExplanationService();
  ExplanationService(const ExplanationService&) = delete;
  ExplanationService& operator=(const ExplanationService&) = delete;

  HttpResult health() const;
  HttpResult create_session();
  HttpResult get_session(const std::string& session_id) const;
  HttpResult ask(const std::string& session_id, const std::string& body);
  HttpResult list_traces() const;
  HttpResult trace_dines(const std::string& trace_id, const std::optional<std::string>& from,
                         const std::optional<std::string>& to) const;
  HttpResult start_experiment(const std::string& body);
  HttpResult experiment_report(const std::string& experiment_id) const;

  // Blocks until every running experiment has finished.
  void wait_for_experiments();

  const ServiceOptions& options() const { return options_; }
  dine::TraceStore& traces() { return traces_; }

 private:
  struct Experiment {
    std::thread worker;
    std::atomic<bool> finished{false};
    std::atomic<int> cells_done{0};
    int cells_total = 0;
    std::mutex mutex;
    std::optional<eval::ExperimentReport> report;
    std::string error;
  };

  ServiceOptions options_;
  std::shared_ptr<llm::LlmGateway> ask_gateway_;
  BackendFactory experiment_backends_;
  dine::TraceStore traces_;
  SessionStore sessions_;
  mutable std::mutex experiments_mutex_;
  std::map<std::string, std::unique_ptr<Experiment>> experiments_;
  std::atomic<int> next_experiment_{1};
};

// JSON body of an ask response (also stored in the session log).
nlohmann::json prompts_to_json(const std::vector<prompt::PromptSequence>& sent);

}  // namespace dinechat::service
