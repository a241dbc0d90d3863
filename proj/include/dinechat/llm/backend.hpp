#pragma once

#include <string>
#include <vector>

#include "dinechat/config_file.hpp"
#include "dinechat/error.hpp"
#include "dinechat/prompt/sequence.hpp"

namespace dinechat::llm {

struct CompletionParams {
  int n = 1;                 // responses per prompt
  int max_tokens = 350;      // reply length cap
  double temperature = 0.0;  // [0, 2]
  double top_p = 1.0;        // (0, 1]; an alternative to temperature
  std::string model = "gpt-3.5-turbo";

  void validate() const;
  static CompletionParams from_config(const KeyValueConfig& config);
  bool operator==(const CompletionParams&) const = default;
};

struct Usage {
  long prompt_tokens = 0;
  long completion_tokens = 0;
  long total() const { return prompt_tokens + completion_tokens; }
};

struct Completion {
  std::vector<std::string> responses;
  Usage usage;
};

// Retryable failure: HTTP 429/5xx, timeouts, dropped connections.
class TransientBackendError : public Error {
 public:
  TransientBackendError(const std::string& what, int status = 0) : Error(what), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

class CredentialError : public Error {
 public:
  using Error::Error;
};

// Non-retryable failure, or retries exhausted.
class GatewayError : public Error {
 public:
  GatewayError(const std::string& what, std::vector<std::string> attempts = {})
      : Error(what), attempts_(std::move(attempts)) {}
  const std::vector<std::string>& attempts() const { return attempts_; }

 private:
  std::vector<std::string> attempts_;
};

// Chat-completion backend. Implementations must be safe to call concurrently.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual Completion complete(const prompt::PromptSequence& sequence,
                              const CompletionParams& params) = 0;
  virtual std::string name() const = 0;
};

}  // namespace dinechat::llm
