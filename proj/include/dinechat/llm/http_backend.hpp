#pragma once

#include <string>

#include "dinechat/llm/backend.hpp"

namespace dinechat::llm {

inline constexpr const char* kApiKeyEnv = "LLM_API_KEY";
inline constexpr const char* kBaseUrlEnv = "LLM_BASE_URL";

// Body of an OpenAI-compatible /chat/completions request. At temperature 0
// top_p is left out so a single sampling control is in effect.
std::string build_chat_request(const prompt::PromptSequence& sequence,
                               const CompletionParams& params);
Completion parse_chat_response(const std::string& body);

struct HttpBackendOptions {
  std::string base_url = "https://api.openai.com/v1";
  double timeout_seconds = 60.0;
};

class HttpBackend : public ChatBackend {
 public:
  // Reads the credential from LLM_API_KEY; throws CredentialError if unset.
  explicit HttpBackend(HttpBackendOptions options);
  HttpBackend(HttpBackendOptions options, std::string api_key);

  Completion complete(const prompt::PromptSequence& sequence,
                      const CompletionParams& params) override;
  std::string name() const override { return "live"; }

 private:
  HttpBackendOptions options_;
  std::string api_key_;
};

}  // namespace dinechat::llm
