#include <httplib.h>

#include "dinechat/llm/http_backend.hpp"

#include <cstdlib>

#include <nlohmann/json.hpp>

namespace dinechat::llm {

using nlohmann::json;

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // without trailing slash
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("base URL needs a scheme: '" + url + "'");
  const auto path_start = url.find('/', scheme_end + 3);
  SplitUrl out;
  out.origin = url.substr(0, path_start);
  out.path = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
  return out;
}

}  // namespace

std::string build_chat_request(const prompt::PromptSequence& sequence,
                               const CompletionParams& params) {
  json messages = json::array();
  for (const auto& m : sequence.messages) {
    messages.push_back({{"role", prompt::role_name(m.role)}, {"content", m.text}});
  }
  json body = {{"model", params.model},
               {"messages", messages},
               {"n", params.n},
               {"max_tokens", params.max_tokens},
               {"temperature", params.temperature}};
  if (params.temperature > 0.0) body["top_p"] = params.top_p;
  return body.dump();
}

Completion parse_chat_response(const std::string& body) {
  Completion out;
  try {
    const auto j = json::parse(body);
    for (const auto& choice : j.at("choices")) {
      out.responses.push_back(choice.at("message").at("content").get<std::string>());
    }
    if (j.contains("usage")) {
      out.usage.prompt_tokens = j["usage"].value("prompt_tokens", 0L);
      out.usage.completion_tokens = j["usage"].value("completion_tokens", 0L);
    }
  } catch (const json::exception& e) {
    throw GatewayError(std::string("unexpected chat completion response: ") + e.what());
  }
  return out;
}

HttpBackend::HttpBackend(HttpBackendOptions options) : options_(std::move(options)) {
  const char* key = std::getenv(kApiKeyEnv);
  if (key == nullptr || *key == '\0') {
    throw CredentialError(std::string("environment variable ") + kApiKeyEnv +
                          " is not set; it must hold the API credential");
  }
  api_key_ = key;
}

HttpBackend::HttpBackend(HttpBackendOptions options, std::string api_key)
    : options_(std::move(options)), api_key_(std::move(api_key)) {}

Completion HttpBackend::complete(const prompt::PromptSequence& sequence,
                                 const CompletionParams& params) {
  const auto url = split_url(options_.base_url);
  httplib::Client client(url.origin);
  const auto timeout = std::chrono::duration<double>(options_.timeout_seconds);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_bearer_token_auth(api_key_);

  auto result = client.Post(url.path + "/chat/completions", build_chat_request(sequence, params),
                            "application/json");
  if (!result) {
    throw TransientBackendError("HTTP request failed: " + httplib::to_string(result.error()));
  }
  const int status = result->status;
  if (status == 401 || status == 403) {
    throw CredentialError("backend rejected the credential (HTTP " + std::to_string(status) +
                          "); check " + kApiKeyEnv);
  }
  if (status == 429 || status >= 500) {
    throw TransientBackendError("HTTP " + std::to_string(status), status);
  }
  if (status != 200) {
    throw GatewayError("HTTP " + std::to_string(status) + ": " + result->body);
  }
  return parse_chat_response(result->body);
}

}  // namespace dinechat::llm
