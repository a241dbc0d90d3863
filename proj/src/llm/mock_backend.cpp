#include "dinechat/llm/mock_backend.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dinechat/llm/tokens.hpp"

namespace dinechat::llm {

std::string prompt_digest(const prompt::PromptSequence& sequence) {
  std::string canonical;
  for (const auto& m : sequence.messages) {
    canonical += prompt::role_name(m.role);
    canonical += '\n';
    canonical += m.text;
    canonical += '\x1e';
  }
  unsigned char hash[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(canonical.data(), canonical.size(), hash, &length, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    hex += kHex[hash[i] >> 4];
    hex += kHex[hash[i] & 0xf];
  }
  return hex;
}

MockBackend::MockBackend(std::map<std::string, std::vector<std::string>> scripts)
    : scripts_(std::move(scripts)) {}

MockBackend MockBackend::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open mock script '" + path + "'");
  try {
    const auto j = nlohmann::json::parse(in);
    return MockBackend(j.get<std::map<std::string, std::vector<std::string>>>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": mock script must map digests to string lists: " + e.what());
  }
}

Completion MockBackend::complete(const prompt::PromptSequence& sequence,
                                 const CompletionParams& params) {
  const std::string digest = prompt_digest(sequence);
  auto it = scripts_.find(digest);
  if (it == scripts_.end() || it->second.empty()) {
    throw GatewayError("mock backend has no script for prompt digest " + digest);
  }
  Completion out;
  out.usage.prompt_tokens = raw_sequence_tokens(sequence);
  for (int i = 0; i < params.n; ++i) {
    const auto& text = it->second[static_cast<std::size_t>(i) % it->second.size()];
    out.responses.push_back(text);
    out.usage.completion_tokens += estimate_tokens(text);
  }
  return out;
}

}  // namespace dinechat::llm
