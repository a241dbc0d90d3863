#pragma once

#include <map>
#include <string>
#include <vector>

#include "dinechat/llm/backend.hpp"

namespace dinechat::llm {

// SHA-256 (hex) over the role-tagged message texts.
std::string prompt_digest(const prompt::PromptSequence& sequence);

// Scripted responses keyed by prompt digest. Script file format (JSON):
//   {"<digest>": ["response 1", "response 2", ...], ...}
// A request for n responses cycles through the scripted list.
class MockBackend : public ChatBackend {
 public:
  explicit MockBackend(std::map<std::string, std::vector<std::string>> scripts);
  static MockBackend from_file(const std::string& path);

  Completion complete(const prompt::PromptSequence& sequence,
                      const CompletionParams& params) override;
  std::string name() const override { return "mock"; }

 private:
  std::map<std::string, std::vector<std::string>> scripts_;
};

}  // namespace dinechat::llm
