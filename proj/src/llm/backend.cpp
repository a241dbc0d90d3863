#include "dinechat/llm/backend.hpp"

namespace dinechat::llm {

void CompletionParams::validate() const {
  if (n < 1) throw ConfigError("n must be >= 1");
  if (max_tokens < 1) throw ConfigError("max_token must be >= 1");
  if (!(temperature >= 0.0 && temperature <= 2.0)) {
    throw ConfigError("temperature must be in [0, 2]");
  }
  if (!(top_p > 0.0 && top_p <= 1.0)) throw ConfigError("top_p must be in (0, 1]");
  if (model.empty()) throw ConfigError("model must not be empty");
}

CompletionParams CompletionParams::from_config(const KeyValueConfig& c) {
  CompletionParams p;
  p.n = static_cast<int>(c.get_int("llm.n", p.n));
  p.max_tokens = static_cast<int>(c.get_int("llm.max_token", p.max_tokens));
  p.temperature = c.get_double("llm.temperature", p.temperature);
  p.top_p = c.get_double("llm.top_p", p.top_p);
  p.model = c.get_string("llm.model", p.model);
  p.validate();
  return p;
}

}  // namespace dinechat::llm
