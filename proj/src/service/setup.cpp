#include "dinechat/service/setup.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "dinechat/dine/trace_store.hpp"
#include "dinechat/error.hpp"
#include "dinechat/eval/oracle_backend.hpp"
#include "dinechat/llm/gateway.hpp"
#include "dinechat/llm/http_backend.hpp"
#include "dinechat/llm/mock_backend.hpp"

namespace dinechat::service {

AppConfig AppConfig::load(const std::string& path) {
  AppConfig c;
  if (path.empty()) return c;
  c.values = KeyValueConfig::load(path);
  c.base_dir = std::filesystem::absolute(path).parent_path();
  return c;
}

std::filesystem::path AppConfig::resolve(const std::string& path) const {
  std::filesystem::path p(path);
  return p.is_absolute() ? p : base_dir / p;
}

std::filesystem::path AppConfig::path(const std::string& key, const std::string& fallback) const {
  return resolve(values.get_string(key, fallback));
}

sim::WorkloadTrace workload_from_config(const AppConfig& config) {
  const auto& v = config.values;
  if (auto file = v.get("workload.file")) return sim::load_trace(config.resolve(*file).string());
  sim::WorkloadShape shape;
  shape.min_rate = v.get_double("workload.min_rate", shape.min_rate);
  shape.max_rate = v.get_double("workload.max_rate", shape.max_rate);
  shape.period = static_cast<int>(v.get_int("workload.period", shape.period));
  shape.noise = v.get_double("workload.noise", shape.noise);
  const auto profile = sim::parse_profile(v.get_string("workload.profile", "diurnal"));
  const auto seed = static_cast<std::uint64_t>(v.get_int("workload.seed", 7));
  const int length = static_cast<int>(v.get_int("workload.length", 1000));
  return sim::generate_trace(seed, length, profile, shape);
}

explain::PipelineConfig pipeline_from_config(const AppConfig& config) {
  explain::PipelineConfig p;
  KeyValueConfig v = config.values;
  if (!v.contains("system.name")) v.set("system.name", "the adaptive webshop");
  if (!v.contains("system.description_file")) {
    v.set("system.description_file", "system_description.txt");
  }
  p.description = prompt::SystemDescription::from_config(v, config.base_dir);
  p.prompt_options = prompt::PromptOptions::from_config(v);
  const auto gw = llm::GatewayOptions::from_config(v);
  p.request_token_cap = gw.request_token_cap;
  p.estimator = gw.estimator;
  return p;
}

std::shared_ptr<llm::ChatBackend> make_backend(const std::string& name, const AppConfig& config) {
  if (name == "oracle") return std::make_shared<eval::OracleBackend>();
  if (name == "mock") {
    const auto script = config.values.get("llm.mock_script");
    if (!script) throw ConfigError("the mock backend needs config key 'llm.mock_script'");
    return std::make_shared<llm::MockBackend>(
        llm::MockBackend::from_file(config.resolve(*script).string()));
  }
  if (name == "live") {
    llm::HttpBackendOptions options;
    options.base_url = config.values.get_string("llm.base_url", options.base_url);
    if (const char* url = std::getenv(llm::kBaseUrlEnv); url != nullptr && *url != '\0') {
      options.base_url = url;
    }
    options.timeout_seconds = config.values.get_double("llm.timeout", options.timeout_seconds);
    return std::make_shared<llm::HttpBackend>(options);
  }
  throw ConfigError("backend must be one of live, mock, oracle (got '" + name + "')");
}

dine::DecisionTrace resolve_trace(const std::string& spec, const std::filesystem::path& data_dir) {
  if (spec.ends_with(".jsonl") || std::filesystem::is_regular_file(spec)) {
    std::ifstream in(spec);
    if (!in) throw NotFoundError("cannot read trace file '" + spec + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return dine::trace_from_jsonl(ss.str());
  }
  return dine::TraceStore(data_dir).load(spec);
}

eval::ReferenceConstants reference_from_config(const AppConfig& config) {
  const auto path = config.path("data.reference", "reference_results.json");
  if (!std::filesystem::exists(path)) return {};
  return eval::load_reference(path.string());
}

}  // namespace dinechat::service
