#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "dinechat/config_file.hpp"
#include "dinechat/dine/record.hpp"
#include "dinechat/eval/reference.hpp"
#include "dinechat/explain/pipeline.hpp"
#include "dinechat/llm/backend.hpp"
#include "dinechat/sim/workload.hpp"

namespace dinechat::service {

// The shared key = value config plus the directory relative paths in it
// resolve against.
struct AppConfig {
  KeyValueConfig values;
  std::filesystem::path base_dir = ".";

  // Empty path: built-in defaults, paths relative to the working directory.
  static AppConfig load(const std::string& path);
  std::filesystem::path resolve(const std::string& path) const;
  // Resolved path for `key`, or `fallback` (resolved) when unset.
  std::filesystem::path path(const std::string& key, const std::string& fallback) const;
};

// workload.file, or a generated trace from workload.profile, workload.seed,
// workload.length, workload.min_rate, workload.max_rate, workload.period.
sim::WorkloadTrace workload_from_config(const AppConfig& config);

explain::PipelineConfig pipeline_from_config(const AppConfig& config);

// "oracle", "mock" (script from llm.mock_script) or "live" (credential from
// LLM_API_KEY, endpoint from LLM_BASE_URL or llm.base_url).
std::shared_ptr<llm::ChatBackend> make_backend(const std::string& name, const AppConfig& config);

// A trace given as a JSONL file path, or as an id in <data_dir>/traces.
dine::DecisionTrace resolve_trace(const std::string& spec, const std::filesystem::path& data_dir);

eval::ReferenceConstants reference_from_config(const AppConfig& config);

}  // namespace dinechat::service
