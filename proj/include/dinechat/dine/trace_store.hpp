#pragma once

#include <filesystem>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include "dinechat/dine/record.hpp"

namespace dinechat::dine {

inline constexpr int kTraceSchemaVersion = 1;

// JSONL serialisation: a header line followed by one record per line, at
// full double precision.
std::string trace_to_jsonl(const DecisionTrace& trace);
DecisionTrace trace_from_jsonl(const std::string& text);

// Traces persisted as <root>/traces/<trace_id>.jsonl. Readers run
// concurrently; a write replaces the file atomically under an exclusive lock.
class TraceStore {
 public:
  explicit TraceStore(std::filesystem::path root);

  // Returns the trace id; an empty id is replaced by a generated one.
  std::string store(DecisionTrace trace);
  DecisionTrace load(const std::string& trace_id) const;
  bool contains(const std::string& trace_id) const;
  std::vector<std::string> list() const;

  std::filesystem::path path_for(const std::string& trace_id) const;

 private:
  std::filesystem::path dir_;
  mutable std::shared_mutex mutex_;
};

// Records for the timesteps in T, in trace order. Throws OutOfRangeError
// listing every requested timestep that is not recorded.
std::vector<TimestepRecord> slice(const DecisionTrace& trace, const std::vector<int>& timesteps);

}  // namespace dinechat::dine
