#include "dinechat/dine/record.hpp"

#include <algorithm>

#include "dinechat/error.hpp"

namespace dinechat::dine {

std::size_t TimestepRecord::chosen_index() const {
  const auto& names = q_values.actions.empty() ? dominance.actions : q_values.actions;
  auto it = std::find(names.begin(), names.end(), chosen_action);
  if (it == names.end()) {
    throw ConfigError("chosen action '" + chosen_action + "' is not in the action table");
  }
  return static_cast<std::size_t>(it - names.begin());
}

void validate_trace(const DecisionTrace& trace) {
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    if (trace.records[i].timestep != static_cast<int>(i)) {
      throw ConfigError("trace '" + trace.trace_id + "': expected timestep " +
                        std::to_string(i) + ", found " +
                        std::to_string(trace.records[i].timestep));
    }
  }
}

}  // namespace dinechat::dine
