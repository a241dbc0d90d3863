#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "dinechat/dine/record.hpp"

namespace dinechat::eval {

enum class TruthKind {
  kChosenAction,     // action chosen at a timestep
  kDominantChannel,  // channel dominating the chosen action at a timestep
  kCountUncertain,   // uncertain decisions over a range
  kCountAction,      // decisions choosing `subject` over a range
  kCountDominant,    // decisions dominated by channel `subject` over a range
};

std::string_view truth_kind_name(TruthKind kind);
TruthKind parse_truth_kind(std::string_view name);
bool is_count(TruthKind kind);

// Machine-checkable answer definition. Single-timestep kinds use
// timesteps = {t}; count kinds list every timestep in scope.
struct GroundTruthSpec {
  TruthKind kind = TruthKind::kChosenAction;
  std::vector<int> timesteps;
  std::string subject;

  void validate() const;
  bool operator==(const GroundTruthSpec&) const = default;
};

// {"kind": ..., "timestep": t} or {"kind": ..., "from": a, "to": b[, "subject": s]}
nlohmann::json spec_to_json(const GroundTruthSpec& spec);
GroundTruthSpec spec_from_json(const nlohmann::json& j);

struct Truth {
  bool is_count = false;
  int count = 0;
  std::string name;  // canonical action or channel name

  std::string describe() const;
  bool operator==(const Truth&) const = default;
};

// Evaluates a spec against records as shown to the chatbot (dominance
// compared at two decimals). Throws OutOfRangeError for missing timesteps.
Truth evaluate_truth(const GroundTruthSpec& spec, const std::vector<dine::TimestepRecord>& records);

class GroundTruthOracle {
 public:
  explicit GroundTruthOracle(dine::DecisionTrace trace) : trace_(std::move(trace)) {}
  Truth evaluate(const GroundTruthSpec& spec) const { return evaluate_truth(spec, trace_.records); }
  const dine::DecisionTrace& trace() const { return trace_; }

 private:
  dine::DecisionTrace trace_;
};

// Reads the spec a question implies: counts for "how many"/"how often",
// dominant channel for "why" or channel questions, chosen action otherwise.
// Timesteps come from the deterministic extractor, defaulting to every record.
GroundTruthSpec infer_spec(std::string_view question,
                           const std::vector<dine::TimestepRecord>& records);

}  // namespace dinechat::eval
