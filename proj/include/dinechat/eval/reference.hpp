#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace dinechat::eval {

// Published results shown next to ours; loaded from a data file and never
// recomputed.
struct ReferenceCell {
  std::string prompting;
  std::string form;
  double fidelity = 0.0;
  double stability = 0.0;
  std::string note;
};

struct FormComparison {
  double open_fidelity = 0.0;
  double closed_fidelity = 0.0;
  double open_stability = 0.0;
  double closed_stability = 0.0;
  std::string note;
};

struct ReferenceConstants {
  std::string source;
  std::vector<ReferenceCell> cells;
  FormComparison form_comparison;
  double all_correct_effectiveness = 0.0;
  std::string effectiveness_note;

  const ReferenceCell* find(const std::string& prompting, const std::string& form) const;
};

nlohmann::ordered_json reference_to_json(const ReferenceConstants& ref);
ReferenceConstants reference_from_json(const nlohmann::json& j);
ReferenceConstants load_reference(const std::string& path);

}  // namespace dinechat::eval
