#include "dinechat/eval/reference.hpp"

#include <fstream>

#include "dinechat/error.hpp"

namespace dinechat::eval {

const ReferenceCell* ReferenceConstants::find(const std::string& prompting,
                                              const std::string& form) const {
  for (const auto& c : cells) {
    if (c.prompting == prompting && c.form == form) return &c;
  }
  return nullptr;
}

nlohmann::ordered_json reference_to_json(const ReferenceConstants& ref) {
  nlohmann::ordered_json j;
  j["source"] = ref.source;
  j["cells"] = nlohmann::ordered_json::array();
  for (const auto& c : ref.cells) {
    j["cells"].push_back({{"prompting", c.prompting},
                          {"form", c.form},
                          {"fidelity", c.fidelity},
                          {"stability", c.stability},
                          {"note", c.note}});
  }
  const auto& f = ref.form_comparison;
  j["form_comparison"] = {{"open_fidelity", f.open_fidelity},
                          {"closed_fidelity", f.closed_fidelity},
                          {"open_stability", f.open_stability},
                          {"closed_stability", f.closed_stability},
                          {"note", f.note}};
  j["effectiveness"] = {{"all_correct", ref.all_correct_effectiveness},
                        {"note", ref.effectiveness_note}};
  return j;
}

ReferenceConstants reference_from_json(const nlohmann::json& j) {
  ReferenceConstants ref;
  try {
    ref.source = j.value("source", "");
    for (const auto& c : j.at("cells")) {
      ref.cells.push_back({c.at("prompting").get<std::string>(), c.at("form").get<std::string>(),
                           c.at("fidelity").get<double>(), c.at("stability").get<double>(),
                           c.value("note", "")});
    }
    const auto& f = j.at("form_comparison");
    ref.form_comparison = {f.at("open_fidelity").get<double>(), f.at("closed_fidelity").get<double>(),
                           f.at("open_stability").get<double>(),
                           f.at("closed_stability").get<double>(), f.value("note", "")};
    const auto& e = j.at("effectiveness");
    ref.all_correct_effectiveness = e.at("all_correct").get<double>();
    ref.effectiveness_note = e.value("note", "");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed reference constants: ") + e.what());
  }
  return ref;
}

ReferenceConstants load_reference(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read reference constants '" + path + "'");
  try {
    return reference_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("reference constants '" + path + "': " + e.what());
  }
}

}  // namespace dinechat::eval
