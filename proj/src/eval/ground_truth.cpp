#include "dinechat/eval/ground_truth.hpp"

#include <algorithm>

#include "dinechat/analyze/question.hpp"
#include "dinechat/analyze/terms.hpp"
#include "dinechat/dine/encode.hpp"
#include "dinechat/error.hpp"
#include "dinechat/prompt/generator.hpp"

namespace dinechat::eval {
namespace {

const dine::TimestepRecord& record_at(const std::vector<dine::TimestepRecord>& records, int t) {
  for (const auto& r : records) {
    if (r.timestep == t) return r;
  }
  throw OutOfRangeError("timestep " + std::to_string(t) + " is not in the records");
}

std::string dominant_name(const dine::TimestepRecord& r) {
  return r.dominance.channels.at(dine::dominant_channel(r));
}

}  // namespace

std::string_view truth_kind_name(TruthKind kind) {
  switch (kind) {
    case TruthKind::kChosenAction: return "chosen_action";
    case TruthKind::kDominantChannel: return "dominant_channel";
    case TruthKind::kCountUncertain: return "count_uncertain";
    case TruthKind::kCountAction: return "count_action";
    case TruthKind::kCountDominant: return "count_dominant";
  }
  return "chosen_action";
}

TruthKind parse_truth_kind(std::string_view name) {
  for (auto k : {TruthKind::kChosenAction, TruthKind::kDominantChannel, TruthKind::kCountUncertain,
                 TruthKind::kCountAction, TruthKind::kCountDominant}) {
    if (truth_kind_name(k) == name) return k;
  }
  throw ConfigError("unknown ground-truth kind '" + std::string(name) + "'");
}

bool is_count(TruthKind kind) {
  return kind == TruthKind::kCountUncertain || kind == TruthKind::kCountAction ||
         kind == TruthKind::kCountDominant;
}

void GroundTruthSpec::validate() const {
  if (timesteps.empty()) throw ConfigError("ground-truth spec needs at least one timestep");
  if (!is_count(kind) && timesteps.size() != 1) {
    throw ConfigError(std::string(truth_kind_name(kind)) + " refers to exactly one timestep");
  }
  if ((kind == TruthKind::kCountAction || kind == TruthKind::kCountDominant) && subject.empty()) {
    throw ConfigError(std::string(truth_kind_name(kind)) + " needs a subject");
  }
}

nlohmann::json spec_to_json(const GroundTruthSpec& spec) {
  nlohmann::json j;
  j["kind"] = truth_kind_name(spec.kind);
  if (is_count(spec.kind)) {
    j["from"] = spec.timesteps.front();
    j["to"] = spec.timesteps.back();
  } else {
    j["timestep"] = spec.timesteps.front();
  }
  if (!spec.subject.empty()) j["subject"] = spec.subject;
  return j;
}

GroundTruthSpec spec_from_json(const nlohmann::json& j) {
  GroundTruthSpec s;
  try {
    s.kind = parse_truth_kind(j.at("kind").get<std::string>());
    if (j.contains("timestep")) {
      s.timesteps = {j.at("timestep").get<int>()};
    } else {
      const int from = j.at("from").get<int>();
      const int to = j.at("to").get<int>();
      if (to < from) throw ConfigError("ground-truth range has to < from");
      for (int t = from; t <= to; ++t) s.timesteps.push_back(t);
    }
    s.subject = j.value("subject", "");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed ground-truth spec: ") + e.what());
  }
  s.validate();
  return s;
}

std::string Truth::describe() const { return is_count ? std::to_string(count) : name; }

Truth evaluate_truth(const GroundTruthSpec& spec, const std::vector<dine::TimestepRecord>& records) {
  spec.validate();
  Truth truth;
  truth.is_count = is_count(spec.kind);
  for (int t : spec.timesteps) {
    const auto& r = record_at(records, t);
    switch (spec.kind) {
      case TruthKind::kChosenAction: truth.name = r.chosen_action; break;
      case TruthKind::kDominantChannel: truth.name = dominant_name(r); break;
      case TruthKind::kCountUncertain: truth.count += r.uncertain ? 1 : 0; break;
      case TruthKind::kCountAction: truth.count += r.chosen_action == spec.subject ? 1 : 0; break;
      case TruthKind::kCountDominant: truth.count += dominant_name(r) == spec.subject ? 1 : 0; break;
    }
  }
  return truth;
}

GroundTruthSpec infer_spec(std::string_view question,
                           const std::vector<dine::TimestepRecord>& records) {
  if (records.empty()) throw ConfigError("no records to answer from");
  const std::string lower = analyze::to_lower(question);
  std::vector<int> timesteps;
  for (int t : analyze::parse_timesteps(question).all) {
    if (std::any_of(records.begin(), records.end(),
                    [t](const dine::TimestepRecord& r) { return r.timestep == t; })) {
      timesteps.push_back(t);
    }
  }
  GroundTruthSpec spec;
  if (lower.find("how many") != std::string::npos || lower.find("how often") != std::string::npos) {
    if (timesteps.empty()) {
      for (const auto& r : records) timesteps.push_back(r.timestep);
    }
    const auto predicate = prompt::detect_predicate(question);
    switch (predicate.kind) {
      case prompt::PredicateKind::kUncertain: spec.kind = TruthKind::kCountUncertain; break;
      case prompt::PredicateKind::kAction: spec.kind = TruthKind::kCountAction; break;
      case prompt::PredicateKind::kChannelDominant: spec.kind = TruthKind::kCountDominant; break;
      case prompt::PredicateKind::kGeneric:
        throw ConfigError("cannot tell what to count in: " + std::string(question));
    }
    spec.subject = predicate.subject;
  } else {
    if (timesteps.empty()) {
      if (records.size() != 1) throw ConfigError("question does not name a timestep");
      timesteps.push_back(records.front().timestep);
    }
    timesteps.resize(1);
    const bool channel = lower.find("channel") != std::string::npos ||
                         lower.find("contribut") != std::string::npos ||
                         lower.find("why") != std::string::npos;
    spec.kind = channel ? TruthKind::kDominantChannel : TruthKind::kChosenAction;
  }
  spec.timesteps = std::move(timesteps);
  return spec;
}

}  // namespace dinechat::eval
