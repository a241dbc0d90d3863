#include "dinechat/dine/encode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "dinechat/error.hpp"

namespace dinechat::dine {

using nlohmann::ordered_json;

namespace {

constexpr const char* kTimestep = "Timestep";
constexpr const char* kState = "State";
constexpr const char* kChosen = "Chosen Action";
constexpr const char* kQValues = "Q-Values";
constexpr const char* kReward = "Reward";
constexpr const char* kDominance = "Relative Reward Channel Dominance";
constexpr const char* kUncertainty = "Uncertainty";

bool has(const DineKinds& kinds, DineKind k) {
  return std::find(kinds.begin(), kinds.end(), k) != kinds.end();
}

ordered_json table_to_json(const ChannelActionTable& t) {
  ordered_json out = ordered_json::object();
  for (std::size_t a = 0; a < t.num_actions(); ++a) {
    ordered_json per_channel = ordered_json::object();
    for (std::size_t c = 0; c < t.num_channels(); ++c) {
      per_channel[t.channels[c]] = round2(t.at(c, a));
    }
    out[t.actions[a]] = per_channel;
  }
  return out;
}

ChannelActionTable table_from_json(const ordered_json& j) {
  if (!j.is_object()) throw ParseError("DINE table must be a JSON object");
  std::vector<std::string> actions;
  std::vector<std::string> channels;
  for (const auto& [action, per_channel] : j.items()) {
    actions.push_back(action);
    if (!per_channel.is_object()) throw ParseError("DINE entry for '" + action + "' is not an object");
    if (channels.empty()) {
      for (const auto& [channel, value] : per_channel.items()) channels.push_back(channel);
    }
  }
  ChannelActionTable t(channels, actions);
  std::size_t a = 0;
  for (const auto& [action, per_channel] : j.items()) {
    for (std::size_t c = 0; c < channels.size(); ++c) {
      if (!per_channel.contains(channels[c])) {
        throw ParseError("DINE entry for '" + action + "' lacks channel '" + channels[c] + "'");
      }
      t.at(c, a) = per_channel.at(channels[c]).get<double>();
    }
    ++a;
  }
  return t;
}

ordered_json record_to_json(const TimestepRecord& r, const DineKinds& kinds) {
  ordered_json j;
  j[kTimestep] = r.timestep;
  if (has(kinds, DineKind::kState)) {
    j[kState] = {{"Arrival Rate", round2(r.state.arrival_rate)},
                 {"Servers", r.state.servers},
                 {"Dimmer", round2(r.state.dimmer)},
                 {"Response Time", round2(r.state.response_time)},
                 {"Utilization", round2(r.state.utilization)}};
  }
  if (has(kinds, DineKind::kChosenAction)) j[kChosen] = r.chosen_action;
  if (has(kinds, DineKind::kQValues)) j[kQValues] = table_to_json(r.q_values);
  if (has(kinds, DineKind::kReward)) {
    j[kReward] = {{std::string(sim::kChannelNames[0]), round2(r.reward.user_satisfaction)},
                  {std::string(sim::kChannelNames[1]), round2(r.reward.revenue)},
                  {std::string(sim::kChannelNames[2]), round2(r.reward.costs)},
                  {"Total", round2(r.reward.total())}};
  }
  if (has(kinds, DineKind::kDominance)) j[kDominance] = table_to_json(r.dominance);
  if (has(kinds, DineKind::kUncertainty)) {
    j[kUncertainty] = {{"Score", round2(r.uncertainty_score)}, {"Uncertain", r.uncertain}};
  }
  return j;
}

TimestepRecord record_from_json(const ordered_json& j, DineKinds& found) {
  auto note = [&found](DineKind k) {
    if (!has(found, k)) found.push_back(k);
  };
  TimestepRecord r;
  if (!j.is_object()) throw ParseError("DINE record must be a JSON object");
  if (j.contains(kTimestep)) r.timestep = j.at(kTimestep).get<int>();
  if (j.contains(kState)) {
    const auto& s = j.at(kState);
    r.state.arrival_rate = s.at("Arrival Rate");
    r.state.servers = s.at("Servers");
    r.state.dimmer = s.at("Dimmer");
    r.state.response_time = s.at("Response Time");
    r.state.utilization = s.at("Utilization");
    r.state.timestep = r.timestep;
    note(DineKind::kState);
  }
  if (j.contains(kChosen)) {
    r.chosen_action = j.at(kChosen).get<std::string>();
    note(DineKind::kChosenAction);
  }
  if (j.contains(kQValues)) {
    r.q_values = table_from_json(j.at(kQValues));
    note(DineKind::kQValues);
  }
  if (j.contains(kReward)) {
    const auto& w = j.at(kReward);
    r.reward.user_satisfaction = w.at(std::string(sim::kChannelNames[0]));
    r.reward.revenue = w.at(std::string(sim::kChannelNames[1]));
    r.reward.costs = w.at(std::string(sim::kChannelNames[2]));
    note(DineKind::kReward);
  }
  if (j.contains(kDominance)) {
    r.dominance = table_from_json(j.at(kDominance));
    note(DineKind::kDominance);
  }
  if (j.contains(kUncertainty)) {
    const auto& u = j.at(kUncertainty);
    r.uncertainty_score = u.at("Score");
    r.uncertain = u.at("Uncertain");
    note(DineKind::kUncertainty);
  }
  return r;
}

}  // namespace

DineKinds all_kinds() {
  return {DineKind::kState,  DineKind::kChosenAction, DineKind::kQValues,
          DineKind::kReward, DineKind::kDominance,    DineKind::kUncertainty};
}

DineKinds compact_kinds() {
  return {DineKind::kChosenAction, DineKind::kDominance, DineKind::kUncertainty};
}

std::string_view kind_name(DineKind kind) {
  switch (kind) {
    case DineKind::kState: return "state";
    case DineKind::kChosenAction: return "action";
    case DineKind::kQValues: return "q_values";
    case DineKind::kReward: return "reward";
    case DineKind::kDominance: return "dominance";
    case DineKind::kUncertainty: return "uncertainty";
  }
  return "unknown";
}

DineKind parse_kind(std::string_view name) {
  for (auto k : all_kinds()) {
    if (kind_name(k) == name) return k;
  }
  throw ConfigError("unknown DINE kind '" + std::string(name) + "'");
}

double round2(double value) {
  const double r = std::round(value * 100.0) / 100.0;
  return r == 0.0 ? 0.0 : r;
}

std::string encode_dominance(const TimestepRecord& record) {
  return table_to_json(record.dominance).dump();
}

std::string encode_dines(const std::vector<TimestepRecord>& records, const DineKinds& kinds) {
  if (kinds.empty()) return "[]";
  if (records.empty()) throw ConfigError("encode_dines needs at least one record");
  if (records.size() == 1) {
    if (kinds.size() == 1 && kinds.front() == DineKind::kDominance) {
      return encode_dominance(records.front());
    }
    return record_to_json(records.front(), kinds).dump();
  }
  ordered_json array = ordered_json::array();
  for (const auto& r : records) array.push_back(record_to_json(r, kinds));
  return array.dump();
}

std::vector<TimestepRecord> parse_dines(std::string_view text, DineKinds* kinds_found) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("DINE text is not valid JSON: ") + e.what());
  }
  DineKinds found;
  std::vector<TimestepRecord> records;
  try {
    if (j.is_array()) {
      for (const auto& item : j) records.push_back(record_from_json(item, found));
    } else if (j.is_object() && !j.empty() && !j.contains(kTimestep) &&
               j.begin().value().is_object()) {
      // Bare dominance object.
      TimestepRecord r;
      r.dominance = table_from_json(j);
      found.push_back(DineKind::kDominance);
      records.push_back(std::move(r));
    } else {
      records.push_back(record_from_json(j, found));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed DINE record: ") + e.what());
  }
  if (kinds_found) *kinds_found = found;
  return records;
}

std::size_t dominant_channel(const TimestepRecord& record) {
  const std::size_t a = record.chosen_index();
  std::size_t best = 0;
  for (std::size_t c = 1; c < record.dominance.num_channels(); ++c) {
    if (round2(record.dominance.at(c, a)) > round2(record.dominance.at(best, a))) best = c;
  }
  return best;
}

double dominance_margin(const TimestepRecord& record) {
  const std::size_t a = record.chosen_index();
  const std::size_t best = dominant_channel(record);
  double runner_up = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < record.dominance.num_channels(); ++c) {
    if (c != best) runner_up = std::max(runner_up, round2(record.dominance.at(c, a)));
  }
  return round2(record.dominance.at(best, a)) - runner_up;
}

}  // namespace dinechat::dine
