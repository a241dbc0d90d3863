#include "dinechat/dine/trace_store.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dinechat/error.hpp"

namespace dinechat::dine {

using nlohmann::json;

namespace {

constexpr const char* kSchema = "dinechat.trace";

json table_rows(const ChannelActionTable& t) {
  json rows = json::array();
  for (std::size_t c = 0; c < t.num_channels(); ++c) {
    json row = json::array();
    for (std::size_t a = 0; a < t.num_actions(); ++a) row.push_back(t.at(c, a));
    rows.push_back(row);
  }
  return rows;
}

ChannelActionTable table_from_rows(const json& rows, const std::vector<std::string>& channels,
                                   const std::vector<std::string>& actions) {
  ChannelActionTable t(channels, actions);
  if (rows.size() != channels.size()) throw ParseError("table has wrong channel count");
  for (std::size_t c = 0; c < channels.size(); ++c) {
    if (rows[c].size() != actions.size()) throw ParseError("table has wrong action count");
    for (std::size_t a = 0; a < actions.size(); ++a) t.at(c, a) = rows[c][a].get<double>();
  }
  return t;
}

bool valid_id(const std::string& id) {
  if (id.empty() || id.size() > 128) return false;
  return std::all_of(id.begin(), id.end(), [](char ch) {
    return std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' || ch == '.';
  }) && id.front() != '.';
}

}  // namespace

std::string trace_to_jsonl(const DecisionTrace& trace) {
  std::vector<std::string> channels;
  std::vector<std::string> actions;
  if (!trace.records.empty()) {
    channels = trace.records.front().q_values.channels;
    actions = trace.records.front().q_values.actions;
  }
  std::ostringstream out;
  json header = {{"kind", "header"},          {"schema", kSchema},
                 {"version", kTraceSchemaVersion}, {"trace_id", trace.trace_id},
                 {"description", trace.description}, {"checkpoint", trace.checkpoint},
                 {"channels", channels},        {"actions", actions}};
  out << header.dump() << '\n';
  for (const auto& r : trace.records) {
    json j = {{"kind", "record"},
              {"timestep", r.timestep},
              {"state",
               {{"arrival_rate", r.state.arrival_rate},
                {"servers", r.state.servers},
                {"dimmer", r.state.dimmer},
                {"response_time", r.state.response_time},
                {"utilization", r.state.utilization},
                {"timestep", r.state.timestep}}},
              {"chosen_action", r.chosen_action},
              {"q_values", table_rows(r.q_values)},
              {"reward",
               {{"user_satisfaction", r.reward.user_satisfaction},
                {"revenue", r.reward.revenue},
                {"costs", r.reward.costs},
                {"weights",
                 {r.reward.weights.user_satisfaction, r.reward.weights.revenue,
                  r.reward.weights.costs}}}},
              {"dominance", table_rows(r.dominance)},
              {"uncertainty_score", r.uncertainty_score},
              {"uncertain", r.uncertain}};
    out << j.dump() << '\n';
  }
  return out.str();
}

DecisionTrace trace_from_jsonl(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  DecisionTrace trace;
  std::vector<std::string> channels;
  std::vector<std::string> actions;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    try {
      if (!have_header) {
        if (j.value("kind", "") != "header" || j.value("schema", "") != kSchema) {
          throw ParseError("first line must be a dinechat.trace header", line_no);
        }
        const int version = j.at("version");
        if (version != kTraceSchemaVersion) {
          throw ParseError("unsupported trace schema version " + std::to_string(version),
                           line_no);
        }
        trace.trace_id = j.at("trace_id");
        trace.description = j.value("description", "");
        trace.checkpoint = j.value("checkpoint", "");
        channels = j.at("channels").get<std::vector<std::string>>();
        actions = j.at("actions").get<std::vector<std::string>>();
        have_header = true;
        continue;
      }
      TimestepRecord r;
      r.timestep = j.at("timestep");
      const auto& s = j.at("state");
      r.state.arrival_rate = s.at("arrival_rate");
      r.state.servers = s.at("servers");
      r.state.dimmer = s.at("dimmer");
      r.state.response_time = s.at("response_time");
      r.state.utilization = s.at("utilization");
      r.state.timestep = s.at("timestep");
      r.chosen_action = j.at("chosen_action");
      r.q_values = table_from_rows(j.at("q_values"), channels, actions);
      const auto& w = j.at("reward");
      r.reward.user_satisfaction = w.at("user_satisfaction");
      r.reward.revenue = w.at("revenue");
      r.reward.costs = w.at("costs");
      r.reward.weights = {w.at("weights").at(0), w.at("weights").at(1), w.at("weights").at(2)};
      r.dominance = table_from_rows(j.at("dominance"), channels, actions);
      r.uncertainty_score = j.at("uncertainty_score");
      r.uncertain = j.at("uncertain");
      trace.records.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw ParseError(std::string("malformed trace line: ") + e.what(), line_no);
    }
  }
  if (!have_header) throw ParseError("trace file has no header");
  validate_trace(trace);
  return trace;
}

TraceStore::TraceStore(std::filesystem::path root) : dir_(std::move(root) / "traces") {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path TraceStore::path_for(const std::string& trace_id) const {
  if (!valid_id(trace_id)) throw NotFoundError("invalid trace id '" + trace_id + "'");
  return dir_ / (trace_id + ".jsonl");
}

std::string TraceStore::store(DecisionTrace trace) {
  validate_trace(trace);
  std::unique_lock lock(mutex_);
  if (trace.trace_id.empty()) {
    int n = 1;
    while (std::filesystem::exists(dir_ / ("trace-" + std::to_string(n) + ".jsonl"))) ++n;
    trace.trace_id = "trace-" + std::to_string(n);
  }
  const auto path = path_for(trace.trace_id);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw ConfigError("cannot write trace file '" + tmp + "'");
    out << trace_to_jsonl(trace);
  }
  std::filesystem::rename(tmp, path);
  return trace.trace_id;
}

DecisionTrace TraceStore::load(const std::string& trace_id) const {
  std::shared_lock lock(mutex_);
  const auto path = path_for(trace_id);
  std::ifstream in(path);
  if (!in) throw NotFoundError("trace '" + trace_id + "' not found");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return trace_from_jsonl(buffer.str());
}

bool TraceStore::contains(const std::string& trace_id) const {
  std::shared_lock lock(mutex_);
  return valid_id(trace_id) && std::filesystem::exists(dir_ / (trace_id + ".jsonl"));
}

std::vector<std::string> TraceStore::list() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> ids;
  for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
    if (entry.path().extension() == ".jsonl") ids.push_back(entry.path().stem().string());
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<TimestepRecord> slice(const DecisionTrace& trace, const std::vector<int>& timesteps) {
  const std::set<int> wanted(timesteps.begin(), timesteps.end());
  std::vector<TimestepRecord> out;
  std::set<int> seen;
  for (const auto& r : trace.records) {
    if (wanted.count(r.timestep)) {
      out.push_back(r);
      seen.insert(r.timestep);
    }
  }
  if (seen.size() != wanted.size()) {
    std::string missing;
    for (int t : wanted) {
      if (!seen.count(t)) missing += (missing.empty() ? "" : ", ") + std::to_string(t);
    }
    std::string range = trace.records.empty()
                            ? "trace is empty"
                            : "recorded range is " + std::to_string(trace.first_timestep()) +
                                  "-" + std::to_string(trace.last_timestep());
    throw OutOfRangeError("timesteps not in trace '" + trace.trace_id + "': " + missing +
                          " (" + range + ")");
  }
  return out;
}

}  // namespace dinechat::dine
