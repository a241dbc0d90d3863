#include "dinechat/eval/question_bank.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dinechat/dine/encode.hpp"
#include "dinechat/error.hpp"
#include "dinechat/eval/grader.hpp"

namespace dinechat::eval {

std::string_view style_name(QuestionStyle style) {
  switch (style) {
    case QuestionStyle::kWhatWhich: return "what/which";
    case QuestionStyle::kWhy: return "why";
    case QuestionStyle::kHowMany: return "how many";
  }
  return "what/which";
}

QuestionStyle parse_style(std::string_view name) {
  for (auto s : {QuestionStyle::kWhatWhich, QuestionStyle::kWhy, QuestionStyle::kHowMany}) {
    if (style_name(s) == name) return s;
  }
  throw ConfigError("unknown question style '" + std::string(name) + "'");
}

analyze::QuestionSpec QuestionBankEntry::spec(analyze::QuestionForm form) const {
  analyze::QuestionSpec q;
  q.text = text;
  q.form = form;
  if (form == analyze::QuestionForm::kClosed) q.options = options;
  return q;
}

void QuestionBankEntry::validate() const {
  if (id.empty()) throw ConfigError("question bank entry without id");
  if (text.empty()) throw ConfigError("question '" + id + "' has no text");
  if (options.size() < 2) throw ConfigError("question '" + id + "' needs at least two options");
  if (correct >= options.size()) {
    throw ConfigError("question '" + id + "' marks a correct option that does not exist");
  }
  truth.validate();
}

void QuestionBank::validate() const {
  std::set<std::string> ids;
  for (const auto& e : entries) {
    e.validate();
    if (!ids.insert(e.id).second) throw ConfigError("duplicate question id '" + e.id + "'");
  }
}

std::string bank_to_json(const QuestionBank& bank) {
  nlohmann::ordered_json j;
  j["trace_id"] = bank.trace_id;
  j["questions"] = nlohmann::ordered_json::array();
  for (const auto& e : bank.entries) {
    nlohmann::ordered_json q;
    q["id"] = e.id;
    q["style"] = style_name(e.style);
    q["text"] = e.text;
    q["options"] = e.options;
    q["correct"] = std::string(1, static_cast<char>('a' + e.correct));
    q["truth"] = spec_to_json(e.truth);
    j["questions"].push_back(q);
  }
  return j.dump(2) + "\n";
}

QuestionBank bank_from_json(const std::string& text) {
  QuestionBank bank;
  try {
    const auto j = nlohmann::json::parse(text);
    bank.trace_id = j.value("trace_id", "");
    for (const auto& q : j.at("questions")) {
      QuestionBankEntry e;
      e.id = q.at("id").get<std::string>();
      e.style = parse_style(q.at("style").get<std::string>());
      e.text = q.at("text").get<std::string>();
      e.options = q.at("options").get<std::vector<std::string>>();
      const std::string correct = q.at("correct").get<std::string>();
      if (correct.size() != 1 || correct[0] < 'a' || correct[0] > 'z') {
        throw ConfigError("question '" + e.id + "': correct must be a single option letter");
      }
      e.correct = static_cast<std::size_t>(correct[0] - 'a');
      e.truth = spec_from_json(q.at("truth"));
      bank.entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed question bank: ") + e.what());
  }
  bank.validate();
  return bank;
}

QuestionBank load_bank(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read question bank '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return bank_from_json(ss.str());
}

void save_bank(const QuestionBank& bank, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write question bank '" + path + "'");
  out << bank_to_json(bank);
}

void check_bank_against(const QuestionBank& bank, const GroundTruthOracle& oracle) {
  bank.validate();
  for (const auto& e : bank.entries) {
    const Truth truth = oracle.evaluate(e.truth);
    for (std::size_t i = 0; i < e.options.size(); ++i) {
      const bool matches = option_matches(e.options[i], e.truth, truth);
      if (matches != (i == e.correct)) {
        throw ConfigError("question '" + e.id + "': option (" +
                          std::string(1, static_cast<char>('a' + i)) + ") " +
                          (matches ? "also matches" : "does not match") + " the ground truth " +
                          truth.describe());
      }
    }
  }
}

namespace {

// Options for a count: the truth and three nearby distractors, ascending.
std::pair<std::vector<std::string>, std::size_t> count_options(int truth, const std::string& unit) {
  std::set<int> values = {truth, truth + 1, truth + 2};
  values.insert(truth >= 1 ? truth - 1 : truth + 3);
  std::vector<std::string> options;
  std::size_t correct = 0;
  for (int v : values) {
    if (v == truth) correct = options.size();
    options.push_back(std::to_string(v) + " " + (v == 1 ? unit.substr(0, unit.size() - 1) : unit));
  }
  return {options, correct};
}

std::pair<std::vector<std::string>, std::size_t> name_options(
    const std::vector<std::string>& names, const std::string& truth, const std::string& prefix) {
  std::vector<std::string> options;
  std::size_t correct = 0;
  for (const auto& n : names) {
    if (n == truth) correct = options.size();
    options.push_back(prefix + n);
  }
  return {options, correct};
}

}  // namespace

QuestionBank make_default_bank(const dine::DecisionTrace& trace) {
  if (trace.records.size() < 11) {
    throw ConfigError("the default question bank needs a trace of at least 11 timesteps");
  }
  const GroundTruthOracle oracle(trace);
  const auto& records = trace.records;
  const int first = trace.first_timestep();
  const int last = trace.last_timestep();
  const auto& actions = records.front().dominance.actions;
  const auto& channels = records.front().dominance.channels;

  // Single-timestep questions prefer decisions with a clear dominant channel.
  std::vector<int> clear;
  for (const auto& r : records) {
    if (dine::dominance_margin(r) > 0.01) clear.push_back(r.timestep);
  }
  auto pick = [&](std::size_t k) {
    if (clear.empty()) return records[std::min<std::size_t>(records.size() - 1, 5 + 4 * k)].timestep;
    return clear[std::min(clear.size() - 1, (clear.size() * (2 * k + 1)) / 8)];
  };
  auto record_at = [&](int t) -> const dine::TimestepRecord& {
    return records[static_cast<std::size_t>(t - first)];
  };

  QuestionBank bank;
  bank.trace_id = trace.trace_id;
  auto add = [&](std::string id, QuestionStyle style, std::string text, GroundTruthSpec truth,
                 std::pair<std::vector<std::string>, std::size_t> options) {
    QuestionBankEntry e;
    e.id = std::move(id);
    e.style = style;
    e.text = std::move(text);
    e.truth = std::move(truth);
    e.options = std::move(options.first);
    e.correct = options.second;
    bank.entries.push_back(std::move(e));
  };
  auto spec = [](TruthKind kind, std::vector<int> ts, std::string subject = "") {
    GroundTruthSpec s;
    s.kind = kind;
    s.timesteps = std::move(ts);
    s.subject = std::move(subject);
    return s;
  };
  auto range = [](int a, int b) {
    std::vector<int> out;
    for (int t = a; t <= b; ++t) out.push_back(t);
    return out;
  };

  // The rarest chosen action makes the most telling single-decision question.
  std::map<std::string, int> frequency;
  for (const auto& r : records) ++frequency[r.chosen_action];
  int t1 = std::clamp(first + 5, first, last);
  for (const auto& r : records) {
    if (frequency[r.chosen_action] < frequency[record_at(t1).chosen_action]) t1 = r.timestep;
  }
  add("q1", QuestionStyle::kWhatWhich,
      "Which adaptation did the system choose at timestep " + std::to_string(t1) + "?",
      spec(TruthKind::kChosenAction, {t1}),
      name_options(actions, record_at(t1).chosen_action, ""));

  const int t2 = pick(0);
  const auto& r2 = record_at(t2);
  add("q2", QuestionStyle::kWhy,
      "Why did the system choose " + r2.chosen_action + " at timestep " + std::to_string(t2) + "?",
      spec(TruthKind::kDominantChannel, {t2}),
      name_options(channels, oracle.evaluate(spec(TruthKind::kDominantChannel, {t2})).name,
                   "Mainly to serve the reward channel "));

  const int t3 = pick(1);
  add("q3", QuestionStyle::kWhatWhich,
      "Which reward channel contributed most to the decision at timestep " + std::to_string(t3) +
          "?",
      spec(TruthKind::kDominantChannel, {t3}),
      name_options(channels, oracle.evaluate(spec(TruthKind::kDominantChannel, {t3})).name, ""));

  const int t4 = pick(3);
  const auto& r4 = record_at(t4);
  const std::string other = r4.chosen_action == actions.front() ? actions[1] : actions.front();
  add("q4", QuestionStyle::kWhy,
      "Why was " + r4.chosen_action + " chosen at timestep " + std::to_string(t4) +
          " rather than " + other + "?",
      spec(TruthKind::kDominantChannel, {t4}),
      name_options(channels, oracle.evaluate(spec(TruthKind::kDominantChannel, {t4})).name,
                   "Because of its expected effect on "));

  const auto all = range(first, last);
  const std::string span = "between timesteps " + std::to_string(first) + " and " +
                           std::to_string(last);
  const auto uncertain_all = oracle.evaluate(spec(TruthKind::kCountUncertain, all));
  add("q5", QuestionStyle::kHowMany, "How often " + span + " was the agent uncertain?",
      spec(TruthKind::kCountUncertain, all), count_options(uncertain_all.count, "times"));

  std::string frequent = actions.front();
  for (const auto& a : actions) {
    if (frequency[a] > frequency[frequent]) frequent = a;
  }
  const auto action_count = oracle.evaluate(spec(TruthKind::kCountAction, all, frequent));
  add("q6", QuestionStyle::kHowMany,
      "How many times " + span + " did the system choose " + frequent + "?",
      spec(TruthKind::kCountAction, all, frequent), count_options(action_count.count, "times"));

  const std::string channel = channels.size() > 1 ? channels[1] : channels.front();
  const auto dominant_count = oracle.evaluate(spec(TruthKind::kCountDominant, all, channel));
  add("q7", QuestionStyle::kHowMany,
      "How many decisions " + span + " were driven mainly by the " + channel + " channel?",
      spec(TruthKind::kCountDominant, all, channel),
      count_options(dominant_count.count, "decisions"));

  const int mid = first + (last - first) / 2;
  const auto late = range(mid, last);
  const auto uncertain_late = oracle.evaluate(spec(TruthKind::kCountUncertain, late));
  add("q8", QuestionStyle::kHowMany,
      "How many uncertain decisions did the agent make from timestep " + std::to_string(mid) +
          " to timestep " + std::to_string(last) + "?",
      spec(TruthKind::kCountUncertain, late), count_options(uncertain_late.count, "decisions"));

  check_bank_against(bank, oracle);
  return bank;
}

}  // namespace dinechat::eval
