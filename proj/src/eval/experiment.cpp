#include "dinechat/eval/experiment.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "dinechat/error.hpp"
#include "dinechat/eval/grader.hpp"
#include "dinechat/eval/metrics.hpp"

namespace dinechat::eval {
namespace {

using nlohmann::ordered_json;

std::string format_number(double v) {
  std::ostringstream ss;
  ss << std::setprecision(6) << v;
  return ss.str();
}

std::string fixed2(double v) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(2) << v;
  return ss.str();
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::vector<double> parse_doubles(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "': '" + item + "' is not a number");
    }
  }
  return out;
}

ordered_json question_to_json(const QuestionResult& q) {
  return {{"question_id", q.question_id}, {"truth", q.truth},   {"answers", q.answers},
          {"grades", q.grades},           {"rationales", q.rationales}};
}

QuestionResult question_from_json(const nlohmann::json& j) {
  QuestionResult q;
  q.question_id = j.at("question_id").get<std::string>();
  q.truth = j.at("truth").get<std::string>();
  q.answers = j.at("answers").get<std::vector<std::string>>();
  q.grades = j.at("grades").get<std::vector<int>>();
  q.rationales = j.at("rationales").get<std::vector<std::string>>();
  return q;
}

ordered_json cell_to_json(const CellResult& c) {
  ordered_json j;
  j["key"] = c.key.key();
  j["prompting"] = prompt::strategy_name(c.key.prompting);
  j["form"] = analyze::form_name(c.key.form);
  j["temperature"] = c.key.temperature;
  j["complete"] = c.complete;
  if (!c.error.empty()) j["error"] = c.error;
  if (c.complete) {
    j["fidelity"] = c.fidelity;
    j["stability"] = c.stability;
    j["sigma_all"] = c.sigma_all;
    j["stability_all"] = c.stability_all;
  }
  j["clusters"] = ordered_json::array();
  for (const auto& cl : c.clusters) {
    ordered_json cj;
    cj["top_p"] = cl.top_p;
    if (c.complete) {
      cj["fidelity"] = cl.fidelity;
      cj["sigma"] = cl.sigma;
      cj["stability"] = cl.stability;
      cj["repetition_fidelity"] = cl.repetition_fidelity;
    }
    cj["questions"] = ordered_json::array();
    for (const auto& q : cl.questions) cj["questions"].push_back(question_to_json(q));
    j["clusters"].push_back(cj);
  }
  return j;
}

CellResult cell_from_json(const nlohmann::json& j) {
  CellResult c;
  c.key.prompting = prompt::parse_strategy(j.at("prompting").get<std::string>());
  c.key.form = analyze::parse_form(j.at("form").get<std::string>());
  c.key.temperature = j.at("temperature").get<double>();
  c.complete = j.at("complete").get<bool>();
  c.error = j.value("error", "");
  for (const auto& cj : j.at("clusters")) {
    ClusterResult cl;
    cl.top_p = cj.at("top_p").get<double>();
    for (const auto& q : cj.at("questions")) cl.questions.push_back(question_from_json(q));
    c.clusters.push_back(std::move(cl));
  }
  if (c.complete) aggregate(c);
  return c;
}

llm::CompletionParams params_for(const ExperimentConfig& config, const CellKey& key, double top_p) {
  llm::CompletionParams p;
  p.n = config.n;
  p.max_tokens = config.max_tokens;
  p.temperature = key.temperature;
  p.top_p = top_p;
  p.model = config.model;
  return p;
}

// Collects `count` graded answers to one question, in calls of at most n.
QuestionResult ask_repeatedly(const ExperimentSetup& setup, llm::LlmGateway& gateway,
                              const GroundTruthOracle& oracle, const QuestionBankEntry& entry,
                              const CellKey& key, double top_p, int count) {
  const auto& config = setup.config;
  const auto question = entry.spec(key.form);
  llm::CompletionParams params = params_for(config, key, top_p);
  analyze::DeterministicExtractor extractor;
  const auto prepared =
      explain::prepare(setup.pipeline, setup.trace, question, key.prompting, params, extractor);

  QuestionResult result;
  result.question_id = entry.id;
  result.truth = key.form == analyze::QuestionForm::kClosed
                     ? std::string("(") + prompt::option_letter(entry.correct) + ")"
                     : oracle.evaluate(entry.truth).describe();
  int remaining = count;
  while (remaining > 0) {
    params.n = std::min(config.n, remaining);
    remaining -= params.n;
    if (prepared.chain_of_thought) {
      const auto outcome = explain::run_chain_of_thought(gateway, prepared.cot, params);
      for (std::size_t i = 0; i < outcome.answers.size(); ++i) {
        if (outcome.answers[i]) {
          const Grade g = grade(*outcome.answers[i], entry, key.form, oracle);
          result.answers.push_back(*outcome.answers[i]);
          result.grades.push_back(g.value);
          result.rationales.push_back(g.rationale);
        } else {
          result.answers.push_back(outcome.stage1_replies[i]);
          result.grades.push_back(0);
          result.rationales.push_back("unparseable stage-1 timestep list");
        }
      }
    } else {
      const auto completion = gateway.chat_complete(prepared.sequence, params);
      for (const auto& answer : completion.responses) {
        const Grade g = grade(answer, entry, key.form, oracle);
        result.answers.push_back(answer);
        result.grades.push_back(g.value);
        result.rationales.push_back(g.rationale);
      }
    }
  }
  return result;
}

std::optional<CellResult> load_finished_cell(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  if (lines.size() < 2) return std::nullopt;
  try {
    const auto marker = nlohmann::json::parse(lines.back());
    if (marker.value("kind", "") != "complete") return std::nullopt;
    return cell_from_json(nlohmann::json::parse(lines.front()).at("cell"));
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

void write_cell(const std::filesystem::path& path, const CellResult& cell) {
  std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + tmp + "'");
    out << ordered_json{{"kind", "cell"}, {"cell", cell_to_json(cell)}}.dump() << '\n';
    if (cell.complete) out << ordered_json{{"kind", "complete"}}.dump() << '\n';
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

int ExperimentConfig::repetitions_per_cluster() const {
  return top_p_clusters.empty() ? 0 : repetitions / static_cast<int>(top_p_clusters.size());
}

void ExperimentConfig::validate() const {
  if (promptings.empty() || forms.empty() || temperatures.empty() || top_p_clusters.empty()) {
    throw ConfigError("experiment grid needs at least one prompting, form, temperature and top_p");
  }
  const int clusters = static_cast<int>(top_p_clusters.size());
  if (repetitions % clusters != 0) {
    throw ConfigError("repetitions (" + std::to_string(repetitions) +
                      ") must divide evenly across " + std::to_string(clusters) + " clusters");
  }
  if (repetitions_per_cluster() < 2) {
    throw ConfigError("each cluster needs at least two repetitions to measure stability");
  }
  if (n < 1 || n > repetitions_per_cluster()) {
    throw ConfigError("n must be between 1 and the repetitions per cluster (" +
                      std::to_string(repetitions_per_cluster()) + ")");
  }
  for (double t : temperatures) {
    if (t < 0.0 || t > 2.0) throw ConfigError("temperature must lie in [0, 2]");
  }
  for (double p : top_p_clusters) {
    if (!(p > 0.0 && p <= 1.0)) throw ConfigError("top_p must lie in (0, 1]");
  }
  if (max_tokens < 1) throw ConfigError("max_token must be positive");
}

ExperimentConfig ExperimentConfig::from_config(const KeyValueConfig& c) {
  ExperimentConfig e;
  if (auto v = c.get("eval.promptings")) {
    e.promptings.clear();
    for (const auto& s : split_list(*v)) e.promptings.push_back(prompt::parse_strategy(s));
  }
  if (auto v = c.get("eval.forms")) {
    e.forms.clear();
    for (const auto& s : split_list(*v)) e.forms.push_back(analyze::parse_form(s));
  }
  if (auto v = c.get("eval.temperatures")) e.temperatures = parse_doubles("eval.temperatures", *v);
  if (auto v = c.get("eval.top_p")) e.top_p_clusters = parse_doubles("eval.top_p", *v);
  e.repetitions = static_cast<int>(c.get_int("eval.repetitions", e.repetitions));
  e.n = static_cast<int>(c.get_int("eval.n", e.n));
  e.max_tokens = static_cast<int>(c.get_int("llm.max_token", e.max_tokens));
  e.model = c.get_string("llm.model", e.model);
  e.backend = c.get_string("eval.backend", e.backend);
  e.validate();
  return e;
}

ordered_json config_to_json(const ExperimentConfig& c) {
  std::vector<std::string> promptings;
  for (auto p : c.promptings) promptings.emplace_back(prompt::strategy_name(p));
  std::vector<std::string> forms;
  for (auto f : c.forms) forms.emplace_back(analyze::form_name(f));
  return {{"promptings", promptings},     {"forms", forms},
          {"temperatures", c.temperatures}, {"top_p", c.top_p_clusters},
          {"repetitions", c.repetitions}, {"n", c.n},
          {"max_token", c.max_tokens},    {"model", c.model},
          {"backend", c.backend}};
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  c.promptings.clear();
  for (const auto& p : j.at("promptings")) c.promptings.push_back(prompt::parse_strategy(p.get<std::string>()));
  c.forms.clear();
  for (const auto& f : j.at("forms")) c.forms.push_back(analyze::parse_form(f.get<std::string>()));
  c.temperatures = j.at("temperatures").get<std::vector<double>>();
  c.top_p_clusters = j.at("top_p").get<std::vector<double>>();
  c.repetitions = j.at("repetitions").get<int>();
  c.n = j.at("n").get<int>();
  c.max_tokens = j.at("max_token").get<int>();
  c.model = j.at("model").get<std::string>();
  c.backend = j.value("backend", c.backend);
  c.validate();
  return c;
}

std::string CellKey::key() const {
  return std::string(prompt::strategy_name(prompting)) + "_" + std::string(analyze::form_name(form)) +
         "_t" + format_number(temperature);
}

void aggregate(CellResult& cell) {
  std::vector<double> all;
  std::vector<double> stabilities;
  for (auto& cl : cell.clusters) {
    if (cl.questions.empty()) throw ConfigError("cluster without questions in cell " + cell.key.key());
    const std::size_t reps = cl.questions.front().grades.size();
    cl.repetition_fidelity.assign(reps, 0.0);
    for (std::size_t r = 0; r < reps; ++r) {
      std::vector<int> column;
      for (const auto& q : cl.questions) {
        if (q.grades.size() != reps) {
          throw ConfigError("question '" + q.question_id + "' has a different repetition count");
        }
        column.push_back(q.grades[r]);
      }
      cl.repetition_fidelity[r] = compute_fidelity(column);
    }
    cl.fidelity = mean(cl.repetition_fidelity);
    cl.sigma = population_stddev(cl.repetition_fidelity);
    cl.stability = compute_stability(cl.repetition_fidelity);
    stabilities.push_back(cl.stability);
    all.insert(all.end(), cl.repetition_fidelity.begin(), cl.repetition_fidelity.end());
  }
  if (all.empty()) return;
  cell.fidelity = mean(all);
  cell.stability = mean(stabilities);
  cell.sigma_all = population_stddev(all);
  cell.stability_all = 1.0 - cell.sigma_all;
}

bool ExperimentReport::complete() const {
  const std::size_t expected =
      config.promptings.size() * config.forms.size() * config.temperatures.size();
  if (cells.size() != expected) return false;
  for (const auto& c : cells) {
    if (!c.complete) return false;
  }
  return true;
}

ordered_json report_to_json(const ExperimentReport& report) {
  ordered_json j;
  j["experiment_id"] = report.experiment_id;
  j["complete"] = report.complete();
  j["config"] = config_to_json(report.config);
  j["cells"] = ordered_json::array();
  for (const auto& c : report.cells) j["cells"].push_back(cell_to_json(c));
  j["reference"] = reference_to_json(report.reference);
  return j;
}

ExperimentReport report_from_json(const nlohmann::json& j) {
  ExperimentReport r;
  try {
    r.experiment_id = j.at("experiment_id").get<std::string>();
    r.config = config_from_json(j.at("config"));
    for (const auto& c : j.at("cells")) r.cells.push_back(cell_from_json(c));
    r.reference = reference_from_json(j.at("reference"));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed experiment report: ") + e.what());
  }
  return r;
}

ReportFormat parse_report_format(std::string_view name) {
  if (name == "table") return ReportFormat::kTable;
  if (name == "json") return ReportFormat::kJson;
  throw ConfigError("report format must be 'table' or 'json'");
}

std::string render_report(const ExperimentReport& report, ReportFormat format) {
  if (format == ReportFormat::kJson) return report_to_json(report).dump(2) + "\n";

  const auto& config = report.config;
  std::ostringstream out;
  out << "Experiment " << (report.experiment_id.empty() ? "-" : report.experiment_id)
      << ": fidelity / stability per temperature\n";
  out << std::left << std::setw(12) << "prompting" << std::setw(8) << "form";
  for (double t : config.temperatures) {
    out << "| " << std::setw(12) << ("t=" + format_number(t));
  }
  out << "| reference\n";

  for (auto prompting : config.promptings) {
    for (auto form : config.forms) {
      std::vector<const CellResult*> row;
      for (double t : config.temperatures) {
        const CellResult* found = nullptr;
        for (const auto& c : report.cells) {
          if (c.key.prompting == prompting && c.key.form == form && c.key.temperature == t) {
            found = &c;
          }
        }
        row.push_back(found);
      }
      bool any = false;
      for (const auto* c : row) any = any || c != nullptr;
      if (!any) continue;
      out << std::setw(12) << prompt::strategy_name(prompting) << std::setw(8)
          << analyze::form_name(form);
      for (const auto* c : row) {
        std::string cell = "-";
        if (c != nullptr) cell = c->complete ? fixed2(c->fidelity) + " / " + fixed2(c->stability)
                                             : "incomplete";
        out << "| " << std::setw(12) << cell;
      }
      const auto* ref = report.reference.find(std::string(prompt::strategy_name(prompting)),
                                              std::string(analyze::form_name(form)));
      out << "| " << (ref ? fixed2(ref->fidelity) + " / " + fixed2(ref->stability) : "-") << "\n";
    }
  }

  bool any_cell = false;
  for (const auto& c : report.cells) any_cell = any_cell || c.complete;
  if (any_cell) {
    out << "\nstability over all repetitions (1 - sigma):\n";
    for (const auto& c : report.cells) {
      if (c.complete) {
        out << "  " << std::setw(28) << c.key.key() << fixed2(c.stability_all) << "\n";
      }
    }
  }
  for (const auto& c : report.cells) {
    if (!c.complete && !c.error.empty()) out << "  " << c.key.key() << ": " << c.error << "\n";
  }

  const auto& ref = report.reference;
  if (!ref.cells.empty()) {
    const auto& f = ref.form_comparison;
    out << "\nreference: open vs closed questions: fidelity " << fixed2(f.open_fidelity) << " vs "
        << fixed2(f.closed_fidelity) << ", stability " << fixed2(f.open_stability) << " vs "
        << fixed2(f.closed_stability);
    if (!f.note.empty()) out << " (" << f.note << ")";
    out << "\nreference effectiveness: " << std::lround(ref.all_correct_effectiveness * 100.0)
        << "% of study participants answered every question correctly";
    if (!ref.effectiveness_note.empty()) out << " (" << ref.effectiveness_note << ")";
    out << "\n";
    if (!ref.source.empty()) out << "reference source: " << ref.source << "\n";
  }
  return out.str();
}

ExperimentReport run_experiment(const ExperimentSetup& setup, llm::LlmGateway& gateway,
                                const ProgressFn& progress) {
  setup.config.validate();
  setup.bank.validate();
  const GroundTruthOracle oracle(setup.trace);
  check_bank_against(setup.bank, oracle);

  ExperimentReport report;
  report.experiment_id = setup.experiment_id;
  report.config = setup.config;
  report.reference = setup.reference;
  const auto cell_dir = setup.directory / "cells";
  std::filesystem::create_directories(cell_dir);
  {
    std::ofstream cfg(setup.directory / "config.json");
    cfg << config_to_json(setup.config).dump(2) << '\n';
  }

  const int reps = setup.config.repetitions_per_cluster();
  for (auto prompting : setup.config.promptings) {
    for (auto form : setup.config.forms) {
      for (double temperature : setup.config.temperatures) {
        CellKey key{prompting, form, temperature};
        const auto path = cell_dir / (key.key() + ".jsonl");
        if (auto done = load_finished_cell(path)) {
          report.cells.push_back(std::move(*done));
          if (progress) progress(report.cells.back());
          continue;
        }
        CellResult cell;
        cell.key = key;
        try {
          for (double top_p : setup.config.top_p_clusters) {
            ClusterResult cluster;
            cluster.top_p = top_p;
            for (const auto& entry : setup.bank.entries) {
              cluster.questions.push_back(
                  ask_repeatedly(setup, gateway, oracle, entry, key, top_p, reps));
            }
            cell.clusters.push_back(std::move(cluster));
          }
          cell.complete = true;
          aggregate(cell);
        } catch (const Error& e) {
          cell.complete = false;
          cell.error = e.what();
          std::clog << "[eval] cell " << key.key() << " incomplete: " << e.what() << '\n';
        }
        write_cell(path, cell);
        report.cells.push_back(std::move(cell));
        if (progress) progress(report.cells.back());
      }
    }
  }
  std::ofstream out(setup.directory / "report.json");
  out << report_to_json(report).dump(2) << '\n';
  return report;
}

}  // namespace dinechat::eval
