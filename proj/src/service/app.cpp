#include "dinechat/service/app.hpp"

#include <cmath>
#include <fstream>
#include <iostream>

#include "dinechat/dine/encode.hpp"
#include "dinechat/error.hpp"
#include "dinechat/eval/grader.hpp"
#include "dinechat/eval/ground_truth.hpp"
#include "dinechat/eval/question_bank.hpp"
#include "dinechat/llm/backend.hpp"
#include "dinechat/llm/clock.hpp"

namespace dinechat::service {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

HttpResult reply(int status, const ordered_json& body) { return {status, body.dump(), {}}; }

HttpResult error_reply(int status, const std::string& message, ordered_json extra = {}) {
  ordered_json body{{"error", message}};
  if (extra.is_object()) {
    for (auto it = extra.begin(); it != extra.end(); ++it) body[it.key()] = it.value();
  }
  return reply(status, body);
}

// Maps library errors onto HTTP statuses.
HttpResult from_exception(const std::exception& e) {
  if (const auto* big = dynamic_cast<const llm::PromptTooLargeError*>(&e)) {
    return error_reply(422, big->what(),
                       {{"prompt_tokens", big->prompt_tokens()},
                        {"max_token", big->max_tokens()},
                        {"total_tokens", big->prompt_tokens() + big->max_tokens()},
                        {"limit", big->cap()}});
  }
  if (const auto* limited = dynamic_cast<const llm::RateLimitedError*>(&e)) {
    const long seconds = std::max(1L, static_cast<long>(std::ceil(limited->retry_after())));
    auto r = error_reply(429, limited->what(), {{"retry_after", seconds}});
    r.headers["Retry-After"] = std::to_string(seconds);
    return r;
  }
  if (dynamic_cast<const BudgetError*>(&e) || dynamic_cast<const OutOfRangeError*>(&e)) {
    return error_reply(422, e.what());
  }
  if (dynamic_cast<const NotFoundError*>(&e)) return error_reply(404, e.what());
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const json::exception*>(&e)) {
    return error_reply(400, e.what());
  }
  if (dynamic_cast<const llm::CredentialError*>(&e)) return error_reply(503, e.what());
  if (dynamic_cast<const llm::GatewayError*>(&e)) return error_reply(502, e.what());
  return error_reply(500, e.what());
}

template <typename Fn>
HttpResult guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    return from_exception(e);
  }
}

int parse_int_param(const std::string& name, const std::string& value) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(value, &used);
    if (used == value.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("query parameter '" + name + "' must be an integer");
}

llm::CompletionParams merge_params(llm::CompletionParams p, const json& overrides) {
  if (!overrides.is_object()) throw ConfigError("params must be an object");
  for (auto it = overrides.begin(); it != overrides.end(); ++it) {
    const auto& k = it.key();
    if (k == "n") {
      p.n = it->get<int>();
    } else if (k == "max_token" || k == "max_tokens") {
      p.max_tokens = it->get<int>();
    } else if (k == "temperature") {
      p.temperature = it->get<double>();
    } else if (k == "top_p") {
      p.top_p = it->get<double>();
    } else if (k == "model") {
      p.model = it->get<std::string>();
    } else {
      throw ConfigError("unknown completion parameter '" + k + "'");
    }
  }
  p.validate();
  return p;
}

}  // namespace

json prompts_to_json(const std::vector<prompt::PromptSequence>& sent) {
  json out = json::array();
  for (const auto& seq : sent) {
    json messages = json::array();
    for (const auto& m : seq.messages) {
      messages.push_back({{"role", prompt::role_name(m.role)}, {"text", m.text}});
    }
    out.push_back({{"strategy", prompt::strategy_name(seq.strategy)},
                   {"question_type", prompt::question_type_name(seq.question_type)},
                   {"stages", seq.stages},
                   {"stage", seq.stage},
                   {"messages", messages}});
  }
  return out;
}

ExplanationService::ExplanationService(ServiceOptions options,
                                       std::shared_ptr<llm::LlmGateway> ask_gateway,
                                       BackendFactory experiment_backends)
    : options_(std::move(options)),
      ask_gateway_(std::move(ask_gateway)),
      experiment_backends_(std::move(experiment_backends)),
      traces_(options_.data_dir),
      sessions_(options_.data_dir) {
  if (!ask_gateway_) throw ConfigError("service needs a gateway");
  std::filesystem::create_directories(options_.data_dir / "experiments");
}

ExplanationService::~ExplanationService() { wait_for_experiments(); }

HttpResult ExplanationService::health() const {
  return reply(200, {{"status", "ok"}, {"version", kVersion}});
}

HttpResult ExplanationService::create_session() {
  return guarded([&] {
    const std::string id = sessions_.create();
    const auto session = sessions_.load(id);
    return reply(201, {{"session_id", id}, {"created_at", session.value("created_at", "")}});
  });
}

HttpResult ExplanationService::get_session(const std::string& session_id) const {
  return guarded([&] { return HttpResult{200, sessions_.load(session_id).dump(), {}}; });
}

HttpResult ExplanationService::ask(const std::string& session_id, const std::string& body) {
  return guarded([&] {
    if (!sessions_.exists(session_id)) throw NotFoundError("unknown session '" + session_id + "'");
    const json request = json::parse(body);
    if (!request.is_object()) throw ConfigError("ask request must be a JSON object");

    analyze::QuestionSpec question;
    question.text = request.value("question", "");
    question.form = analyze::parse_form(request.value("form", "open"));
    if (request.contains("options")) {
      question.options = request.at("options").get<std::vector<std::string>>();
    }
    question.validate();
    const auto strategy = prompt::parse_strategy(request.value("strategy", "engineered"));
    std::string trace_id = request.value("trace_id", options_.default_trace_id);
    if (trace_id.empty()) throw ConfigError("no trace_id given and no default trace configured");
    llm::CompletionParams params = options_.default_params;
    if (request.contains("params")) params = merge_params(params, request.at("params"));

    const auto trace = traces_.load(trace_id);
    std::unique_ptr<analyze::TimestepExtractor> extractor;
    if (options_.extractor == "llm") {
      extractor = std::make_unique<analyze::LlmExtractor>(*ask_gateway_, params);
    } else {
      extractor = std::make_unique<analyze::DeterministicExtractor>();
    }
    const auto prepared =
        explain::prepare(options_.pipeline, trace, question, strategy, params, *extractor);
    const auto outcome = explain::execute(*ask_gateway_, prepared, params);

    ordered_json response;
    response["answer"] = outcome.answers.front();
    response["answers"] = outcome.answers;
    response["question_type"] = prompt::question_type_name(prepared.analysis.type);
    response["timesteps"] = prepared.analysis.timesteps;
    response["defaulted"] = prepared.analysis.defaulted;
    response["trace_id"] = trace_id;
    response["strategy"] = prompt::strategy_name(strategy);
    response["chain_of_thought"] = prepared.chain_of_thought;
    if (outcome.stage1_list) response["stage1_timesteps"] = *outcome.stage1_list;
    response["dines"] = prepared.selection.json;
    response["dines_dropped"] = prepared.selection.dropped;
    response["q_values_dropped"] = prepared.selection.q_values_dropped;
    response["prompts"] = prompts_to_json(outcome.sent);
    response["usage"] = {{"prompt_tokens", outcome.usage.prompt_tokens},
                         {"completion_tokens", outcome.usage.completion_tokens},
                         {"total_tokens", outcome.usage.total()}};

    if (request.contains("truth") || request.contains("correct")) {
      ordered_json grades = ordered_json::array();
      if (question.form == analyze::QuestionForm::kClosed) {
        const std::string letter = request.at("correct").get<std::string>();
        eval::QuestionBankEntry entry;
        entry.options = question.options;
        if (letter.size() != 1 || letter[0] < 'a' ||
            static_cast<std::size_t>(letter[0] - 'a') >= question.options.size()) {
          throw ConfigError("correct must name one of the option letters");
        }
        entry.correct = static_cast<std::size_t>(letter[0] - 'a');
        for (const auto& a : outcome.answers) {
          const auto g = eval::grade_closed(a, entry);
          grades.push_back({{"grade", g.value}, {"rationale", g.rationale}});
        }
      } else {
        const auto spec = eval::spec_from_json(request.at("truth"));
        const auto truth = eval::evaluate_truth(spec, trace.records);
        for (const auto& a : outcome.answers) {
          const auto g = eval::grade_open(a, spec, truth);
          grades.push_back({{"grade", g.value}, {"rationale", g.rationale}});
        }
      }
      response["grading"] = grades;
    }
    sessions_.append(session_id, request, response);
    return reply(200, response);
  });
}

HttpResult ExplanationService::list_traces() const {
  return guarded([&] {
    ordered_json list = ordered_json::array();
    for (const auto& id : traces_.list()) {
      const auto t = traces_.load(id);
      list.push_back({{"trace_id", id},
                      {"description", t.description},
                      {"steps", t.records.size()},
                      {"first_timestep", t.records.empty() ? 0 : t.first_timestep()},
                      {"last_timestep", t.records.empty() ? 0 : t.last_timestep()}});
    }
    return reply(200, {{"traces", list}});
  });
}

HttpResult ExplanationService::trace_dines(const std::string& trace_id,
                                           const std::optional<std::string>& from,
                                           const std::optional<std::string>& to) const {
  return guarded([&] {
    const auto trace = traces_.load(trace_id);
    if (trace.records.empty()) return HttpResult{200, "[]", {}};
    const int a = from ? parse_int_param("from", *from) : trace.first_timestep();
    const int b = to ? parse_int_param("to", *to) : trace.last_timestep();
    if (b < a) throw ConfigError("'to' must not be smaller than 'from'");
    std::vector<int> ts;
    for (int t = a; t <= b; ++t) ts.push_back(t);
    const auto records = dine::slice(trace, ts);
    // Always an array, even for a single timestep.
    std::string body = dine::encode_dines(records, dine::all_kinds());
    if (records.size() == 1) body = "[" + body + "]";
    return HttpResult{200, body, {}};
  });
}

HttpResult ExplanationService::start_experiment(const std::string& body) {
  return guarded([&] {
    json request = body.empty() ? json::object() : json::parse(body);
    if (!request.is_object()) throw ConfigError("experiment request must be a JSON object");
    const std::string trace_id = request.value("trace_id", options_.default_trace_id);
    request.erase("trace_id");
    json merged = eval::config_to_json(options_.experiment_defaults);
    for (auto it = request.begin(); it != request.end(); ++it) {
      if (!merged.contains(it.key())) throw ConfigError("unknown experiment field '" + it.key() + "'");
      merged[it.key()] = it.value();
    }
    auto config = eval::config_from_json(merged);
    auto trace = traces_.load(trace_id);
    auto backend = experiment_backends_(config.backend);

    std::string id;
    {
      std::lock_guard guard(experiments_mutex_);
      do {
        id = "exp-" + std::to_string(next_experiment_++);
      } while (experiments_.count(id) ||
               std::filesystem::exists(options_.data_dir / "experiments" / id));
      experiments_[id] = std::make_unique<Experiment>();
    }
    Experiment* exp = nullptr;
    {
      std::lock_guard guard(experiments_mutex_);
      exp = experiments_.at(id).get();
    }
    exp->cells_total = static_cast<int>(config.promptings.size() * config.forms.size() *
                                        config.temperatures.size());

    eval::ExperimentSetup setup;
    setup.experiment_id = id;
    setup.config = config;
    setup.pipeline = options_.pipeline;
    setup.bank = options_.bank_path.empty() ? eval::make_default_bank(trace)
                                            : eval::load_bank(options_.bank_path);
    setup.trace = std::move(trace);
    setup.reference = options_.reference;
    setup.directory = options_.data_dir / "experiments" / id;

    llm::GatewayOptions gw = ask_gateway_->options();
    gw.wait_for_budget = true;
    std::shared_ptr<llm::LlmGateway> gateway;
    if (config.backend == "live") {
      gateway = std::make_shared<llm::LlmGateway>(backend, gw, std::make_shared<llm::SystemClock>(),
                                                  ask_gateway_->shared_budget());
    } else {
      gateway = std::make_shared<llm::LlmGateway>(backend, gw, std::make_shared<llm::SimulatedClock>());
    }

    exp->worker = std::thread([exp, setup = std::move(setup), gateway] {
      try {
        auto report = eval::run_experiment(setup, *gateway, [exp](const eval::CellResult&) {
          exp->cells_done.fetch_add(1);
        });
        std::lock_guard guard(exp->mutex);
        exp->report = std::move(report);
      } catch (const std::exception& e) {
        std::lock_guard guard(exp->mutex);
        exp->error = e.what();
        std::clog << "[service] experiment " << setup.experiment_id << " failed: " << e.what()
                  << '\n';
      }
      exp->finished = true;
    });
    return reply(202, {{"experiment_id", id},
                       {"status", "running"},
                       {"cells_total", exp->cells_total}});
  });
}

HttpResult ExplanationService::experiment_report(const std::string& experiment_id) const {
  return guarded([&] {
    Experiment* exp = nullptr;
    {
      std::lock_guard guard(experiments_mutex_);
      auto it = experiments_.find(experiment_id);
      if (it != experiments_.end()) exp = it->second.get();
    }
    if (exp == nullptr) {
      // Finished before a restart.
      const auto path = options_.data_dir / "experiments" / experiment_id / "report.json";
      if (experiment_id.find('/') != std::string::npos || experiment_id.find("..") != std::string::npos ||
          !std::filesystem::exists(path)) {
        throw NotFoundError("unknown experiment '" + experiment_id + "'");
      }
      std::ifstream in(path);
      const auto report = eval::report_from_json(json::parse(in));
      if (!report.complete()) {
        return reply(409, {{"experiment_id", experiment_id}, {"status", "incomplete"}});
      }
      return reply(200, eval::report_to_json(report));
    }
    if (!exp->finished) {
      return reply(409, {{"experiment_id", experiment_id},
                         {"status", "running"},
                         {"cells_done", exp->cells_done.load()},
                         {"cells_total", exp->cells_total}});
    }
    std::lock_guard guard(exp->mutex);
    if (!exp->report) {
      return reply(409, {{"experiment_id", experiment_id}, {"status", "failed"}, {"error", exp->error}});
    }
    if (!exp->report->complete()) {
      ordered_json errors = ordered_json::array();
      for (const auto& c : exp->report->cells) {
        if (!c.complete) errors.push_back({{"cell", c.key.key()}, {"error", c.error}});
      }
      return reply(409, {{"experiment_id", experiment_id}, {"status", "incomplete"}, {"errors", errors}});
    }
    return reply(200, eval::report_to_json(*exp->report));
  });
}

void ExplanationService::wait_for_experiments() {
  std::vector<Experiment*> running;
  {
    std::lock_guard guard(experiments_mutex_);
    for (auto& [id, exp] : experiments_) running.push_back(exp.get());
  }
  for (auto* exp : running) {
    if (exp->worker.joinable()) exp->worker.join();
  }
}

}  // namespace dinechat::service
