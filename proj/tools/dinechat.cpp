#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dinechat/dine/encode.hpp"
#include "dinechat/dine/rollout.hpp"
#include "dinechat/dine/trace_store.hpp"
#include "dinechat/error.hpp"
#include "dinechat/eval/experiment.hpp"
#include "dinechat/eval/question_bank.hpp"
#include "dinechat/explain/pipeline.hpp"
#include "dinechat/llm/clock.hpp"
#include "dinechat/llm/gateway.hpp"
#include "dinechat/rl/checkpoint.hpp"
#include "dinechat/rl/trainer.hpp"
#include "dinechat/service/app.hpp"
#include "dinechat/service/http_server.hpp"
#include "dinechat/service/setup.hpp"

namespace {

using namespace dinechat;

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(' ');
    const auto e = item.find_last_not_of(' ');
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
}

std::shared_ptr<llm::Clock> clock_for(const std::string& backend) {
  if (backend == "live") return std::make_shared<llm::SystemClock>();
  return std::make_shared<llm::SimulatedClock>();
}

service::HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server != nullptr) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explainable autoscaling agent: training, DINE traces, chat explanations and "
               "evaluation."};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);

  // train
  auto* train = app.add_subcommand("train", "Train the decomposed Double DQN agent");
  int episodes = 200;
  long long train_seed = -1;
  std::string checkpoint_out;
  std::string log_out;
  train->add_option("--episodes", episodes, "training episodes")->check(CLI::PositiveNumber);
  train->add_option("--seed", train_seed, "agent seed (default: agent.seed)");
  train->add_option("--out", checkpoint_out, "checkpoint file to write")->required();
  train->add_option("--log", log_out, "per-episode JSONL log");

  // rollout
  auto* rollout = app.add_subcommand("rollout", "Record a greedy rollout with DINEs");
  std::string checkpoint_in;
  int steps = 21;
  long long rollout_seed = 0;
  std::string trace_out;
  std::string trace_id;
  std::string trace_description;
  rollout->add_option("--checkpoint", checkpoint_in, "trained checkpoint")->required();
  rollout->add_option("--steps", steps, "decisions to record")->check(CLI::PositiveNumber);
  rollout->add_option("--seed", rollout_seed, "environment seed");
  int warmup = 0;
  rollout->add_option("--warmup", warmup, "greedy steps before recording starts")
      ->check(CLI::NonNegativeNumber);
  rollout->add_option("--out-trace", trace_out, "trace JSONL to write")->required();
  rollout->add_option("--trace-id", trace_id, "trace id (default: file stem)");
  rollout->add_option("--description", trace_description, "free-text trace description");

  // dines export
  auto* dines = app.add_subcommand("dines", "DINE utilities");
  dines->require_subcommand(1);
  auto* dines_export = dines->add_subcommand("export", "Print DINE JSON for a timestep range");
  std::string trace_spec;
  std::optional<int> from_t;
  std::optional<int> to_t;
  std::string kinds_text;
  std::string dines_out;
  dines_export->add_option("--trace", trace_spec, "trace file or id in the data dir")->required();
  dines_export->add_option("--from", from_t, "first timestep");
  dines_export->add_option("--to", to_t, "last timestep");
  dines_export->add_option("--kinds", kinds_text,
                           "comma list of state,action,q_values,reward,dominance,uncertainty");
  dines_export->add_option("--out", dines_out, "write to file instead of stdout");

  // ask
  auto* ask = app.add_subcommand("ask", "Ask a question about the agent's decisions");
  std::string question_text;
  bool closed = false;
  std::string options_text;
  std::string strategy_text = "engineered";
  std::string backend_name;
  bool show_prompts = false;
  ask->add_option("--trace", trace_spec, "trace file or id (default: data.trace)");
  ask->add_option("--question", question_text, "question text")->required();
  ask->add_flag("--closed", closed, "closed question with --options");
  ask->add_option("--options", options_text, "comma-separated answer options");
  ask->add_option("--strategy", strategy_text, "engineered or zero_shot")
      ->check(CLI::IsMember({"engineered", "zero_shot"}));
  ask->add_option("--backend", backend_name, "live, mock or oracle (default: llm.backend)")
      ->check(CLI::IsMember({"live", "mock", "oracle"}));
  ask->add_flag("--show-prompts", show_prompts, "print the prompt sequence sent");

  // eval run
  auto* eval_cmd = app.add_subcommand("eval", "Experiment grid");
  eval_cmd->require_subcommand(1);
  auto* eval_run = eval_cmd->add_subcommand("run", "Run the fidelity/stability grid");
  std::string experiment_id = "default";
  std::string format_text = "table";
  std::string bank_path;
  eval_run->add_option("--config", config_path, "key = value config file")
      ->check(CLI::ExistingFile);
  eval_run->add_option("--backend", backend_name, "live, mock or oracle (default: eval.backend)")
      ->check(CLI::IsMember({"live", "mock", "oracle"}));
  eval_run->add_option("--experiment-id", experiment_id, "results go to <data>/experiments/<id>");
  eval_run->add_option("--trace", trace_spec, "trace file or id (default: data.trace)");
  eval_run->add_option("--bank", bank_path, "question bank JSON (default: data.bank)");
  eval_run->add_option("--format", format_text, "table or json")
      ->check(CLI::IsMember({"table", "json"}));

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  int port = 8080;
  std::string host = "127.0.0.1";
  std::string data_dir_flag;
  serve->add_option("--port", port, "TCP port (0 picks one)")->check(CLI::Range(0, 65535));
  serve->add_option("--host", host, "bind address");
  serve->add_option("--data-dir", data_dir_flag, "directory with traces/, sessions/, experiments/");
  serve->add_option("--backend", backend_name, "chat backend for asks")
      ->check(CLI::IsMember({"live", "mock", "oracle"}));

  // bank generate
  auto* bank = app.add_subcommand("bank", "Question bank utilities");
  bank->require_subcommand(1);
  auto* bank_generate = bank->add_subcommand("generate", "Build the default question bank");
  std::string bank_out;
  bank_generate->add_option("--trace", trace_spec, "trace file or id")->required();
  bank_generate->add_option("--out", bank_out, "bank JSON to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const auto config = service::AppConfig::load(config_path);
    const auto& values = config.values;
    const auto data_dir = data_dir_flag.empty() ? config.path("data.dir", ".")
                                                : std::filesystem::path(data_dir_flag);
    auto trace_or_default = [&] {
      return trace_spec.empty() ? values.get_string("data.trace", "reference") : trace_spec;
    };

    if (*train) {
      const auto env_cfg = sim::EnvConfig::from_config(values);
      auto agent_cfg = rl::AgentConfig::from_config(values);
      if (train_seed >= 0) agent_cfg.seed = static_cast<std::uint64_t>(train_seed);
      const auto workload = service::workload_from_config(config);
      const auto result = rl::train(env_cfg, workload, episodes, agent_cfg);
      rl::save_checkpoint(result.agent, checkpoint_out);
      if (!log_out.empty()) {
        std::ofstream log(log_out);
        rl::write_training_log(result.log, log);
      }
      std::cout << "trained " << episodes << " episodes; mean return of last "
                << std::min<std::size_t>(20, result.log.size()) << ": "
                << rl::mean_tail_return(result.log, 20) << "\ncheckpoint: " << checkpoint_out
                << "\n";
      return 0;
    }

    if (*rollout) {
      const auto agent = rl::load_checkpoint(checkpoint_in);
      const auto workload = service::workload_from_config(config);
      dine::RolloutOptions options;
      options.steps = steps;
      options.warmup = warmup;
      options.seed = static_cast<std::uint64_t>(rollout_seed);
      options.trace_id = trace_id.empty() ? std::filesystem::path(trace_out).stem().string() : trace_id;
      options.description = trace_description;
      options.checkpoint = std::filesystem::path(checkpoint_in).filename().string();
      const auto trace = dine::rollout_and_record(agent, workload, options);
      write_text(trace_out, dine::trace_to_jsonl(trace));
      std::cout << "recorded " << trace.records.size() << " timesteps to " << trace_out << "\n";
      return 0;
    }

    if (*dines_export) {
      const auto trace = service::resolve_trace(trace_spec, data_dir);
      if (trace.records.empty()) throw ConfigError("trace is empty");
      const int a = from_t.value_or(trace.first_timestep());
      const int b = to_t.value_or(trace.last_timestep());
      if (b < a) throw ConfigError("--to must not be smaller than --from");
      std::vector<int> ts;
      for (int t = a; t <= b; ++t) ts.push_back(t);
      dine::DineKinds kinds = dine::all_kinds();
      if (!kinds_text.empty()) {
        kinds.clear();
        for (const auto& k : split_commas(kinds_text)) kinds.push_back(dine::parse_kind(k));
      }
      const std::string json = dine::encode_dines(dine::slice(trace, ts), kinds) + "\n";
      if (dines_out.empty()) {
        std::cout << json;
      } else {
        write_text(dines_out, json);
      }
      return 0;
    }

    if (*ask) {
      const auto trace = service::resolve_trace(trace_or_default(), data_dir);
      analyze::QuestionSpec question;
      question.text = question_text;
      question.form = closed ? analyze::QuestionForm::kClosed : analyze::QuestionForm::kOpen;
      if (closed) question.options = split_commas(options_text);
      const std::string backend = backend_name.empty() ? values.get_string("llm.backend", "live")
                                                       : backend_name;
      const auto params = llm::CompletionParams::from_config(values);
      auto gateway = llm::LlmGateway(service::make_backend(backend, config),
                                     llm::GatewayOptions::from_config(values), clock_for(backend));
      analyze::DeterministicExtractor extractor;
      const auto prepared =
          explain::prepare(service::pipeline_from_config(config), trace, question,
                           prompt::parse_strategy(strategy_text), params, extractor);
      const auto outcome = explain::execute(gateway, prepared, params);
      std::cout << "question type: " << prompt::question_type_name(prepared.analysis.type)
                << "  timesteps: " << prompt::format_timestep_list(prepared.analysis.timesteps)
                << (prepared.analysis.defaulted ? " (default window)" : "") << "\n";
      if (show_prompts) {
        for (const auto& seq : outcome.sent) {
          std::cout << "=== prompt (stage " << seq.stage << "/" << seq.stages << ") ===\n"
                    << prompt::sequence_to_text(seq);
        }
        std::cout << "=== answer ===\n";
      }
      for (const auto& a : outcome.answers) std::cout << a << "\n";
      return 0;
    }

    if (*eval_run) {
      auto exp_config = eval::ExperimentConfig::from_config(values);
      if (!backend_name.empty()) exp_config.backend = backend_name;
      eval::ExperimentSetup setup;
      setup.experiment_id = experiment_id;
      setup.config = exp_config;
      setup.pipeline = service::pipeline_from_config(config);
      setup.trace = service::resolve_trace(trace_or_default(), data_dir);
      const auto bank_file = bank_path.empty() ? values.get("data.bank") : std::optional(bank_path);
      setup.bank = bank_file ? eval::load_bank(bank_path.empty() ? config.resolve(*bank_file).string()
                                                                 : bank_path)
                             : eval::make_default_bank(setup.trace);
      setup.reference = service::reference_from_config(config);
      setup.directory = data_dir / "experiments" / experiment_id;
      llm::LlmGateway gateway(service::make_backend(exp_config.backend, config),
                              llm::GatewayOptions::from_config(values),
                              clock_for(exp_config.backend));
      const auto report = eval::run_experiment(setup, gateway, [](const eval::CellResult& c) {
        std::clog << "[eval] " << c.key.key() << (c.complete ? " done" : " incomplete") << "\n";
      });
      std::cout << eval::render_report(report, eval::parse_report_format(format_text));
      return report.complete() ? 0 : 1;
    }

    if (*serve) {
      service::ServiceOptions options;
      options.data_dir = data_dir;
      options.pipeline = service::pipeline_from_config(config);
      options.default_params = llm::CompletionParams::from_config(values);
      options.default_trace_id = values.get_string("data.trace", "reference");
      options.extractor = values.get_string("analyze.extractor", "deterministic");
      options.experiment_defaults = eval::ExperimentConfig::from_config(values);
      if (auto b = values.get("data.bank")) options.bank_path = config.resolve(*b).string();
      options.reference = service::reference_from_config(config);
      const std::string backend = backend_name.empty() ? values.get_string("llm.backend", "live")
                                                       : backend_name;
      auto gw_options = llm::GatewayOptions::from_config(values);
      gw_options.wait_for_budget = false;
      auto gateway = std::make_shared<llm::LlmGateway>(service::make_backend(backend, config),
                                                       gw_options, clock_for(backend));
      service::ExplanationService svc(options, gateway, [&config](const std::string& name) {
        return service::make_backend(name, config);
      });
      service::HttpServer server(svc);
      const int bound = server.bind(host, port);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << "listening on http://" << host << ":" << bound << " (data dir " << data_dir.string()
                << ", backend " << backend << ")" << std::endl;
      server.listen();
      g_server = nullptr;
      return 0;
    }

    if (*bank_generate) {
      const auto trace = service::resolve_trace(trace_spec, data_dir);
      eval::save_bank(eval::make_default_bank(trace), bank_out);
      std::cout << "wrote " << bank_out << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
