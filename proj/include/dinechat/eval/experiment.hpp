#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dinechat/analyze/question.hpp"
#include "dinechat/config_file.hpp"
#include "dinechat/dine/record.hpp"
#include "dinechat/eval/question_bank.hpp"
#include "dinechat/eval/reference.hpp"
#include "dinechat/explain/pipeline.hpp"
#include "dinechat/llm/gateway.hpp"

namespace dinechat::eval {

struct ExperimentConfig {
  std::vector<prompt::Strategy> promptings = {prompt::Strategy::kZeroShot,
                                              prompt::Strategy::kEngineered};
  std::vector<analyze::QuestionForm> forms = {analyze::QuestionForm::kOpen,
                                              analyze::QuestionForm::kClosed};
  std::vector<double> temperatures = {0.0, 0.2, 0.5, 1.0};
  std::vector<double> top_p_clusters = {1.0, 0.8, 0.5};
  int repetitions = 54;  // split evenly across the top_p clusters
  int n = 18;            // responses per call
  int max_tokens = 350;
  std::string model = "gpt-3.5-turbo";
  std::string backend = "oracle";

  int repetitions_per_cluster() const;
  void validate() const;

  // Keys: eval.promptings, eval.forms, eval.temperatures, eval.top_p
  // (comma lists), eval.repetitions, eval.n, eval.backend, llm.max_token,
  // llm.model.
  static ExperimentConfig from_config(const KeyValueConfig& config);
};

nlohmann::ordered_json config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& j);

struct CellKey {
  prompt::Strategy prompting = prompt::Strategy::kEngineered;
  analyze::QuestionForm form = analyze::QuestionForm::kOpen;
  double temperature = 0.0;

  std::string key() const;  // e.g. "engineered_open_t0.2"
};

// Every repetition's answer to one question within a cluster.
struct QuestionResult {
  std::string question_id;
  std::string truth;
  std::vector<std::string> answers;
  std::vector<int> grades;
  std::vector<std::string> rationales;
};

struct ClusterResult {
  double top_p = 1.0;
  std::vector<QuestionResult> questions;
  std::vector<double> repetition_fidelity;  // mean grade over questions
  double fidelity = 0.0;
  double sigma = 0.0;
  double stability = 0.0;
};

struct CellResult {
  CellKey key;
  bool complete = false;
  std::string error;
  std::vector<ClusterResult> clusters;
  double fidelity = 0.0;   // mean over all repetitions
  double stability = 0.0;  // mean of per-cluster stabilities
  double sigma_all = 0.0;  // population sigma over all repetitions
  double stability_all = 0.0;
};

// Fills the per-cluster and per-cell figures from the graded transcripts.
void aggregate(CellResult& cell);

struct ExperimentReport {
  std::string experiment_id;
  ExperimentConfig config;
  std::vector<CellResult> cells;
  ReferenceConstants reference;

  bool complete() const;
};

nlohmann::ordered_json report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const nlohmann::json& j);

enum class ReportFormat { kTable, kJson };
ReportFormat parse_report_format(std::string_view name);
std::string render_report(const ExperimentReport& report, ReportFormat format);

struct ExperimentSetup {
  std::string experiment_id;
  ExperimentConfig config;
  explain::PipelineConfig pipeline;
  dine::DecisionTrace trace;
  QuestionBank bank;
  ReferenceConstants reference;
  // Cell transcripts go to <directory>/cells/<key>.jsonl; finished cells
  // carry a completion marker and are reused on the next run.
  std::filesystem::path directory;
};

using ProgressFn = std::function<void(const CellResult&)>;

// Runs the grid. Gateway failures leave the cell incomplete with the error;
// no grade is ever produced without an answer.
ExperimentReport run_experiment(const ExperimentSetup& setup, llm::LlmGateway& gateway,
                                const ProgressFn& progress = {});

}  // namespace dinechat::eval
