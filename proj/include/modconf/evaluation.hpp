#pragma once

// Batch evaluation of model responses against a conflict dataset: ROUGE-L F,
// Hallu-Rate and the 0-4 LLM-Judge score, overall and per conflict type.

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "modconf/conflict_triple.hpp"
#include "modconf/judge.hpp"
#include "modconf/llm_gateway.hpp"
#include "modconf/rouge.hpp"

namespace modconf {

enum class MethodTag { kBase, kPe, kSft, kRl, kOther };
std::string_view to_string(MethodTag tag);
std::optional<MethodTag> parse_method_tag(std::string_view text);

struct ModelResponse {
  std::string record_id;
  std::string model_name;
  std::string response_text;
  MethodTag method_tag = MethodTag::kBase;
};

nlohmann::ordered_json to_json(const ModelResponse& response);
ModelResponse response_from_json(const nlohmann::json& j);
// JSONL, one ModelResponse per line; blank lines skipped.
std::vector<ModelResponse> load_responses(const std::filesystem::path& path);

struct RecordEvaluation {
  std::string record_id;
  ConflictType conflict_type = ConflictType::kObject;
  RougeScore rouge;
  std::optional<HallucinationVerdict> hallucination;
  std::optional<QualityRating> quality;
  std::optional<std::string> hallucination_error;  // error code name
  std::optional<std::string> quality_error;
};

struct MetricSummary {
  std::size_t n = 0;
  double mean_rouge_l_f = 0.0;
  std::size_t hallucination_judged = 0;
  std::size_t hallucinated = 0;
  double hallu_rate_percent = 0.0;  // 100 * hallucinated / hallucination_judged
  std::size_t quality_judged = 0;
  double mean_llm_judge = 0.0;
  std::size_t hallucination_errors = 0;
  std::size_t quality_errors = 0;
};

// Records are aggregated in record_id order so sums do not depend on input order.
MetricSummary aggregate(std::span<const RecordEvaluation> records);

struct EvalReport {
  std::string model_name;
  std::string method_tag;
  double beta = 1.0;
  MetricSummary overall;
  std::map<ConflictType, MetricSummary> per_conflict_type;
  std::vector<RecordEvaluation> records;  // sorted by record_id
};

struct EvalOptions {
  double beta = 1.0;
  JudgeOptions judge;
  int jobs = 1;
};

// Judge failures are recorded per record and excluded from the affected metric.
// Throws Error(kUnresolvedRecord) if a response names an unknown record and
// Error(kInvalidArgument) on duplicate record ids within the batch.
EvalReport evaluate_batch(std::span<const ConflictTriple> dataset, std::span<const ModelResponse> responses,
                          ChatProvider& judge, const EvalOptions& options = {});

// One report per (model_name, method_tag), ordered by that pair.
std::vector<EvalReport> evaluate_grouped(std::span<const ConflictTriple> dataset,
                                         std::span<const ModelResponse> responses, ChatProvider& judge,
                                         const EvalOptions& options = {});

nlohmann::ordered_json to_json(const MetricSummary& summary);
nlohmann::ordered_json to_json(const EvalReport& report);
// Model,Method,ROUGE-L (%),Hallu-Rate (%),LLM-Judge with two decimals.
std::string to_csv(std::span<const EvalReport> reports);
std::string to_table(std::span<const EvalReport> reports);

struct RewardRecord {
  std::string record_id;
  std::string model_name;
  std::string method_tag;
  std::optional<bool> consistent;
  std::optional<int> reward;
  std::optional<std::string> error;
};

// Terminal consistency reward for each response, in record_id order.
std::vector<RewardRecord> score_rewards(std::span<const ConflictTriple> dataset,
                                        std::span<const ModelResponse> responses, ChatProvider& judge,
                                        const EvalOptions& options = {});
nlohmann::ordered_json to_json(const RewardRecord& record);

}  // namespace modconf
