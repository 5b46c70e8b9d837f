#include "modconf/evaluation.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>

#include "modconf/error.hpp"
#include "modconf/parallel.hpp"
#include "modconf/text.hpp"

namespace modconf {

std::string_view to_string(MethodTag tag) {
  switch (tag) {
    case MethodTag::kBase: return "base";
    case MethodTag::kPe: return "pe";
    case MethodTag::kSft: return "sft";
    case MethodTag::kRl: return "rl";
    case MethodTag::kOther: return "other";
  }
  return "other";
}

std::optional<MethodTag> parse_method_tag(std::string_view s) {
  auto lower = text::to_lower(text::trim(s));
  for (auto tag : {MethodTag::kBase, MethodTag::kPe, MethodTag::kSft, MethodTag::kRl, MethodTag::kOther}) {
    if (lower == to_string(tag)) return tag;
  }
  return std::nullopt;
}

nlohmann::ordered_json to_json(const ModelResponse& r) {
  nlohmann::ordered_json j;
  j["record_id"] = r.record_id;
  j["model_name"] = r.model_name;
  j["response_text"] = r.response_text;
  j["method_tag"] = to_string(r.method_tag);
  return j;
}

ModelResponse response_from_json(const nlohmann::json& j) {
  try {
    ModelResponse r;
    r.record_id = j.at("record_id").get<std::string>();
    r.model_name = j.at("model_name").get<std::string>();
    r.response_text = j.at("response_text").get<std::string>();
    auto tag = parse_method_tag(j.value("method_tag", std::string("base")));
    if (!tag) throw Error(ErrorCode::kSchemaError, "unknown method_tag");
    r.method_tag = *tag;
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchemaError, e.what());
  }
}

std::vector<ModelResponse> load_responses(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open responses file " + path.string());
  std::vector<ModelResponse> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      out.push_back(response_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return out;
}

MetricSummary aggregate(std::span<const RecordEvaluation> records) {
  std::vector<const RecordEvaluation*> ordered;
  ordered.reserve(records.size());
  for (const auto& r : records) ordered.push_back(&r);
  std::sort(ordered.begin(), ordered.end(),
            [](const auto* a, const auto* b) { return a->record_id < b->record_id; });

  MetricSummary s;
  s.n = ordered.size();
  double rouge_sum = 0.0;
  long quality_sum = 0;
  for (const auto* r : ordered) {
    rouge_sum += r->rouge.f;
    if (r->hallucination) {
      ++s.hallucination_judged;
      if (r->hallucination->hallucinated) ++s.hallucinated;
    } else {
      ++s.hallucination_errors;
    }
    if (r->quality) {
      ++s.quality_judged;
      quality_sum += r->quality->score;
    } else {
      ++s.quality_errors;
    }
  }
  if (s.n > 0) s.mean_rouge_l_f = rouge_sum / static_cast<double>(s.n);
  if (s.hallucination_judged > 0) {
    s.hallu_rate_percent = 100.0 * static_cast<double>(s.hallucinated) / static_cast<double>(s.hallucination_judged);
  }
  if (s.quality_judged > 0) {
    s.mean_llm_judge = static_cast<double>(quality_sum) / static_cast<double>(s.quality_judged);
  }
  return s;
}

namespace {

std::unordered_map<std::string, const ConflictTriple*> index_dataset(std::span<const ConflictTriple> dataset) {
  std::unordered_map<std::string, const ConflictTriple*> index;
  for (const auto& t : dataset) index.emplace(t.record_id, &t);
  return index;
}

std::vector<const ModelResponse*> resolve_batch(
    std::span<const ModelResponse> responses,
    const std::unordered_map<std::string, const ConflictTriple*>& index) {
  std::vector<const ModelResponse*> ordered;
  std::set<std::string> seen;
  for (const auto& r : responses) {
    if (!index.contains(r.record_id)) {
      throw Error(ErrorCode::kUnresolvedRecord, "response for unknown record '" + r.record_id + "'");
    }
    if (!seen.insert(r.record_id).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate response for record '" + r.record_id + "'");
    }
    ordered.push_back(&r);
  }
  std::sort(ordered.begin(), ordered.end(),
            [](const auto* a, const auto* b) { return a->record_id < b->record_id; });
  return ordered;
}

std::string judge_tag(const ModelResponse& r, std::string_view kind) {
  return fmt::format("{}/{}/{}/{}", r.record_id, r.model_name, to_string(r.method_tag), kind);
}

std::string error_name(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) return std::string(err->code_name());
  return "internal";
}

}  // namespace

EvalReport evaluate_batch(std::span<const ConflictTriple> dataset, std::span<const ModelResponse> responses,
                          ChatProvider& judge, const EvalOptions& options) {
  if (!(options.beta > 0.0)) throw Error(ErrorCode::kInvalidArgument, "beta must be positive");
  auto index = index_dataset(dataset);
  auto ordered = resolve_batch(responses, index);

  EvalReport report;
  report.beta = options.beta;
  if (!ordered.empty()) {
    report.model_name = ordered.front()->model_name;
    report.method_tag = to_string(ordered.front()->method_tag);
  }
  report.records.resize(ordered.size());
  parallel_for(ordered.size(), options.jobs, [&](std::size_t i) {
    const auto& response = *ordered[i];
    const auto& record = *index.at(response.record_id);
    auto& out = report.records[i];
    out.record_id = record.record_id;
    out.conflict_type = record.conflict_type;
    out.rouge = rouge_l_f(response.response_text, record.effective_answer(), options.beta);
    try {
      auto request = build_hallucination_prompt(record.effective_question(), response.response_text,
                                                judge_tag(response, "hallucination"), options.judge);
      out.hallucination = parse_hallucination_verdict(judge.complete(request).content);
    } catch (const std::exception& e) {
      out.hallucination_error = error_name(e);
    }
    try {
      auto request = build_quality_prompt(record.effective_question(), response.response_text,
                                          record.effective_answer(), judge_tag(response, "quality"),
                                          options.judge);
      out.quality = parse_quality_rating(judge.complete(request).content);
    } catch (const std::exception& e) {
      out.quality_error = error_name(e);
    }
  });

  report.overall = aggregate(report.records);
  for (auto type : kAllConflictTypes) {
    std::vector<RecordEvaluation> subset;
    for (const auto& r : report.records) {
      if (r.conflict_type == type) subset.push_back(r);
    }
    report.per_conflict_type[type] = aggregate(subset);
  }
  return report;
}

std::vector<EvalReport> evaluate_grouped(std::span<const ConflictTriple> dataset,
                                         std::span<const ModelResponse> responses, ChatProvider& judge,
                                         const EvalOptions& options) {
  std::map<std::pair<std::string, std::string>, std::vector<ModelResponse>> groups;
  for (const auto& r : responses) {
    groups[{r.model_name, std::string(to_string(r.method_tag))}].push_back(r);
  }
  std::vector<EvalReport> reports;
  for (const auto& [key, group] : groups) {
    reports.push_back(evaluate_batch(dataset, group, judge, options));
  }
  return reports;
}

nlohmann::ordered_json to_json(const MetricSummary& s) {
  nlohmann::ordered_json j;
  j["n"] = s.n;
  j["mean_rouge_l_f"] = s.mean_rouge_l_f;
  j["hallu_rate_percent"] = s.hallu_rate_percent;
  j["mean_llm_judge"] = s.mean_llm_judge;
  j["hallucination_judged"] = s.hallucination_judged;
  j["hallucinated"] = s.hallucinated;
  j["quality_judged"] = s.quality_judged;
  j["hallucination_errors"] = s.hallucination_errors;
  j["quality_errors"] = s.quality_errors;
  return j;
}

nlohmann::ordered_json to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["model_name"] = report.model_name;
  j["method_tag"] = report.method_tag;
  j["beta"] = report.beta;
  j["overall"] = to_json(report.overall);
  nlohmann::ordered_json per_type;
  for (const auto& [type, summary] : report.per_conflict_type) per_type[std::string(to_string(type))] = to_json(summary);
  j["per_conflict_type"] = std::move(per_type);
  auto records = nlohmann::ordered_json::array();
  for (const auto& r : report.records) {
    nlohmann::ordered_json row;
    row["record_id"] = r.record_id;
    row["conflict_type"] = to_string(r.conflict_type);
    row["rouge_l"] = {{"precision", r.rouge.precision}, {"recall", r.rouge.recall}, {"f", r.rouge.f}};
    if (r.hallucination) {
      row["hallucinated"] = r.hallucination->hallucinated;
      row["hallucination_rationale"] = r.hallucination->rationale;
      row["hallucination_fallback"] = r.hallucination->fallback;
    } else {
      row["hallucinated"] = nullptr;
      row["hallucination_error"] = *r.hallucination_error;
    }
    if (r.quality) {
      row["llm_judge"] = r.quality->score;
      row["llm_judge_rationale"] = r.quality->rationale;
    } else {
      row["llm_judge"] = nullptr;
      row["llm_judge_error"] = *r.quality_error;
    }
    records.push_back(std::move(row));
  }
  j["records"] = std::move(records);
  return j;
}

std::string to_csv(std::span<const EvalReport> reports) {
  std::string out = "Model,Method,ROUGE-L (%),Hallu-Rate (%),LLM-Judge\n";
  for (const auto& r : reports) {
    out += fmt::format("{},{},{:.2f},{:.2f},{:.2f}\n", r.model_name, r.method_tag,
                       100.0 * r.overall.mean_rouge_l_f, r.overall.hallu_rate_percent, r.overall.mean_llm_judge);
  }
  return out;
}

std::string to_table(std::span<const EvalReport> reports) {
  std::string out = fmt::format("{:<28} {:<7} {:>6} {:>12} {:>14} {:>10}\n", "Model", "Method", "N",
                                "ROUGE-L (%)", "Hallu-Rate (%)", "LLM-Judge");
  for (const auto& r : reports) {
    out += fmt::format("{:<28} {:<7} {:>6} {:>12.2f} {:>14.2f} {:>10.2f}\n", r.model_name, r.method_tag,
                       r.overall.n, 100.0 * r.overall.mean_rouge_l_f, r.overall.hallu_rate_percent,
                       r.overall.mean_llm_judge);
    for (const auto& [type, s] : r.per_conflict_type) {
      out += fmt::format("  {:<26} {:<7} {:>6} {:>12.2f} {:>14.2f} {:>10.2f}\n", to_string(type), "", s.n,
                         100.0 * s.mean_rouge_l_f, s.hallu_rate_percent, s.mean_llm_judge);
    }
  }
  return out;
}

std::vector<RewardRecord> score_rewards(std::span<const ConflictTriple> dataset,
                                        std::span<const ModelResponse> responses, ChatProvider& judge,
                                        const EvalOptions& options) {
  auto index = index_dataset(dataset);
  std::vector<const ModelResponse*> ordered;
  for (const auto& r : responses) {
    if (!index.contains(r.record_id)) {
      throw Error(ErrorCode::kUnresolvedRecord, "response for unknown record '" + r.record_id + "'");
    }
    ordered.push_back(&r);
  }
  std::stable_sort(ordered.begin(), ordered.end(), [](const auto* a, const auto* b) {
    return std::tie(a->record_id, a->model_name, a->method_tag) <
           std::tie(b->record_id, b->model_name, b->method_tag);
  });
  std::vector<RewardRecord> out(ordered.size());
  parallel_for(ordered.size(), options.jobs, [&](std::size_t i) {
    const auto& response = *ordered[i];
    const auto& record = *index.at(response.record_id);
    auto& row = out[i];
    row.record_id = response.record_id;
    row.model_name = response.model_name;
    row.method_tag = to_string(response.method_tag);
    try {
      auto result = judge_terminal_reward(judge, record.effective_question(), record.effective_answer(),
                                          response.response_text, judge_tag(response, "consistency"),
                                          options.judge);
      row.consistent = result.consistent;
      row.reward = result.reward;
    } catch (const std::exception& e) {
      row.error = error_name(e);
    }
  });
  return out;
}

nlohmann::ordered_json to_json(const RewardRecord& r) {
  nlohmann::ordered_json j;
  j["record_id"] = r.record_id;
  j["model_name"] = r.model_name;
  j["method_tag"] = r.method_tag;
  j["consistent"] = r.consistent ? nlohmann::ordered_json(*r.consistent) : nlohmann::ordered_json(nullptr);
  j["reward"] = r.reward ? nlohmann::ordered_json(*r.reward) : nlohmann::ordered_json(nullptr);
  if (r.error) j["error"] = *r.error;
  return j;
}

}  // namespace modconf
