#pragma once

// LLM-as-judge prompt builders and response parsers, the prompt-engineering
// wrapper, and the terminal consistency reward.

#include <string>
#include <string_view>

#include "modconf/llm_gateway.hpp"

namespace modconf {

// "Please check if the image contains mentioned information and answer the
// question: <question>". Not idempotent: wrapping twice nests.
std::string apply_pe_prompt(std::string_view question);

struct JudgeOptions {
  std::string model = "gpt-4o";
  double temperature = 0.0;
  int max_tokens = 512;
};

struct HallucinationVerdict {
  bool hallucinated = false;
  std::string rationale;
  bool fallback = false;  // no "Hallucination:" line; verdict from a bare yes/no
};

struct QualityRating {
  int score = 0;  // 0..4
  std::string rationale;
};

ChatRequest build_hallucination_prompt(std::string_view question, std::string_view answer,
                                       std::string tag, const JudgeOptions& options = {});
// Reads the last line starting with "Hallucination:" (case-insensitive). Without
// one, falls back to the last standalone yes/no in the text. Throws
// Error(kUnparseableVerdict) otherwise.
HallucinationVerdict parse_hallucination_verdict(std::string_view response);

ChatRequest build_quality_prompt(std::string_view question, std::string_view answer,
                                 std::string_view reference, std::string tag,
                                 const JudgeOptions& options = {});
// First integer after the last "Total rating:" marker. Throws
// Error(kUnparseableRating) or Error(kOutOfRangeRating) for values outside 0..4.
QualityRating parse_quality_rating(std::string_view response);

// model_response may be empty; the prompt instructs the judge to answer "no".
ChatRequest build_consistency_prompt(std::string_view question, std::string_view reference,
                                     std::string_view model_response, std::string tag,
                                     const JudgeOptions& options = {});
// First standalone yes/no, case-insensitive. Throws Error(kUnparseableVerdict).
bool parse_consistency(std::string_view response);

// +1 / -1 at the final step depending on consistency, 0 before it.
// Requires 1 <= step <= final_step.
int reward_at_step(int step, int final_step, bool consistent);

struct TerminalReward {
  bool consistent = false;
  int reward = 0;
  std::string judge_response;
};

// Asks the judge whether `model_response` agrees with `reference` and returns
// the reward at the final step.
TerminalReward judge_terminal_reward(ChatProvider& judge, std::string_view question,
                                     std::string_view reference, std::string_view model_response,
                                     std::string tag, const JudgeOptions& options = {});

}  // namespace modconf
