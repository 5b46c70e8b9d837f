#include "modconf/judge.hpp"

#include <cctype>
#include <optional>
#include <vector>

#include "modconf/error.hpp"
#include "modconf/prompts.hpp"
#include "modconf/text.hpp"

namespace modconf {

namespace {

void require_non_empty(std::string_view value, const char* field) {
  if (text::trim(value).empty()) {
    throw Error(ErrorCode::kPrecondition, std::string(field) + " must not be empty");
  }
}

ChatRequest judge_request(std::string prompt, std::string tag, const JudgeOptions& options) {
  return ChatRequest::user_prompt(options.model, std::move(prompt), std::move(tag),
                                  options.temperature, options.max_tokens);
}

bool is_letter(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

// Maximal runs of ASCII letters, lowercased.
std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && !is_letter(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && is_letter(s[j])) ++j;
    if (j > i) out.push_back(text::to_lower(s.substr(i, j - i)));
    i = j;
  }
  return out;
}

std::optional<bool> yes_no(std::string_view word) {
  if (word == "yes") return true;
  if (word == "no") return false;
  return std::nullopt;
}

struct Line {
  std::size_t offset;
  std::string_view text;
};

std::vector<Line> lines_of(std::string_view s) {
  std::vector<Line> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find('\n', start);
    if (end == std::string_view::npos) end = s.size();
    out.push_back({start, s.substr(start, end - start)});
    start = end + 1;
  }
  return out;
}

// Line content with leading whitespace and markdown emphasis removed.
std::string_view strip_decoration(std::string_view line) {
  line = text::trim(line);
  while (!line.empty() && (line.front() == '*' || line.front() == '#' || line.front() == '_')) {
    line.remove_prefix(1);
  }
  return text::trim(line);
}

// Judge rationale: what precedes the verdict line, after the last
// "Evaluation:" marker if present, without "Feedback:::" headers.
std::string rationale_before(std::string_view response, std::size_t verdict_offset) {
  auto prefix = response.substr(0, verdict_offset);
  auto marker = text::rfind_icase(prefix, "evaluation:");
  if (marker != std::string_view::npos) {
    prefix.remove_prefix(marker + std::string_view("evaluation:").size());
    // "**Evaluation:** text" leaves the closing emphasis behind.
    while (!prefix.empty() && (prefix.front() == '*' || prefix.front() == '_')) prefix.remove_prefix(1);
  }
  std::string out;
  for (const auto& line : lines_of(prefix)) {
    auto t = text::trim(line.text);
    if (text::istarts_with(t, "feedback:::")) continue;
    if (!out.empty()) out += '\n';
    out += t;
  }
  return std::string(text::trim(out));
}

}  // namespace

std::string apply_pe_prompt(std::string_view question) {
  require_non_empty(question, "question");
  return prompts::fill(prompts::Template::kPromptEngineering, {{"question", std::string(question)}});
}

ChatRequest build_hallucination_prompt(std::string_view question, std::string_view answer, std::string tag,
                                       const JudgeOptions& options) {
  require_non_empty(question, "question");
  require_non_empty(answer, "answer");
  auto prompt = prompts::fill(prompts::Template::kJudgeHallucination,
                              {{"question", std::string(question)}, {"answer", std::string(answer)}});
  return judge_request(std::move(prompt), std::move(tag), options);
}

HallucinationVerdict parse_hallucination_verdict(std::string_view response) {
  static constexpr std::string_view kMarker = "hallucination:";
  std::optional<Line> verdict_line;
  for (const auto& line : lines_of(response)) {
    if (text::istarts_with(strip_decoration(line.text), kMarker)) verdict_line = line;
  }
  if (verdict_line) {
    auto value = strip_decoration(verdict_line->text).substr(kMarker.size());
    auto value_words = words(value);
    auto verdict = value_words.empty() ? std::nullopt : yes_no(value_words.front());
    if (!verdict) {
      throw Error(ErrorCode::kUnparseableVerdict,
                  "verdict line is neither yes nor no: " + std::string(verdict_line->text));
    }
    return {*verdict, rationale_before(response, verdict_line->offset), false};
  }
  auto all = words(response);
  for (auto it = all.rbegin(); it != all.rend(); ++it) {
    if (auto verdict = yes_no(*it)) return {*verdict, {}, true};
  }
  throw Error(ErrorCode::kUnparseableVerdict, "no hallucination verdict in judge response");
}

ChatRequest build_quality_prompt(std::string_view question, std::string_view answer,
                                 std::string_view reference, std::string tag, const JudgeOptions& options) {
  require_non_empty(question, "question");
  require_non_empty(answer, "answer");
  require_non_empty(reference, "reference");
  auto prompt = prompts::fill(prompts::Template::kJudgeQuality, {{"question", std::string(question)},
                                                                 {"answer", std::string(answer)},
                                                                 {"reference", std::string(reference)}});
  return judge_request(std::move(prompt), std::move(tag), options);
}

QualityRating parse_quality_rating(std::string_view response) {
  static constexpr std::string_view kMarker = "total rating:";
  auto marker = text::rfind_icase(response, kMarker);
  if (marker == std::string_view::npos) {
    throw Error(ErrorCode::kUnparseableRating, "no 'Total rating:' marker in judge response");
  }
  auto rest = response.substr(marker + kMarker.size());
  std::size_t i = 0;
  while (i < rest.size() && !std::isdigit(static_cast<unsigned char>(rest[i]))) ++i;
  if (i == rest.size()) throw Error(ErrorCode::kUnparseableRating, "no number after 'Total rating:'");
  std::size_t j = i;
  while (j < rest.size() && std::isdigit(static_cast<unsigned char>(rest[j]))) ++j;
  auto digits = rest.substr(i, j - i);
  bool negative = i > 0 && rest[i - 1] == '-';
  if (negative || digits.size() > 1) {
    throw Error(ErrorCode::kOutOfRangeRating,
                "rating " + std::string(negative ? "-" : "") + std::string(digits) + " outside 0..4");
  }
  int score = digits.front() - '0';
  if (score > 4) {
    throw Error(ErrorCode::kOutOfRangeRating, "rating " + std::to_string(score) + " outside 0..4");
  }
  auto line_start = response.rfind('\n', marker);
  line_start = line_start == std::string_view::npos ? 0 : line_start + 1;
  return {score, rationale_before(response, line_start)};
}

ChatRequest build_consistency_prompt(std::string_view question, std::string_view reference,
                                     std::string_view model_response, std::string tag,
                                     const JudgeOptions& options) {
  require_non_empty(question, "question");
  require_non_empty(reference, "reference");
  auto prompt = prompts::fill(prompts::Template::kConsistency,
                              {{"question", std::string(question)},
                               {"reference response", std::string(reference)},
                               {"model response", std::string(model_response)}});
  return judge_request(std::move(prompt), std::move(tag), options);
}

bool parse_consistency(std::string_view response) {
  for (const auto& word : words(response)) {
    if (auto verdict = yes_no(word)) return *verdict;
  }
  throw Error(ErrorCode::kUnparseableVerdict, "no yes/no in consistency judgement");
}

int reward_at_step(int step, int final_step, bool consistent) {
  if (final_step < 1 || step < 1 || step > final_step) {
    throw Error(ErrorCode::kInvalidArgument, "step " + std::to_string(step) + " outside [1, " +
                                                 std::to_string(final_step) + "]");
  }
  if (step < final_step) return 0;
  return consistent ? 1 : -1;
}

TerminalReward judge_terminal_reward(ChatProvider& judge, std::string_view question,
                                     std::string_view reference, std::string_view model_response,
                                     std::string tag, const JudgeOptions& options) {
  auto request = build_consistency_prompt(question, reference, model_response, std::move(tag), options);
  auto response = judge.complete(request);
  TerminalReward out;
  out.consistent = parse_consistency(response.content);
  out.reward = out.consistent ? 1 : -1;
  out.judge_response = std::move(response.content);
  return out;
}

}  // namespace modconf
