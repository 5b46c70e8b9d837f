#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "modconf/scene_graph.hpp"

namespace modconf {

inline constexpr int kSchemaVersion = 1;

enum class ReviewStatus { kPending, kAccepted, kRejected, kEdited };
inline constexpr ReviewStatus kAllReviewStatuses[] = {ReviewStatus::kPending, ReviewStatus::kAccepted,
                                                      ReviewStatus::kRejected, ReviewStatus::kEdited};
std::string_view to_string(ReviewStatus status);
std::optional<ReviewStatus> parse_review_status(std::string_view text);

struct Provenance {
  std::string base_question;
  std::string base_answer;
  std::vector<std::string> components_modified;
  std::vector<std::string> prompts_used;  // request tags

  bool operator==(const Provenance&) const = default;
};

// One synthesized image-question-answer record.
struct ConflictTriple {
  std::string record_id;
  std::string image_id;
  ConflictType conflict_type = ConflictType::kObject;
  std::string question;
  std::string answer;
  Provenance provenance;
  ReviewStatus review_status = ReviewStatus::kPending;
  std::optional<std::string> edited_question;
  std::optional<std::string> edited_answer;

  // Throws Error(kSchemaError) when an invariant is broken.
  void validate() const;

  const std::string& effective_question() const { return edited_question ? *edited_question : question; }
  const std::string& effective_answer() const { return edited_answer ? *edited_answer : answer; }

  bool operator==(const ConflictTriple&) const = default;
};

// Case- and whitespace-insensitive question equality.
bool same_question(std::string_view a, std::string_view b);

// Fixed key order: schema_version, record_id, image_id, conflict_type, question,
// answer, provenance{base_question, base_answer, components_modified,
// prompts_used}, review_status, edited_question, edited_answer.
nlohmann::ordered_json to_json(const ConflictTriple& triple);
ConflictTriple triple_from_json(const nlohmann::json& j);
std::string to_jsonl_line(const ConflictTriple& triple);  // no trailing newline

}  // namespace modconf
