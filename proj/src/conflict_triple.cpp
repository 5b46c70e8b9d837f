#include "modconf/conflict_triple.hpp"

#include "modconf/error.hpp"
#include "modconf/text.hpp"

namespace modconf {

std::string_view to_string(ReviewStatus status) {
  switch (status) {
    case ReviewStatus::kPending: return "pending";
    case ReviewStatus::kAccepted: return "accepted";
    case ReviewStatus::kRejected: return "rejected";
    case ReviewStatus::kEdited: return "edited";
  }
  return "pending";
}

std::optional<ReviewStatus> parse_review_status(std::string_view s) {
  for (auto status : kAllReviewStatuses) {
    if (s == to_string(status)) return status;
  }
  return std::nullopt;
}

bool same_question(std::string_view a, std::string_view b) {
  return text::to_lower(text::collapse_spaces(a)) == text::to_lower(text::collapse_spaces(b));
}

void ConflictTriple::validate() const {
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::kSchemaError, "record '" + record_id + "': " + what);
  };
  if (record_id.empty()) throw Error(ErrorCode::kSchemaError, "record without record_id");
  if (image_id.empty()) fail("empty image_id");
  if (text::trim(question).empty()) fail("empty question");
  if (text::trim(answer).empty()) fail("empty answer");
  if (same_question(question, provenance.base_question)) fail("question equals the base question");
  if (review_status == ReviewStatus::kEdited && !edited_question && !edited_answer) {
    fail("status 'edited' without an edited field");
  }
}

nlohmann::ordered_json to_json(const ConflictTriple& t) {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["record_id"] = t.record_id;
  j["image_id"] = t.image_id;
  j["conflict_type"] = to_string(t.conflict_type);
  j["question"] = t.question;
  j["answer"] = t.answer;
  nlohmann::ordered_json prov;
  prov["base_question"] = t.provenance.base_question;
  prov["base_answer"] = t.provenance.base_answer;
  prov["components_modified"] = t.provenance.components_modified;
  prov["prompts_used"] = t.provenance.prompts_used;
  j["provenance"] = std::move(prov);
  j["review_status"] = to_string(t.review_status);
  j["edited_question"] = t.edited_question ? nlohmann::ordered_json(*t.edited_question) : nlohmann::ordered_json(nullptr);
  j["edited_answer"] = t.edited_answer ? nlohmann::ordered_json(*t.edited_answer) : nlohmann::ordered_json(nullptr);
  return j;
}

ConflictTriple triple_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kSchemaError, "record must be a JSON object");
  try {
    int version = j.at("schema_version").get<int>();
    if (version != kSchemaVersion) {
      throw Error(ErrorCode::kSchemaError, "unrecognized schema_version " + std::to_string(version));
    }
    ConflictTriple t;
    t.record_id = j.at("record_id").get<std::string>();
    t.image_id = j.at("image_id").get<std::string>();
    auto type = parse_conflict_type(j.at("conflict_type").get<std::string>());
    if (!type) throw Error(ErrorCode::kSchemaError, "unknown conflict_type");
    t.conflict_type = *type;
    t.question = j.at("question").get<std::string>();
    t.answer = j.at("answer").get<std::string>();
    const auto& prov = j.at("provenance");
    t.provenance.base_question = prov.at("base_question").get<std::string>();
    t.provenance.base_answer = prov.at("base_answer").get<std::string>();
    t.provenance.components_modified = prov.at("components_modified").get<std::vector<std::string>>();
    t.provenance.prompts_used = prov.at("prompts_used").get<std::vector<std::string>>();
    auto status = parse_review_status(j.at("review_status").get<std::string>());
    if (!status) throw Error(ErrorCode::kSchemaError, "unknown review_status");
    t.review_status = *status;
    if (j.contains("edited_question") && !j["edited_question"].is_null()) {
      t.edited_question = j["edited_question"].get<std::string>();
    }
    if (j.contains("edited_answer") && !j["edited_answer"].is_null()) {
      t.edited_answer = j["edited_answer"].get<std::string>();
    }
    t.validate();
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchemaError, e.what());
  }
}

std::string to_jsonl_line(const ConflictTriple& triple) { return to_json(triple).dump(); }

}  // namespace modconf
