#include <ctime>
#include <fstream>

#include "modconf/error.hpp"
#include "modconf/review_service.hpp"
#include "modconf/text.hpp"

namespace modconf {

std::string_view to_string(Decision decision) {
  switch (decision) {
    case Decision::kAccept: return "accept";
    case Decision::kReject: return "reject";
    case Decision::kEdit: return "edit";
  }
  return "accept";
}

namespace {

std::optional<std::string> optional_text(const nlohmann::json& body, const char* key) {
  if (!body.contains(key) || body[key].is_null()) return std::nullopt;
  if (!body[key].is_string()) throw Error(ErrorCode::kInvalidArgument, std::string(key) + " must be a string");
  auto value = std::string(text::trim(body[key].get<std::string>()));
  if (value.empty()) return std::nullopt;
  return value;
}

ReviewStatus status_for(Decision d) {
  switch (d) {
    case Decision::kAccept: return ReviewStatus::kAccepted;
    case Decision::kReject: return ReviewStatus::kRejected;
    case Decision::kEdit: return ReviewStatus::kEdited;
  }
  return ReviewStatus::kPending;
}

}  // namespace

ReviewDecision ReviewDecision::from_json(std::string record_id, const nlohmann::json& body) {
  if (!body.is_object()) throw Error(ErrorCode::kInvalidArgument, "body must be a JSON object");
  ReviewDecision d;
  d.record_id = std::move(record_id);
  if (!body.contains("decision") || !body["decision"].is_string()) {
    throw Error(ErrorCode::kInvalidArgument, "missing decision");
  }
  const auto decision = body["decision"].get<std::string>();
  if (decision == "accept") {
    d.decision = Decision::kAccept;
  } else if (decision == "reject") {
    d.decision = Decision::kReject;
  } else if (decision == "edit") {
    d.decision = Decision::kEdit;
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown decision '" + decision + "'");
  }
  d.annotator_id = optional_text(body, "annotator_id").value_or("");
  if (d.annotator_id.empty()) throw Error(ErrorCode::kInvalidArgument, "annotator_id is required");
  d.edited_question = optional_text(body, "edited_question");
  d.edited_answer = optional_text(body, "edited_answer");
  d.timestamp = optional_text(body, "timestamp").value_or("");
  if (d.decision == Decision::kEdit && !d.edited_question && !d.edited_answer) {
    throw Error(ErrorCode::kInvalidArgument, "edit requires edited_question or edited_answer");
  }
  if (d.decision != Decision::kEdit && (d.edited_question || d.edited_answer)) {
    throw Error(ErrorCode::kInvalidArgument, "edited fields are only allowed with decision 'edit'");
  }
  return d;
}

nlohmann::ordered_json to_json(const ReviewProgress& p) {
  nlohmann::ordered_json j;
  j["total"] = p.total;
  j["pending"] = p.pending;
  j["accepted"] = p.accepted;
  j["rejected"] = p.rejected;
  j["edited"] = p.edited;
  j["reviewed"] = p.reviewed();
  j["reviewed_fraction"] = p.total ? static_cast<double>(p.reviewed()) / static_cast<double>(p.total) : 0.0;
  return j;
}

std::string utc_timestamp() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ReviewStore::ReviewStore(Options options) : options_(std::move(options)) {
  if (options_.audit_log_path.empty()) {
    options_.audit_log_path = options_.dataset_path;
    options_.audit_log_path += ".audit.jsonl";
  }
  if (!options_.clock) options_.clock = utc_timestamp;
  records_ = load_dataset(options_.dataset_path, LoadMode::kStrict).records;
  for (std::size_t i = 0; i < records_.size(); ++i) index_[records_[i].record_id] = i;
}

std::vector<ConflictTriple> ReviewStore::pending(std::size_t limit) const {
  std::lock_guard lock(mutex_);
  std::vector<ConflictTriple> out;
  for (const auto& r : records_) {
    if (out.size() >= limit) break;
    if (r.review_status == ReviewStatus::kPending) out.push_back(r);
  }
  return out;
}

ConflictTriple ReviewStore::apply(ReviewDecision decision) {
  std::lock_guard lock(mutex_);
  auto it = index_.find(decision.record_id);
  if (it == index_.end()) throw Error(ErrorCode::kNotFound, "unknown record '" + decision.record_id + "'");
  auto& record = records_[it->second];
  if (record.review_status != ReviewStatus::kPending) {
    throw Error(ErrorCode::kConflict, "record '" + decision.record_id + "' was already reviewed (" +
                                          std::string(to_string(record.review_status)) + ")");
  }
  auto updated = record;
  updated.review_status = status_for(decision.decision);
  updated.edited_question = decision.edited_question;
  updated.edited_answer = decision.edited_answer;
  if (updated.edited_question && same_question(*updated.edited_question, updated.provenance.base_question)) {
    throw Error(ErrorCode::kInvalidArgument, "edited question restates the base question");
  }
  try {
    updated.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kInvalidArgument, e.what());
  }
  if (decision.timestamp.empty()) decision.timestamp = options_.clock();

  nlohmann::ordered_json entry;
  entry["action"] = "decision";
  entry["record_id"] = decision.record_id;
  entry["decision"] = to_string(decision.decision);
  entry["status"] = to_string(updated.review_status);
  entry["edited_question"] = decision.edited_question ? nlohmann::ordered_json(*decision.edited_question) : nlohmann::ordered_json(nullptr);
  entry["edited_answer"] = decision.edited_answer ? nlohmann::ordered_json(*decision.edited_answer) : nlohmann::ordered_json(nullptr);
  entry["annotator_id"] = decision.annotator_id;
  entry["timestamp"] = decision.timestamp;
  append_audit(entry);

  record = std::move(updated);
  persist();
  return record;
}

ConflictTriple ReviewStore::reopen(const std::string& record_id, const std::string& annotator_id) {
  std::lock_guard lock(mutex_);
  auto it = index_.find(record_id);
  if (it == index_.end()) throw Error(ErrorCode::kNotFound, "unknown record '" + record_id + "'");
  if (text::trim(annotator_id).empty()) throw Error(ErrorCode::kInvalidArgument, "annotator_id is required");
  auto& record = records_[it->second];
  if (record.review_status == ReviewStatus::kPending) {
    throw Error(ErrorCode::kConflict, "record '" + record_id + "' is already pending");
  }
  nlohmann::ordered_json entry;
  entry["action"] = "reopen";
  entry["record_id"] = record_id;
  entry["status"] = to_string(ReviewStatus::kPending);
  entry["annotator_id"] = annotator_id;
  entry["timestamp"] = options_.clock();
  append_audit(entry);

  record.review_status = ReviewStatus::kPending;
  record.edited_question.reset();
  record.edited_answer.reset();
  persist();
  return record;
}

void ReviewStore::append_audit(const nlohmann::ordered_json& entry) {
  std::ofstream out(options_.audit_log_path, std::ios::app | std::ios::binary);
  out << entry.dump() << '\n';
  out.flush();
  if (!out) throw Error(ErrorCode::kIoError, "cannot append to " + options_.audit_log_path.string());
}

void ReviewStore::persist() { write_dataset(options_.dataset_path, records_); }

std::vector<ConflictTriple> ReviewStore::records() const {
  std::lock_guard lock(mutex_);
  return records_;
}

ReviewProgress ReviewStore::progress() const {
  std::lock_guard lock(mutex_);
  ReviewProgress p;
  p.total = records_.size();
  for (const auto& r : records_) {
    switch (r.review_status) {
      case ReviewStatus::kPending: ++p.pending; break;
      case ReviewStatus::kAccepted: ++p.accepted; break;
      case ReviewStatus::kRejected: ++p.rejected; break;
      case ReviewStatus::kEdited: ++p.edited; break;
    }
  }
  return p;
}

DatasetStats ReviewStore::stats() const {
  std::lock_guard lock(mutex_);
  return compute_stats(records_);
}

std::vector<ConflictTriple> ReviewStore::export_final() const {
  std::lock_guard lock(mutex_);
  return final_view(records_);
}

std::map<std::string, ReviewStatus> replay_audit(std::span<const ConflictTriple> original,
                                                 const std::filesystem::path& audit_log) {
  std::map<std::string, ReviewStatus> status;
  for (const auto& r : original) status[r.record_id] = r.review_status;
  std::ifstream in(audit_log);
  if (!in) return status;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      auto entry = nlohmann::json::parse(line);
      auto parsed = parse_review_status(entry.at("status").get<std::string>());
      if (!parsed) throw Error(ErrorCode::kSchemaError, "unknown status");
      status[entry.at("record_id").get<std::string>()] = *parsed;
    } catch (const std::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return status;
}

}  // namespace modconf
