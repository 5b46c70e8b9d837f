#pragma once

// Human verification backend: a review store with one-shot decisions and an
// append-only audit log, plus the JSON-over-HTTP server the review UI talks to.
//
//   GET  /api/pending?limit=N        oldest pending records (400 on bad limit)
//   POST /api/review/{record_id}     {"decision","annotator_id",["edited_question"],["edited_answer"],["timestamp"]}
//                                    404 unknown id, 409 already reviewed, 422 invalid body
//   GET  /api/stats                  dataset stats plus review progress
//   GET  /api/export                 accepted + edited records as JSONL
//   POST /api/admin/reopen/{id}      supervisor reopen, {"annotator_id"}
//   GET  /images/{image_id}{ext}     static files from the image root
//   GET  /                           built UI assets, when configured

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "modconf/conflict_triple.hpp"
#include "modconf/dataset_store.hpp"

namespace modconf {

enum class Decision { kAccept, kReject, kEdit };
std::string_view to_string(Decision decision);

struct ReviewDecision {
  std::string record_id;
  Decision decision = Decision::kAccept;
  std::optional<std::string> edited_question;
  std::optional<std::string> edited_answer;
  std::string annotator_id;
  std::string timestamp;  // filled by the store when empty

  // Throws Error(kInvalidArgument) for malformed bodies (the 422 cases).
  static ReviewDecision from_json(std::string record_id, const nlohmann::json& body);
};

struct ReviewProgress {
  std::size_t total = 0;
  std::size_t pending = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t edited = 0;

  std::size_t reviewed() const { return accepted + rejected + edited; }
};

nlohmann::ordered_json to_json(const ReviewProgress& progress);

std::string utc_timestamp();

class ReviewStore {
 public:
  struct Options {
    std::filesystem::path dataset_path;
    std::filesystem::path audit_log_path;  // default: <dataset>.audit.jsonl
    std::function<std::string()> clock = utc_timestamp;
  };

  explicit ReviewStore(Options options);

  // Pending records in file order, at most `limit`.
  std::vector<ConflictTriple> pending(std::size_t limit) const;

  // Compare-and-set pending -> accepted/rejected/edited. Throws Error(kNotFound),
  // Error(kConflict) if the record is no longer pending, Error(kInvalidArgument)
  // if the edit would break a record invariant. Persists the dataset and appends
  // an audit entry before returning.
  ConflictTriple apply(ReviewDecision decision);

  // Supervisor command: returns a reviewed record to pending and clears edits.
  ConflictTriple reopen(const std::string& record_id, const std::string& annotator_id);

  std::vector<ConflictTriple> records() const;
  ReviewProgress progress() const;
  DatasetStats stats() const;
  std::vector<ConflictTriple> export_final() const;

  const std::filesystem::path& audit_log_path() const { return options_.audit_log_path; }

 private:
  void append_audit(const nlohmann::ordered_json& entry);
  void persist();

  Options options_;
  mutable std::mutex mutex_;
  std::vector<ConflictTriple> records_;
  std::map<std::string, std::size_t> index_;
};

// Re-applies an audit log to the records as they were before review and returns
// the resulting status per record id.
std::map<std::string, ReviewStatus> replay_audit(std::span<const ConflictTriple> original,
                                                 const std::filesystem::path& audit_log);

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0: pick a free port
  std::filesystem::path image_root;
  std::string image_extension = ".jpg";
  std::filesystem::path ui_dir;
};

class ReviewServer {
 public:
  ReviewServer(ReviewStore& store, ServerOptions options);
  ~ReviewServer();
  ReviewServer(const ReviewServer&) = delete;
  ReviewServer& operator=(const ReviewServer&) = delete;

  // Binds and returns the bound port. Throws Error(kIoError) on failure.
  int bind();
  // Serves until stop(); bind() must have succeeded.
  void listen();
  // bind() + listen() on a background thread.
  int start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace modconf
