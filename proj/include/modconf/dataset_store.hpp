#pragma once

// JSONL persistence, splitting and statistics for ConflictTriple collections.

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "modconf/conflict_triple.hpp"

namespace modconf {

struct DatasetFile {
  std::filesystem::path path;
  std::vector<ConflictTriple> records;
  int schema_version = kSchemaVersion;

  const ConflictTriple* find(std::string_view record_id) const;
};

struct LoadIssue {
  std::size_t line = 0;  // 1-based
  std::string message;
};

enum class LoadMode { kStrict, kLenient };

// Strict mode throws ParseError at the first bad line (or duplicate id).
// Lenient mode skips bad lines and reports them in `issues`.
DatasetFile load_dataset(const std::filesystem::path& path, LoadMode mode = LoadMode::kStrict,
                         std::vector<LoadIssue>* issues = nullptr);

// Replaces the file atomically (temp file + rename). Throws on duplicate ids.
void write_dataset(const std::filesystem::path& path, std::span<const ConflictTriple> records);

// Appends records one line at a time while holding an exclusive advisory lock
// on the file. Each line is written with a single write(2) call.
class DatasetWriter {
 public:
  explicit DatasetWriter(const std::filesystem::path& path);
  ~DatasetWriter();
  DatasetWriter(const DatasetWriter&) = delete;
  DatasetWriter& operator=(const DatasetWriter&) = delete;

  // Throws Error(kDuplicateId) if the id is already in the file.
  void append(const ConflictTriple& triple);
  std::size_t size() const { return ids_.size(); }

 private:
  std::filesystem::path path_;
  int fd_ = -1;
  std::set<std::string> ids_;
};

void append(const std::filesystem::path& path, const ConflictTriple& triple);

struct SplitSpec {
  double train_ratio = 0.9;
  std::uint64_t seed = 0;
  bool stratified = false;  // split each conflict type separately

  void validate() const;
};

// floor(n * ratio), robust to representation error in ratio.
std::size_t train_size(std::size_t n, double train_ratio);

// Shuffles record ids with the seed and sends the first train_size(n) to train.
// Each side keeps the input order of its records.
std::pair<DatasetFile, DatasetFile> split(const DatasetFile& dataset, const SplitSpec& spec);

struct TokenCount {
  std::string token;
  std::size_t count = 0;
};

struct DatasetStats {
  std::size_t n = 0;
  std::map<ConflictType, std::size_t> type_counts;
  std::map<ConflictType, double> type_fractions;
  std::map<ReviewStatus, std::size_t> review_counts;
  double mean_question_tokens = 0.0;
  double mean_answer_tokens = 0.0;
  // conflict type -> field ("question"/"answer") -> top tokens
  std::map<ConflictType, std::map<std::string, std::vector<TokenCount>>> top_tokens;
};

DatasetStats compute_stats(std::span<const ConflictTriple> records, std::size_t top_k = 10);
nlohmann::ordered_json to_json(const DatasetStats& stats);
std::string to_table(const DatasetStats& stats);

// Accepted and edited records with edits applied to question/answer.
std::vector<ConflictTriple> final_view(std::span<const ConflictTriple> records);

}  // namespace modconf
