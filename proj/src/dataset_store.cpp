#include "modconf/dataset_store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <fstream>
#include <unordered_map>

#include <fmt/format.h>

#include "modconf/error.hpp"
#include "modconf/random.hpp"
#include "modconf/rouge.hpp"
#include "modconf/text.hpp"

namespace modconf {

const ConflictTriple* DatasetFile::find(std::string_view record_id) const {
  auto it = std::find_if(records.begin(), records.end(),
                         [&](const ConflictTriple& t) { return t.record_id == record_id; });
  return it == records.end() ? nullptr : &*it;
}

DatasetFile load_dataset(const std::filesystem::path& path, LoadMode mode, std::vector<LoadIssue>* issues) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open dataset " + path.string());
  DatasetFile file;
  file.path = path;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      auto triple = triple_from_json(nlohmann::json::parse(line));
      if (!ids.insert(triple.record_id).second) {
        throw Error(ErrorCode::kDuplicateId, "duplicate record_id '" + triple.record_id + "'");
      }
      file.records.push_back(std::move(triple));
    } catch (const std::exception& e) {
      if (mode == LoadMode::kStrict) {
        auto* err = dynamic_cast<const Error*>(&e);
        if (err && err->code() == ErrorCode::kDuplicateId) {
          throw Error(ErrorCode::kDuplicateId, "line " + std::to_string(line_no) + ": " + e.what());
        }
        throw ParseError(line_no, e.what());
      }
      if (issues) issues->push_back({line_no, e.what()});
    }
  }
  return file;
}

void write_dataset(const std::filesystem::path& path, std::span<const ConflictTriple> records) {
  std::set<std::string> ids;
  for (const auto& r : records) {
    if (!ids.insert(r.record_id).second) {
      throw Error(ErrorCode::kDuplicateId, "duplicate record_id '" + r.record_id + "'");
    }
  }
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + tmp.string());
    for (const auto& r : records) out << to_jsonl_line(r) << '\n';
    out.flush();
    if (!out) throw Error(ErrorCode::kIoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot replace " + path.string() + ": " + ec.message());
}

DatasetWriter::DatasetWriter(const std::filesystem::path& path) : path_(path) {
  fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) throw Error(ErrorCode::kIoError, "cannot open " + path.string() + ": " + std::strerror(errno));
  if (::flock(fd_, LOCK_EX) != 0) {
    ::close(fd_);
    throw Error(ErrorCode::kIoError, "cannot lock " + path.string());
  }
  try {
    for (const auto& r : load_dataset(path, LoadMode::kStrict).records) ids_.insert(r.record_id);
  } catch (...) {
    ::close(fd_);
    throw;
  }
}

DatasetWriter::~DatasetWriter() {
  if (fd_ >= 0) ::close(fd_);  // releases the lock
}

void DatasetWriter::append(const ConflictTriple& triple) {
  triple.validate();
  if (ids_.contains(triple.record_id)) {
    throw Error(ErrorCode::kDuplicateId, "duplicate record_id '" + triple.record_id + "'");
  }
  std::string line = to_jsonl_line(triple) + '\n';
  std::size_t written = 0;
  while (written < line.size()) {
    auto n = ::write(fd_, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::kIoError, "write failed for " + path_.string() + ": " + std::strerror(errno));
    }
    written += static_cast<std::size_t>(n);
  }
  ids_.insert(triple.record_id);
}

void append(const std::filesystem::path& path, const ConflictTriple& triple) {
  DatasetWriter(path).append(triple);
}

// --- split ----------------------------------------------------------------------

void SplitSpec::validate() const {
  if (!(train_ratio > 0.0 && train_ratio < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "train_ratio must be in (0, 1)");
  }
}

std::size_t train_size(std::size_t n, double train_ratio) {
  // 1e-9 absorbs products such as 0.29 * 100 = 28.999999999999996.
  return static_cast<std::size_t>(std::floor(static_cast<double>(n) * train_ratio + 1e-9));
}

namespace {

std::vector<std::string> shuffled_ids(std::vector<std::string> ids, Rng& rng) {
  std::sort(ids.begin(), ids.end());
  rng.shuffle(ids);
  return ids;
}

}  // namespace

std::pair<DatasetFile, DatasetFile> split(const DatasetFile& dataset, const SplitSpec& spec) {
  spec.validate();
  const std::size_t n = dataset.records.size();
  const std::size_t n_train = train_size(n, spec.train_ratio);
  Rng rng(spec.seed);

  std::set<std::string> train_ids;
  if (!spec.stratified) {
    std::vector<std::string> ids;
    for (const auto& r : dataset.records) ids.push_back(r.record_id);
    ids = shuffled_ids(std::move(ids), rng);
    train_ids.insert(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
  } else {
    // Per-type quotas by largest remainder so the total stays floor(n * ratio).
    std::map<ConflictType, std::vector<std::string>> by_type;
    for (const auto& r : dataset.records) by_type[r.conflict_type].push_back(r.record_id);
    std::map<ConflictType, std::size_t> quota;
    std::vector<std::pair<double, ConflictType>> remainders;
    std::size_t assigned = 0;
    for (const auto& [type, ids] : by_type) {
      double exact = static_cast<double>(ids.size()) * static_cast<double>(n_train) / static_cast<double>(n);
      quota[type] = static_cast<std::size_t>(std::floor(exact + 1e-9));
      assigned += quota[type];
      remainders.emplace_back(exact - static_cast<double>(quota[type]), type);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; assigned < n_train && i < remainders.size(); ++i, ++assigned) {
      ++quota[remainders[i].second];
    }
    for (auto& [type, ids] : by_type) {
      auto shuffled = shuffled_ids(ids, rng);
      train_ids.insert(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(quota[type]));
    }
  }

  DatasetFile train, test;
  train.schema_version = test.schema_version = dataset.schema_version;
  for (const auto& r : dataset.records) {
    (train_ids.contains(r.record_id) ? train : test).records.push_back(r);
  }
  return {std::move(train), std::move(test)};
}

// --- stats ----------------------------------------------------------------------

DatasetStats compute_stats(std::span<const ConflictTriple> records, std::size_t top_k) {
  DatasetStats s;
  s.n = records.size();
  for (auto type : kAllConflictTypes) s.type_counts[type] = 0;
  for (auto status : kAllReviewStatuses) s.review_counts[status] = 0;

  std::map<ConflictType, std::map<std::string, std::unordered_map<std::string, std::size_t>>> freq;
  std::size_t question_tokens = 0, answer_tokens = 0;
  for (const auto& r : records) {
    ++s.type_counts[r.conflict_type];
    ++s.review_counts[r.review_status];
    auto q = tokenize(r.effective_question());
    auto a = tokenize(r.effective_answer());
    question_tokens += q.size();
    answer_tokens += a.size();
    for (const auto& t : q) ++freq[r.conflict_type]["question"][t];
    for (const auto& t : a) ++freq[r.conflict_type]["answer"][t];
  }
  for (auto type : kAllConflictTypes) {
    s.type_fractions[type] = s.n ? static_cast<double>(s.type_counts[type]) / static_cast<double>(s.n) : 0.0;
    for (const char* field : {"question", "answer"}) {
      std::vector<TokenCount> counts;
      for (const auto& [token, count] : freq[type][field]) counts.push_back({token, count});
      std::sort(counts.begin(), counts.end(), [](const TokenCount& a, const TokenCount& b) {
        return a.count != b.count ? a.count > b.count : a.token < b.token;
      });
      if (counts.size() > top_k) counts.resize(top_k);
      s.top_tokens[type][field] = std::move(counts);
    }
  }
  if (s.n) {
    s.mean_question_tokens = static_cast<double>(question_tokens) / static_cast<double>(s.n);
    s.mean_answer_tokens = static_cast<double>(answer_tokens) / static_cast<double>(s.n);
  }
  return s;
}

nlohmann::ordered_json to_json(const DatasetStats& s) {
  nlohmann::ordered_json j;
  j["n"] = s.n;
  nlohmann::ordered_json types;
  for (auto type : kAllConflictTypes) {
    types[std::string(to_string(type))] = {{"count", s.type_counts.at(type)},
                                           {"fraction", s.type_fractions.at(type)}};
  }
  j["conflict_types"] = std::move(types);
  nlohmann::ordered_json review;
  for (auto status : kAllReviewStatuses) review[std::string(to_string(status))] = s.review_counts.at(status);
  j["review_status"] = std::move(review);
  j["mean_question_tokens"] = s.mean_question_tokens;
  j["mean_answer_tokens"] = s.mean_answer_tokens;
  nlohmann::ordered_json top;
  for (const auto& [type, fields] : s.top_tokens) {
    nlohmann::ordered_json per_field;
    for (const char* field : {"question", "answer"}) {
      auto list = nlohmann::ordered_json::array();
      for (const auto& tc : fields.at(field)) list.push_back({tc.token, tc.count});
      per_field[field] = std::move(list);
    }
    top[std::string(to_string(type))] = std::move(per_field);
  }
  j["top_tokens"] = std::move(top);
  return j;
}

std::string to_table(const DatasetStats& s) {
  std::string out = fmt::format("records: {}\n\n{:<14} {:>8} {:>10}\n", s.n, "conflict type", "count", "fraction");
  for (auto type : kAllConflictTypes) {
    out += fmt::format("{:<14} {:>8} {:>10.4f}\n", to_string(type), s.type_counts.at(type),
                       s.type_fractions.at(type));
  }
  out += fmt::format("\n{:<14} {:>8}\n", "review status", "count");
  for (auto status : kAllReviewStatuses) {
    out += fmt::format("{:<14} {:>8}\n", to_string(status), s.review_counts.at(status));
  }
  out += fmt::format("\nmean question tokens: {:.2f}\nmean answer tokens:   {:.2f}\n", s.mean_question_tokens,
                     s.mean_answer_tokens);
  for (const auto& [type, fields] : s.top_tokens) {
    for (const char* field : {"question", "answer"}) {
      const auto& list = fields.at(field);
      if (list.empty()) continue;
      std::vector<std::string> parts;
      for (const auto& tc : list) parts.push_back(fmt::format("{}({})", tc.token, tc.count));
      out += fmt::format("top {} tokens [{}]: {}\n", field, to_string(type), text::join(parts, " "));
    }
  }
  return out;
}

std::vector<ConflictTriple> final_view(std::span<const ConflictTriple> records) {
  std::vector<ConflictTriple> out;
  for (const auto& r : records) {
    if (r.review_status != ReviewStatus::kAccepted && r.review_status != ReviewStatus::kEdited) continue;
    auto copy = r;
    copy.question = r.effective_question();
    copy.answer = r.effective_answer();
    out.push_back(std::move(copy));
  }
  return out;
}

}  // namespace modconf
