#pragma once

// Shared helpers for the unit and acceptance suites: scratch directories, a
// scripted provider, independent oracles and synthetic corpora.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "modconf/conflict_triple.hpp"
#include "modconf/llm_gateway.hpp"
#include "modconf/scene_graph.hpp"
#include "modconf/synthesis.hpp"

namespace modconf::testing {

std::filesystem::path source_dir();
std::filesystem::path fixture_path(const std::string& relative);

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

// Answers by request tag; records every request it sees. Unknown tags raise
// missing-fixture-entry, like the replay provider.
class ScriptedProvider : public ChatProvider {
 public:
  ScriptedProvider() = default;
  explicit ScriptedProvider(std::map<std::string, std::string> replies) : replies_(std::move(replies)) {}
  ScriptedProvider(std::initializer_list<std::pair<const std::string, std::string>> replies) : replies_(replies) {}

  void set(const std::string& tag, std::string content);
  ChatResponse complete(const ChatRequest& request) override;

  std::vector<ChatRequest> requests() const;
  std::optional<ChatRequest> request(const std::string& tag) const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::string> replies_;
  std::vector<ChatRequest> seen_;
};

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};
CliResult run_cli(std::vector<std::string> args);

// --- oracles ----------------------------------------------------------------

// LCS by enumerating every subsequence of the shorter list (≤ 2^n candidates)
// and testing it against the longer one.
std::size_t brute_force_lcs(const std::vector<std::string>& a, const std::vector<std::string>& b);

// Plain-struct graphs for the conflict oracle, independent of the library types.
struct PlainObject {
  std::string name;
  std::set<std::string> attributes;
};
struct PlainRelation {
  std::size_t subject;
  std::string predicate;
  std::size_t object;
};
struct PlainGraph {
  std::vector<PlainObject> objects;
  std::vector<PlainRelation> relations;
};

struct OracleVerdict {
  bool object = false;
  bool attribute = false;
  bool relationship = false;
  std::optional<ConflictType> classified;
};
OracleVerdict conflict_oracle(const PlainGraph& text, const PlainGraph& scene);

PlainGraph random_graph(std::mt19937_64& rng, bool allow_empty);
// A text graph drawn to land near the scene (subset names, reused attributes and
// predicates) so every branch of the definitions is exercised.
PlainGraph random_text_for(const PlainGraph& scene, std::mt19937_64& rng);
SceneGraph to_scene(const PlainGraph& g, const std::string& image_id = "img");
TextAnalysis to_text(const PlainGraph& g);

// --- fixtures ---------------------------------------------------------------

ConflictTriple make_triple(const std::string& record_id, ConflictType type = ConflictType::kObject,
                           ReviewStatus status = ReviewStatus::kPending);
std::vector<ConflictTriple> make_triples(std::size_t n, std::uint64_t salt = 0);

// Synthetic pipeline corpus: image i (1-based) is an object, attribute or
// relationship case by i % 3, with replies for every request tag.
struct SyntheticCorpus {
  PipelineInputs inputs;
  Fixture fixture;
  nlohmann::json scene_json;
  nlohmann::json qa_json;
};
SyntheticCorpus make_synthetic_corpus(std::size_t images);

SceneGraph dogball_scene();

}  // namespace modconf::testing
