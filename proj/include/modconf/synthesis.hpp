#pragma once

// Modality-conflict dataset construction: base question sampling, key component
// detection, component substitution, conflict verification and answer
// generation. All model calls go through a ChatProvider.

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "modconf/conflict_triple.hpp"
#include "modconf/llm_gateway.hpp"
#include "modconf/scene_graph.hpp"

namespace modconf {

struct QaPair {
  std::string image_id;
  std::string question;
  std::string answer;
  std::string qa_id;
};

struct ImageIdLess {
  using is_transparent = void;
  bool operator()(std::string_view a, std::string_view b) const { return image_id_less(a, b); }
};

using QaPool = std::map<std::string, std::vector<QaPair>, ImageIdLess>;

// Accepts Visual Genome's question_answers layout ([{"id", "qas": [...]}]) or a
// flat array of {"image_id", "question", "answer"[, "qa_id"]}.
QaPool parse_qa_pool(const nlohmann::json& document);
QaPool load_qa_pool(const std::filesystem::path& path);

struct BaseQuestion {
  std::string image_id;
  std::string question;
  std::string answer;
};

// Uniform draw over the image's QA pairs, sorted by (question, answer, qa_id)
// first so the pick depends only on the seed. Throws kNoQuestionsForImage.
BaseQuestion sample_base_question(std::string_view image_id, const QaPool& pool, std::uint64_t seed);

struct SynthesisConfig {
  std::string model = "gpt-4o-mini";
  std::optional<double> temperature;  // provider default
  int max_tokens = 256;
  std::size_t count = 0;  // 0: one attempt per image
  // Relative weights for object / attribute / relationship among available types.
  std::array<double, 3> type_weights{1.0, 1.0, 1.0};
  int jobs = 1;

  void validate() const;
  static SynthesisConfig from_json(const nlohmann::json& j);
};

struct KeyComponents {
  std::string source_text;             // the question the components came from
  std::vector<std::string> extracted;  // free-form components from the first prompt
  std::vector<std::string> objects;    // filtered to scene object names
  std::vector<std::string> attributes; // filtered to scene attribute values
  std::vector<std::string> relationships;  // filtered to scene predicates
  std::vector<std::string> tags;       // request tags used, in order

  bool empty() const { return objects.empty() && attributes.empty() && relationships.empty(); }
};

// Splits a comma-separated model answer into normalized items. "None" yields an
// empty list. Throws Error(kComponentParseFailure) carrying the raw text when
// the answer is empty or is prose rather than a word list.
std::vector<std::string> parse_component_list(std::string_view response);

// Sends the extract prompt, then the candidate-filter prompt once per vocabulary
// (object names, attribute values, predicates) with the extracted text. Empty
// vocabularies are not sent. Tags: <prefix>/extract, <prefix>/objects, ...
KeyComponents detect_key_components(std::string_view question, const SceneGraph& scene, ChatProvider& provider,
                                    std::string_view tag_prefix, const SynthesisConfig& config = {});

struct SubstitutionPlan {
  ConflictType conflict_type = ConflictType::kObject;
  std::vector<std::string> components_to_modify;
  std::vector<std::string> excluded_objects;  // object plans only

  void validate() const;
};

// Picks a conflict type among those with detected components (weighted by
// `weights`), then one component of that type. Object plans exclude every scene
// object name. Throws kNoSubstitutableComponents.
SubstitutionPlan plan_substitution(const BaseQuestion& base, const KeyComponents& components,
                                   const SceneGraph& scene, std::uint64_t seed,
                                   const std::array<double, 3>& weights = {1.0, 1.0, 1.0});

ChatRequest build_substitution_request(const SubstitutionPlan& plan, const BaseQuestion& base, std::string tag,
                                       const SynthesisConfig& config = {});

// Returns the first non-empty line of the reply, trimmed and unquoted. Throws
// kSubstitutionFailure when it is empty or restates the base question.
std::string substitute_components(const SubstitutionPlan& plan, const BaseQuestion& base, ChatProvider& provider,
                                  std::string tag, const SynthesisConfig& config = {});

struct AnswerInput {
  std::string question;  // conflicted question
  std::optional<ConflictType> conflict_type;
  std::string key_component;  // what the image actually contains
  std::string origin_question;
  std::string origin_answer;
};

ChatRequest build_answer_request(const AnswerInput& input, std::string tag, const SynthesisConfig& config = {});

// Text-only: no image content is ever sent. Throws kPrecondition before any call
// if a field is missing, kAnswerFailure on an empty reply.
std::string generate_answer(const AnswerInput& input, ChatProvider& provider, std::string tag,
                            const SynthesisConfig& config = {});

// Name-level reading of detected components: each extracted phrase becomes an
// object (longest suffix matching a scene object name, else the whole phrase)
// whose remaining words are attributes; each detected predicate links the
// nearest object mentions before and after it in the source text.
TextAnalysis text_analysis(const KeyComponents& components, const SceneGraph& scene);

bool verify_generated_conflict(const KeyComponents& components, const SceneGraph& scene);

struct SkipRecord {
  std::string image_id;
  std::string stage;
  std::string error_code;
  std::string message;
};
nlohmann::ordered_json to_json(const SkipRecord& skip);

struct PipelineInputs {
  std::vector<SceneGraph> scenes;
  QaPool qa_pool;

  static PipelineInputs load(const std::filesystem::path& scene_graphs, const std::filesystem::path& qa_pool);
};

struct PipelineResult {
  std::vector<ConflictTriple> triples;  // ordered by image id
  std::vector<SkipRecord> skips;        // ordered by image id
};

std::string record_id_for(std::string_view image_id);

// One attempt for one image. Returns the pending triple, or nullopt with `skip`
// filled in.
std::optional<ConflictTriple> synthesize_image(const SceneGraph& scene, const QaPool& pool,
                                               ChatProvider& provider, const SynthesisConfig& config,
                                               std::uint64_t seed, SkipRecord& skip);

// Processes images in image-id order, `config.jobs` at a time, until
// `config.count` triples exist (or images run out). Per-image failures become
// skip records. Output order is independent of scheduling.
PipelineResult run_pipeline(const PipelineInputs& inputs, const SynthesisConfig& config, ChatProvider& provider,
                            std::uint64_t seed,
                            const std::function<void(const ConflictTriple&)>& on_triple = {});

}  // namespace modconf
