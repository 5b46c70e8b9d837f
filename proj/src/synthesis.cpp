#include "modconf/synthesis.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include <spdlog/spdlog.h>

#include "modconf/error.hpp"
#include "modconf/parallel.hpp"
#include "modconf/prompts.hpp"
#include "modconf/random.hpp"
#include "modconf/text.hpp"

namespace modconf {

// --- QA pool ----------------------------------------------------------------------

namespace {

std::string json_id(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw Error(ErrorCode::kSchemaError, "identifier must be a string or integer");
}

void add_qa(QaPool& pool, const nlohmann::json& qa, const std::string& image_id) {
  QaPair pair;
  pair.image_id = image_id;
  pair.question = std::string(text::trim(qa.at("question").get<std::string>()));
  pair.answer = std::string(text::trim(qa.at("answer").get<std::string>()));
  if (qa.contains("qa_id")) pair.qa_id = json_id(qa.at("qa_id"));
  if (pair.question.empty() || pair.answer.empty()) return;
  pool[image_id].push_back(std::move(pair));
}

}  // namespace

QaPool parse_qa_pool(const nlohmann::json& document) {
  if (!document.is_array()) throw Error(ErrorCode::kSchemaError, "QA file must hold a JSON array");
  QaPool pool;
  try {
    for (const auto& entry : document) {
      if (entry.contains("qas")) {
        std::string image_id = json_id(entry.contains("id") ? entry.at("id") : entry.at("image_id"));
        for (const auto& qa : entry.at("qas")) {
          add_qa(pool, qa, qa.contains("image_id") ? json_id(qa.at("image_id")) : image_id);
        }
      } else {
        add_qa(pool, entry, json_id(entry.at("image_id")));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchemaError, std::string("QA file: ") + e.what());
  }
  return pool;
}

QaPool load_qa_pool(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open QA file " + path.string());
  try {
    return parse_qa_pool(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kIoError, path.string() + ": " + e.what());
  }
}

BaseQuestion sample_base_question(std::string_view image_id, const QaPool& pool, std::uint64_t seed) {
  auto it = pool.find(image_id);
  if (it == pool.end() || it->second.empty()) {
    throw Error(ErrorCode::kNoQuestionsForImage, "no questions for image '" + std::string(image_id) + "'");
  }
  auto ordered = it->second;
  std::sort(ordered.begin(), ordered.end(), [](const QaPair& a, const QaPair& b) {
    return std::tie(a.question, a.answer, a.qa_id) < std::tie(b.question, b.answer, b.qa_id);
  });
  Rng rng(derive_seed(seed, image_id));
  const auto& pick = ordered[rng.below(ordered.size())];
  return {std::string(image_id), pick.question, pick.answer};
}

// --- config -------------------------------------------------------------------------

void SynthesisConfig::validate() const {
  if (max_tokens <= 0) throw Error(ErrorCode::kInvalidArgument, "max_tokens must be positive");
  if (temperature && !(*temperature >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "temperature must be >= 0");
  if (jobs < 1) throw Error(ErrorCode::kInvalidArgument, "jobs must be >= 1");
  double total = 0;
  for (double w : type_weights) {
    if (!(w >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "type ratios must be non-negative");
    total += w;
  }
  if (total <= 0) throw Error(ErrorCode::kInvalidArgument, "at least one type ratio must be positive");
}

SynthesisConfig SynthesisConfig::from_json(const nlohmann::json& j) {
  SynthesisConfig c;
  c.model = j.value("model", c.model);
  if (j.contains("temperature") && !j["temperature"].is_null()) c.temperature = j["temperature"].get<double>();
  c.max_tokens = j.value("max_tokens", c.max_tokens);
  c.count = j.value("count", c.count);
  c.jobs = j.value("jobs", c.jobs);
  if (j.contains("type_ratios")) {
    const auto& r = j["type_ratios"];
    c.type_weights = {r.value("object", 1.0), r.value("attribute", 1.0), r.value("relationship", 1.0)};
  }
  c.validate();
  return c;
}

// --- detection ----------------------------------------------------------------------

namespace {

ChatRequest synthesis_request(std::string prompt, std::string tag, const SynthesisConfig& config) {
  return ChatRequest::user_prompt(config.model, std::move(prompt), std::move(tag), config.temperature,
                                  config.max_tokens);
}

std::string_view strip_decorations(std::string_view s) {
  static constexpr std::string_view kDecor = "`'\"*.;-";
  s = text::trim(s);
  while (!s.empty() && kDecor.find(s.front()) != std::string_view::npos) s = text::trim(s.substr(1));
  while (!s.empty() && kDecor.find(s.back()) != std::string_view::npos) s = text::trim(s.substr(0, s.size() - 1));
  return s;
}

std::vector<std::string> filter_to_vocabulary(const std::vector<std::string>& items, const Vocabulary& vocab) {
  std::vector<std::string> out;
  for (const auto& item : items) {
    auto name = normalize_name(item, &vocab);
    if (vocab.contains(name) && std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
  }
  return out;
}

Vocabulary to_vocabulary(const std::set<std::string>& s) { return Vocabulary(s.begin(), s.end()); }

std::string candidate_list(const Vocabulary& vocab) {
  return text::join(std::vector<std::string>(vocab.begin(), vocab.end()), ", ");
}

}  // namespace

std::vector<std::string> parse_component_list(std::string_view response) {
  auto trimmed = text::trim(response);
  if (trimmed.empty()) {
    throw Error(ErrorCode::kComponentParseFailure, "empty component list");
  }
  if (text::iequals(strip_decorations(trimmed), "none")) return {};
  std::vector<std::string> items;
  for (auto& line : text::split(trimmed, '\n')) {
    for (auto& raw : text::split(line, ',')) {
      auto item = text::to_lower(text::collapse_spaces(strip_decorations(raw)));
      if (item.empty() || item == "none") continue;
      if (item.find(':') != std::string::npos || text::split_whitespace(item).size() > 6) {
        throw Error(ErrorCode::kComponentParseFailure,
                    "not a component list: " + std::string(trimmed));
      }
      if (std::find(items.begin(), items.end(), item) == items.end()) items.push_back(std::move(item));
    }
  }
  return items;
}

KeyComponents detect_key_components(std::string_view question, const SceneGraph& scene, ChatProvider& provider,
                                    std::string_view tag_prefix, const SynthesisConfig& config) {
  KeyComponents out;
  out.source_text = std::string(question);
  const std::string prefix(tag_prefix);

  auto extract_tag = prefix + "/extract";
  auto extract = provider.complete(synthesis_request(
      prompts::fill(prompts::Template::kExtractComponents, {{"question", std::string(question)}}), extract_tag,
      config));
  out.tags.push_back(extract_tag);
  out.extracted = parse_component_list(extract.content);
  if (out.extracted.empty()) return out;
  const std::string extracted_text(text::trim(extract.content));

  auto filter = [&](const char* kind, const Vocabulary& vocab) -> std::vector<std::string> {
    if (vocab.empty()) return {};
    auto tag = prefix + "/" + kind;
    auto reply = provider.complete(synthesis_request(
        prompts::fill(prompts::Template::kFilterCandidates,
                      {{"text", extracted_text}, {"candidate_words", candidate_list(vocab)}}),
        tag, config));
    out.tags.push_back(tag);
    return filter_to_vocabulary(parse_component_list(reply.content), vocab);
  };
  out.objects = filter("objects", to_vocabulary(scene.object_names()));
  out.attributes = filter("attributes", to_vocabulary(scene.attribute_values()));
  out.relationships = filter("relationships", to_vocabulary(scene.predicates()));
  return out;
}

// --- substitution --------------------------------------------------------------------

void SubstitutionPlan::validate() const {
  if (components_to_modify.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "substitution plan has no components");
  }
  if ((conflict_type == ConflictType::kObject) != !excluded_objects.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "excluded objects are required exactly for object plans");
  }
}

SubstitutionPlan plan_substitution(const BaseQuestion& base, const KeyComponents& components,
                                   const SceneGraph& scene, std::uint64_t seed,
                                   const std::array<double, 3>& weights) {
  const std::vector<std::string>* lists[] = {&components.objects, &components.attributes,
                                             &components.relationships};
  std::vector<double> available(3, 0.0);
  for (std::size_t i = 0; i < 3; ++i) available[i] = lists[i]->empty() ? 0.0 : weights[i];
  if (std::all_of(available.begin(), available.end(), [](double w) { return w <= 0.0; })) {
    throw Error(ErrorCode::kNoSubstitutableComponents,
                "no substitutable components in '" + base.question + "'");
  }
  Rng rng(seed);
  const std::size_t kind = rng.weighted(available);
  const auto& pool = *lists[kind];

  SubstitutionPlan plan;
  plan.conflict_type = kAllConflictTypes[kind];
  plan.components_to_modify.push_back(pool[rng.below(pool.size())]);
  if (plan.conflict_type == ConflictType::kObject) {
    auto names = scene.object_names();
    plan.excluded_objects.assign(names.begin(), names.end());
  }
  plan.validate();
  return plan;
}

ChatRequest build_substitution_request(const SubstitutionPlan& plan, const BaseQuestion& base, std::string tag,
                                       const SynthesisConfig& config) {
  plan.validate();
  const auto components = text::join(plan.components_to_modify, ", ");
  std::string prompt;
  switch (plan.conflict_type) {
    case ConflictType::kObject:
      prompt = prompts::fill(prompts::Template::kSubstituteObject,
                             {{"origin_question", base.question},
                              {"objects_to_modify", components},
                              {"objects_excluded", text::join(plan.excluded_objects, ", ")}});
      break;
    case ConflictType::kAttribute:
      prompt = prompts::fill(prompts::Template::kSubstituteAttribute,
                             {{"origin_question", base.question}, {"attributes_to_modify", components}});
      break;
    case ConflictType::kRelationship:
      prompt = prompts::fill(prompts::Template::kSubstituteRelationship,
                             {{"origin_question", base.question}, {"relationships_to_modify", components}});
      break;
  }
  return synthesis_request(std::move(prompt), std::move(tag), config);
}

std::string substitute_components(const SubstitutionPlan& plan, const BaseQuestion& base, ChatProvider& provider,
                                  std::string tag, const SynthesisConfig& config) {
  auto reply = provider.complete(build_substitution_request(plan, base, std::move(tag), config));
  std::string line;
  for (const auto& candidate : text::split(reply.content, '\n')) {
    if (!text::trim(candidate).empty()) {
      line = std::string(text::trim(candidate));
      break;
    }
  }
  if (line.size() >= 2 && line.front() == '"' && line.back() == '"') {
    line = std::string(text::trim(std::string_view(line).substr(1, line.size() - 2)));
  }
  if (line.empty()) throw Error(ErrorCode::kSubstitutionFailure, "empty counterfactual question");
  if (same_question(line, base.question)) {
    throw Error(ErrorCode::kSubstitutionFailure, "counterfactual question restates the base question");
  }
  return std::string(line);
}

// --- answer generation -------------------------------------------------------------

ChatRequest build_answer_request(const AnswerInput& input, std::string tag, const SynthesisConfig& config) {
  auto require = [](const std::string& v, const char* name) {
    if (text::trim(v).empty()) throw Error(ErrorCode::kPrecondition, std::string(name) + " is missing");
  };
  require(input.question, "question");
  require(input.key_component, "key_component");
  require(input.origin_question, "origin_question");
  require(input.origin_answer, "origin_answer");
  if (!input.conflict_type) throw Error(ErrorCode::kPrecondition, "conflict_type is missing");
  auto prompt = prompts::fill(prompts::Template::kGenerateAnswer,
                              {{"question", input.question},
                               {"conflict_type", std::string(to_string(*input.conflict_type))},
                               {"key_component", input.key_component},
                               {"origin_question", input.origin_question},
                               {"origin_answer", input.origin_answer}});
  return synthesis_request(std::move(prompt), std::move(tag), config);
}

std::string generate_answer(const AnswerInput& input, ChatProvider& provider, std::string tag,
                            const SynthesisConfig& config) {
  auto request = build_answer_request(input, std::move(tag), config);
  auto reply = provider.complete(request);
  auto answer = text::trim(reply.content);
  if (answer.empty()) throw Error(ErrorCode::kAnswerFailure, "empty answer");
  return std::string(answer);
}

// --- verification -------------------------------------------------------------------

namespace {

const std::set<std::string, std::less<>>& determiners() {
  static const std::set<std::string, std::less<>> words = {
      "a", "an", "the", "this", "that", "these", "those", "his", "her", "its",
      "their", "my", "your", "our", "some", "any", "each", "every"};
  return words;
}

// Word-boundary search in lowercase text.
std::size_t find_word(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return std::string_view::npos;
  std::size_t pos = haystack.find(needle);
  while (pos != std::string_view::npos) {
    bool left = pos == 0 || !std::isalnum(static_cast<unsigned char>(haystack[pos - 1]));
    std::size_t end = pos + needle.size();
    bool right = end >= haystack.size() || !std::isalnum(static_cast<unsigned char>(haystack[end]));
    if (left && right) return pos;
    pos = haystack.find(needle, pos + 1);
  }
  return std::string_view::npos;
}

}  // namespace

TextAnalysis text_analysis(const KeyComponents& components, const SceneGraph& scene) {
  const Vocabulary vocab = to_vocabulary(scene.object_names());
  const std::string source = text::to_lower(components.source_text);
  const std::set<std::string> attribute_words(components.attributes.begin(), components.attributes.end());
  const std::set<std::string> predicate_words(components.relationships.begin(), components.relationships.end());

  struct Placed {
    std::size_t position;
    TextAnalysis::Mention mention;
  };
  std::vector<Placed> placed;
  std::vector<std::pair<std::size_t, std::string>> loose_attributes;
  std::set<std::string> seen_phrases;

  auto place = [&](const std::string& phrase) {
    if (!seen_phrases.insert(phrase).second) return;
    std::vector<std::string> words;
    for (auto w : text::split_whitespace(phrase)) words.emplace_back(w);
    while (!words.empty() && determiners().contains(words.front())) words.erase(words.begin());
    if (words.empty()) return;
    std::string joined = text::join(words, " ");
    if (words.size() == 1 && predicate_words.contains(joined)) return;
    if (words.size() == 1 && attribute_words.contains(joined) && !vocab.contains(joined)) {
      loose_attributes.emplace_back(find_word(source, joined), joined);
      return;
    }
    TextAnalysis::Mention mention;
    std::size_t head = words.size();
    for (std::size_t k = words.size(); k >= 1; --k) {
      std::vector<std::string> suffix(words.end() - static_cast<std::ptrdiff_t>(k), words.end());
      auto name = normalize_name(text::join(suffix, " "), &vocab);
      if (vocab.contains(name)) {
        mention.name = name;
        head = words.size() - k;
        break;
      }
    }
    if (mention.name.empty()) {
      mention.name = normalize_name(joined, &vocab);
      head = 0;
    }
    for (std::size_t i = 0; i < head; ++i) {
      if (!determiners().contains(words[i])) mention.attributes.push_back(words[i]);
    }
    auto pos = find_word(source, joined);
    if (pos == std::string_view::npos) pos = find_word(source, mention.name);
    placed.push_back({pos, std::move(mention)});
  };
  for (const auto& phrase : components.extracted) place(phrase);
  for (const auto& name : components.objects) {
    bool covered = std::any_of(placed.begin(), placed.end(),
                               [&](const Placed& p) { return p.mention.name == name; });
    if (!covered) place(name);
  }

  // Standalone attribute words attach to the next object mention in the text,
  // or the previous one if none follows.
  for (const auto& [pos, attr] : loose_attributes) {
    Placed* before = nullptr;
    Placed* after = nullptr;
    for (auto& p : placed) {
      if (p.position == std::string_view::npos || pos == std::string_view::npos) continue;
      if (p.position > pos && (!after || p.position < after->position)) after = &p;
      if (p.position < pos && (!before || p.position > before->position)) before = &p;
    }
    Placed* target = after ? after : before;
    if (!target && !placed.empty()) target = &placed.front();
    if (target) target->mention.attributes.push_back(attr);
  }

  std::vector<TextAnalysis::RelationMention> relations;
  for (const auto& predicate : components.relationships) {
    auto pos = find_word(source, predicate);
    if (pos == std::string_view::npos) continue;
    const Placed* subject = nullptr;
    const Placed* object = nullptr;
    for (const auto& p : placed) {
      if (p.position == std::string_view::npos) continue;
      if (p.position < pos && (!subject || p.position > subject->position)) subject = &p;
      if (p.position > pos + predicate.size() - 1 && (!object || p.position < object->position)) object = &p;
    }
    if (subject && object) relations.push_back({subject->mention.name, predicate, object->mention.name});
  }

  std::vector<TextAnalysis::Mention> mentions;
  for (auto& p : placed) mentions.push_back(std::move(p.mention));
  return TextAnalysis::from_mentions(mentions, relations, &vocab);
}

bool verify_generated_conflict(const KeyComponents& components, const SceneGraph& scene) {
  if (components.extracted.empty() && components.empty()) return false;
  return classify_conflict(text_analysis(components, scene), scene).has_value();
}

// --- pipeline -----------------------------------------------------------------------

nlohmann::ordered_json to_json(const SkipRecord& skip) {
  nlohmann::ordered_json j;
  j["image_id"] = skip.image_id;
  j["stage"] = skip.stage;
  j["error_code"] = skip.error_code;
  j["message"] = skip.message;
  return j;
}

PipelineInputs PipelineInputs::load(const std::filesystem::path& scene_graphs, const std::filesystem::path& qa_pool) {
  PipelineInputs inputs;
  inputs.scenes = load_scene_graphs(scene_graphs);
  inputs.qa_pool = load_qa_pool(qa_pool);
  return inputs;
}

std::string record_id_for(std::string_view image_id) { return "mc-" + std::string(image_id); }

std::optional<ConflictTriple> synthesize_image(const SceneGraph& scene, const QaPool& pool,
                                               ChatProvider& provider, const SynthesisConfig& config,
                                               std::uint64_t seed, SkipRecord& skip) {
  const auto& id = scene.image_id();
  std::string stage = "sample";
  try {
    auto base = sample_base_question(id, pool, seed);

    stage = "detect";
    auto detected = detect_key_components(base.question, scene, provider, id + "/detect", config);

    stage = "plan";
    auto plan = plan_substitution(base, detected, scene, derive_seed(seed, "plan/" + id), config.type_weights);

    stage = "substitute";
    const auto substitute_tag = id + "/substitute";
    auto question = substitute_components(plan, base, provider, substitute_tag, config);

    stage = "verify";
    auto redetected = detect_key_components(question, scene, provider, id + "/verify", config);
    if (!verify_generated_conflict(redetected, scene)) {
      throw Error(ErrorCode::kVerificationFailed, "no modality conflict detected in '" + question + "'");
    }

    stage = "answer";
    const auto answer_tag = id + "/answer";
    auto answer = generate_answer(
        {question, plan.conflict_type, text::join(plan.components_to_modify, ", "), base.question, base.answer},
        provider, answer_tag, config);

    ConflictTriple triple;
    triple.record_id = record_id_for(id);
    triple.image_id = id;
    triple.conflict_type = plan.conflict_type;
    triple.question = std::move(question);
    triple.answer = std::move(answer);
    triple.provenance.base_question = base.question;
    triple.provenance.base_answer = base.answer;
    triple.provenance.components_modified = plan.components_to_modify;
    auto& tags = triple.provenance.prompts_used;
    tags = detected.tags;
    tags.push_back(substitute_tag);
    tags.insert(tags.end(), redetected.tags.begin(), redetected.tags.end());
    tags.push_back(answer_tag);
    triple.validate();
    return triple;
  } catch (const Error& e) {
    skip = {id, stage, std::string(e.code_name()), e.what()};
  } catch (const std::exception& e) {
    skip = {id, stage, "internal", e.what()};
  }
  return std::nullopt;
}

PipelineResult run_pipeline(const PipelineInputs& inputs, const SynthesisConfig& config, ChatProvider& provider,
                            std::uint64_t seed, const std::function<void(const ConflictTriple&)>& on_triple) {
  config.validate();
  std::vector<const SceneGraph*> scenes;
  for (const auto& s : inputs.scenes) scenes.push_back(&s);
  std::stable_sort(scenes.begin(), scenes.end(),
                   [](const auto* a, const auto* b) { return image_id_less(a->image_id(), b->image_id()); });

  PipelineResult result;
  std::set<std::string> seen;
  std::vector<const SceneGraph*> unique;
  for (const auto* s : scenes) {
    if (seen.insert(s->image_id()).second) {
      unique.push_back(s);
    } else {
      result.skips.push_back({s->image_id(), "load", "duplicate-id", "duplicate scene graph for image"});
    }
  }

  const std::size_t wanted = config.count ? config.count : unique.size();
  std::size_t next = 0;
  while (next < unique.size() && result.triples.size() < wanted) {
    const std::size_t window =
        std::min({static_cast<std::size_t>(config.jobs), wanted - result.triples.size(), unique.size() - next});
    std::vector<std::optional<ConflictTriple>> produced(window);
    std::vector<SkipRecord> skips(window);
    parallel_for(window, config.jobs, [&](std::size_t i) {
      produced[i] = synthesize_image(*unique[next + i], inputs.qa_pool, provider, config, seed, skips[i]);
    });
    for (std::size_t i = 0; i < window && result.triples.size() < wanted; ++i) {
      if (produced[i]) {
        if (on_triple) on_triple(*produced[i]);
        result.triples.push_back(std::move(*produced[i]));
      } else {
        spdlog::info("skip image {} at {}: [{}] {}", skips[i].image_id, skips[i].stage, skips[i].error_code,
                     skips[i].message);
        result.skips.push_back(std::move(skips[i]));
      }
    }
    next += window;
  }
  return result;
}

}  // namespace modconf
