#pragma once

// Visual / textual information carriers and the three modality-conflict
// classifiers (object, attribute, relationship).
//
// Object identity across text and scene is name-level: text mentions carry no
// ids, so the classifiers compare normalized object names.

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace modconf {

using Vocabulary = std::set<std::string, std::less<>>;

// Lowercases (ASCII), trims and collapses internal whitespace. When `vocabulary`
// is given, a trailing "s" is stripped if the stripped form is in the vocabulary
// and the unstripped form is not. Throws Error(kInvalidName) if nothing is left.
std::string normalize_name(std::string_view raw, const Vocabulary* vocabulary = nullptr);

struct ObjectEntity {
  std::string id;
  std::string name;
  std::set<std::string> attributes;

  // Normalizes name and attributes; empty attributes are dropped.
  static ObjectEntity make(std::string id, std::string_view raw_name,
                           const std::vector<std::string>& raw_attributes = {},
                           const Vocabulary* vocabulary = nullptr);

  bool operator==(const ObjectEntity&) const = default;
};

struct Relationship {
  std::string subject_id;
  std::string predicate;
  std::string object_id;

  bool reflexive() const { return subject_id == object_id; }
  bool operator==(const Relationship&) const = default;
};

// Objects plus relationships with referential integrity. Immutable once built.
class EntityGraph {
 public:
  EntityGraph() = default;
  // Throws Error(kInvalidArgument) on duplicate ids, empty names or attributes,
  // empty predicates, or relationships that reference unknown ids.
  EntityGraph(std::vector<ObjectEntity> objects, std::vector<Relationship> relationships);

  const std::vector<ObjectEntity>& objects() const { return objects_; }
  const std::vector<Relationship>& relationships() const { return relationships_; }

  const ObjectEntity* find(std::string_view id) const;
  std::set<std::string> object_names() const;
  std::set<std::string> attribute_values() const;
  std::set<std::string> predicates() const;
  std::size_t reflexive_count() const;

 private:
  std::vector<ObjectEntity> objects_;
  std::vector<Relationship> relationships_;
};

class SceneGraph : public EntityGraph {
 public:
  SceneGraph() = default;
  SceneGraph(std::string image_id, std::vector<ObjectEntity> objects,
             std::vector<Relationship> relationships)
      : EntityGraph(std::move(objects), std::move(relationships)),
        image_id_(std::move(image_id)) {}

  const std::string& image_id() const { return image_id_; }

 private:
  std::string image_id_;
};

// What a piece of text asserts about the image.
class TextAnalysis : public EntityGraph {
 public:
  using EntityGraph::EntityGraph;

  struct Mention {
    std::string name;
    std::vector<std::string> attributes;
  };
  struct RelationMention {
    std::string subject;
    std::string predicate;
    std::string object;
  };

  // Builds an analysis from name-level mentions. Relationship endpoints resolve
  // to the first mention with that name; unknown endpoints become new objects.
  static TextAnalysis from_mentions(const std::vector<Mention>& objects,
                                    const std::vector<RelationMention>& relationships,
                                    const Vocabulary* vocabulary = nullptr);
};

enum class ConflictType { kObject, kAttribute, kRelationship };

std::string_view to_string(ConflictType type);
// Accepts "object" / "attribute" / "relationship" (case-insensitive).
std::optional<ConflictType> parse_conflict_type(std::string_view text);
inline constexpr ConflictType kAllConflictTypes[] = {
    ConflictType::kObject, ConflictType::kAttribute, ConflictType::kRelationship};

bool check_object_conflict(const TextAnalysis& text, const SceneGraph& scene);
bool check_attribute_conflict(const TextAnalysis& text, const SceneGraph& scene);
bool check_relationship_conflict(const TextAnalysis& text, const SceneGraph& scene);

// Object, then Attribute, then Relationship; nullopt when none holds.
std::optional<ConflictType> classify_conflict(const TextAnalysis& text, const SceneGraph& scene);

// --- Visual Genome style scene-graph files ---------------------------------

struct SceneGraphLoadStats {
  std::size_t images = 0;
  std::size_t dropped_objects = 0;
  std::size_t dropped_relationships = 0;
  std::size_t reflexive_relationships = 0;
};

SceneGraph parse_scene_graph(const nlohmann::json& record, SceneGraphLoadStats* stats = nullptr);
std::vector<SceneGraph> parse_scene_graphs(const nlohmann::json& document,
                                           SceneGraphLoadStats* stats = nullptr);
std::vector<SceneGraph> load_scene_graphs(const std::filesystem::path& path,
                                          SceneGraphLoadStats* stats = nullptr);

// Text analyses in the `classify` input layout:
// {"image_id", "objects": [{"name", "attributes"}], "relationships": [{"subject","predicate","object"}]}
TextAnalysis parse_text_analysis(const nlohmann::json& record, const Vocabulary* vocabulary = nullptr);

// Orders numeric ids numerically, everything else lexicographically.
bool image_id_less(std::string_view a, std::string_view b);

}  // namespace modconf
