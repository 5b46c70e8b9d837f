#include "modconf/scene_graph.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <unordered_set>

#include "modconf/error.hpp"
#include "modconf/text.hpp"

namespace modconf {

std::string normalize_name(std::string_view raw, const Vocabulary* vocabulary) {
  std::string name = text::to_lower(text::collapse_spaces(raw));
  if (name.empty()) {
    throw Error(ErrorCode::kInvalidName, "name is empty after normalization");
  }
  if (vocabulary != nullptr && name.size() > 1 && name.back() == 's' &&
      !vocabulary->contains(name)) {
    std::string singular = name.substr(0, name.size() - 1);
    if (vocabulary->contains(singular)) return singular;
  }
  return name;
}

ObjectEntity ObjectEntity::make(std::string id, std::string_view raw_name,
                                const std::vector<std::string>& raw_attributes,
                                const Vocabulary* vocabulary) {
  ObjectEntity entity;
  entity.id = std::move(id);
  entity.name = normalize_name(raw_name, vocabulary);
  for (const auto& attr : raw_attributes) {
    auto normalized = text::to_lower(text::collapse_spaces(attr));
    if (!normalized.empty()) entity.attributes.insert(std::move(normalized));
  }
  return entity;
}

// --- EntityGraph ------------------------------------------------------------

EntityGraph::EntityGraph(std::vector<ObjectEntity> objects, std::vector<Relationship> relationships)
    : objects_(std::move(objects)), relationships_(std::move(relationships)) {
  std::unordered_set<std::string> ids;
  for (const auto& obj : objects_) {
    if (!ids.insert(obj.id).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate object id '" + obj.id + "'");
    }
    if (obj.name.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "object '" + obj.id + "' has an empty name");
    }
    if (obj.attributes.contains("")) {
      throw Error(ErrorCode::kInvalidArgument, "object '" + obj.id + "' has an empty attribute");
    }
  }
  for (const auto& rel : relationships_) {
    if (text::trim(rel.predicate).empty()) {
      throw Error(ErrorCode::kInvalidArgument, "relationship with empty predicate");
    }
    if (!ids.contains(rel.subject_id) || !ids.contains(rel.object_id)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "relationship '" + rel.predicate + "' references an unknown object id");
    }
  }
}

const ObjectEntity* EntityGraph::find(std::string_view id) const {
  auto it = std::find_if(objects_.begin(), objects_.end(),
                         [&](const ObjectEntity& o) { return o.id == id; });
  return it == objects_.end() ? nullptr : &*it;
}

std::set<std::string> EntityGraph::object_names() const {
  std::set<std::string> names;
  for (const auto& obj : objects_) names.insert(obj.name);
  return names;
}

std::set<std::string> EntityGraph::attribute_values() const {
  std::set<std::string> values;
  for (const auto& obj : objects_) values.insert(obj.attributes.begin(), obj.attributes.end());
  return values;
}

std::set<std::string> EntityGraph::predicates() const {
  std::set<std::string> values;
  for (const auto& rel : relationships_) values.insert(rel.predicate);
  return values;
}

std::size_t EntityGraph::reflexive_count() const {
  return static_cast<std::size_t>(std::count_if(
      relationships_.begin(), relationships_.end(), [](const Relationship& r) { return r.reflexive(); }));
}

TextAnalysis TextAnalysis::from_mentions(const std::vector<Mention>& objects,
                                         const std::vector<RelationMention>& relationships,
                                         const Vocabulary* vocabulary) {
  std::vector<ObjectEntity> entities;
  std::map<std::string, std::string> first_id_by_name;
  auto add = [&](std::string_view raw, const std::vector<std::string>& attrs) -> const std::string& {
    auto entity = ObjectEntity::make("t" + std::to_string(entities.size()), raw, attrs, vocabulary);
    auto [it, inserted] = first_id_by_name.emplace(entity.name, entity.id);
    entities.push_back(std::move(entity));
    return it->second;
  };
  for (const auto& m : objects) add(m.name, m.attributes);

  std::vector<Relationship> rels;
  for (const auto& r : relationships) {
    auto resolve = [&](std::string_view raw) {
      auto name = normalize_name(raw, vocabulary);
      auto it = first_id_by_name.find(name);
      if (it != first_id_by_name.end()) return it->second;
      return add(raw, {});
    };
    std::string subject = resolve(r.subject);
    std::string object = resolve(r.object);
    auto predicate = text::to_lower(text::collapse_spaces(r.predicate));
    rels.push_back({std::move(subject), std::move(predicate), std::move(object)});
  }
  return TextAnalysis(std::move(entities), std::move(rels));
}

// --- classifiers --------------------------------------------------------------

std::string_view to_string(ConflictType type) {
  switch (type) {
    case ConflictType::kObject: return "object";
    case ConflictType::kAttribute: return "attribute";
    case ConflictType::kRelationship: return "relationship";
  }
  return "object";
}

std::optional<ConflictType> parse_conflict_type(std::string_view s) {
  auto lower = text::to_lower(text::trim(s));
  for (auto type : kAllConflictTypes) {
    if (lower == to_string(type)) return type;
  }
  return std::nullopt;
}

namespace {

bool names_subset(const TextAnalysis& text, const SceneGraph& scene) {
  auto scene_names = scene.object_names();
  return std::all_of(text.objects().begin(), text.objects().end(),
                     [&](const ObjectEntity& o) { return scene_names.contains(o.name); });
}

}  // namespace

bool check_object_conflict(const TextAnalysis& text, const SceneGraph& scene) {
  return !names_subset(text, scene);
}

bool check_attribute_conflict(const TextAnalysis& text, const SceneGraph& scene) {
  if (!names_subset(text, scene)) return false;
  for (const auto& mention : text.objects()) {
    if (mention.attributes.empty()) continue;
    bool satisfied = std::any_of(
        scene.objects().begin(), scene.objects().end(), [&](const ObjectEntity& candidate) {
          return candidate.name == mention.name &&
                 std::includes(candidate.attributes.begin(), candidate.attributes.end(),
                               mention.attributes.begin(), mention.attributes.end());
        });
    if (!satisfied) return true;
  }
  return false;
}

bool check_relationship_conflict(const TextAnalysis& text, const SceneGraph& scene) {
  if (!names_subset(text, scene)) return false;
  // (subject name, predicate, object name) triples present in the scene.
  std::set<std::tuple<std::string, std::string, std::string>> scene_triples;
  for (const auto& rel : scene.relationships()) {
    scene_triples.emplace(scene.find(rel.subject_id)->name, rel.predicate,
                          scene.find(rel.object_id)->name);
  }
  for (const auto& rel : text.relationships()) {
    const auto& subject = text.find(rel.subject_id)->name;
    const auto& object = text.find(rel.object_id)->name;
    if (!scene_triples.contains({subject, rel.predicate, object})) return true;
  }
  return false;
}

std::optional<ConflictType> classify_conflict(const TextAnalysis& text, const SceneGraph& scene) {
  if (check_object_conflict(text, scene)) return ConflictType::kObject;
  if (check_attribute_conflict(text, scene)) return ConflictType::kAttribute;
  if (check_relationship_conflict(text, scene)) return ConflictType::kRelationship;
  return std::nullopt;
}

// --- loaders ------------------------------------------------------------------

namespace {

std::string id_string(const nlohmann::json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return std::to_string(value.get<long long>());
  if (value.is_number_unsigned()) return std::to_string(value.get<unsigned long long>());
  throw Error(ErrorCode::kSchemaError, "identifier must be a string or integer");
}

std::optional<std::string> endpoint_id(const nlohmann::json& rel, const char* flat, const char* nested) {
  if (rel.contains(flat)) return id_string(rel.at(flat));
  if (rel.contains(nested) && rel.at(nested).is_object()) {
    const auto& obj = rel.at(nested);
    if (obj.contains("object_id")) return id_string(obj.at("object_id"));
    if (obj.contains("id")) return id_string(obj.at("id"));
  }
  return std::nullopt;
}

}  // namespace

SceneGraph parse_scene_graph(const nlohmann::json& record, SceneGraphLoadStats* stats) {
  SceneGraphLoadStats local;
  auto& st = stats ? *stats : local;
  if (!record.is_object()) throw Error(ErrorCode::kSchemaError, "scene graph record must be an object");
  std::string image_id = record.contains("image_id") ? id_string(record.at("image_id"))
                         : record.contains("id")     ? id_string(record.at("id"))
                                                     : throw Error(ErrorCode::kSchemaError,
                                                                   "scene graph record without image_id");

  std::vector<ObjectEntity> objects;
  std::unordered_set<std::string> ids;
  for (const auto& obj : record.value("objects", nlohmann::json::array())) {
    std::string id = obj.contains("object_id") ? id_string(obj.at("object_id")) : id_string(obj.at("id"));
    std::string raw_name;
    if (obj.contains("names") && obj.at("names").is_array() && !obj.at("names").empty()) {
      raw_name = obj.at("names").front().get<std::string>();
    } else if (obj.contains("name")) {
      raw_name = obj.at("name").get<std::string>();
    }
    std::vector<std::string> attrs;
    if (obj.contains("attributes") && obj.at("attributes").is_array()) {
      for (const auto& a : obj.at("attributes")) {
        if (a.is_string()) attrs.push_back(a.get<std::string>());
      }
    }
    if (text::trim(raw_name).empty() || ids.contains(id)) {
      ++st.dropped_objects;
      continue;
    }
    ids.insert(id);
    objects.push_back(ObjectEntity::make(std::move(id), raw_name, attrs));
  }

  std::vector<Relationship> rels;
  for (const auto& rel : record.value("relationships", nlohmann::json::array())) {
    auto subject = endpoint_id(rel, "subject_id", "subject");
    auto object = endpoint_id(rel, "object_id", "object");
    auto predicate = text::to_lower(text::collapse_spaces(rel.value("predicate", std::string{})));
    if (!subject || !object || predicate.empty() || !ids.contains(*subject) || !ids.contains(*object)) {
      ++st.dropped_relationships;
      continue;
    }
    if (*subject == *object) ++st.reflexive_relationships;
    rels.push_back({std::move(*subject), std::move(predicate), std::move(*object)});
  }
  ++st.images;
  return SceneGraph(std::move(image_id), std::move(objects), std::move(rels));
}

std::vector<SceneGraph> parse_scene_graphs(const nlohmann::json& document, SceneGraphLoadStats* stats) {
  if (!document.is_array()) throw Error(ErrorCode::kSchemaError, "scene graph file must hold a JSON array");
  std::vector<SceneGraph> graphs;
  graphs.reserve(document.size());
  for (const auto& record : document) graphs.push_back(parse_scene_graph(record, stats));
  return graphs;
}

std::vector<SceneGraph> load_scene_graphs(const std::filesystem::path& path, SceneGraphLoadStats* stats) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open scene graph file " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kIoError, path.string() + ": " + e.what());
  }
  return parse_scene_graphs(doc, stats);
}

TextAnalysis parse_text_analysis(const nlohmann::json& record, const Vocabulary* vocabulary) {
  std::vector<TextAnalysis::Mention> mentions;
  for (const auto& obj : record.value("objects", nlohmann::json::array())) {
    if (obj.is_string()) {
      mentions.push_back({obj.get<std::string>(), {}});
    } else {
      mentions.push_back({obj.at("name").get<std::string>(),
                          obj.value("attributes", std::vector<std::string>{})});
    }
  }
  std::vector<TextAnalysis::RelationMention> relations;
  for (const auto& rel : record.value("relationships", nlohmann::json::array())) {
    relations.push_back({rel.at("subject").get<std::string>(), rel.at("predicate").get<std::string>(),
                         rel.at("object").get<std::string>()});
  }
  return TextAnalysis::from_mentions(mentions, relations, vocabulary);
}

bool image_id_less(std::string_view a, std::string_view b) {
  auto numeric = [](std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  if (numeric(a) && numeric(b)) {
    auto strip = [](std::string_view s) {
      while (s.size() > 1 && s.front() == '0') s.remove_prefix(1);
      return s;
    };
    a = strip(a);
    b = strip(b);
    if (a.size() != b.size()) return a.size() < b.size();
  }
  return a < b;
}

}  // namespace modconf
