#include "test_support.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <tuple>

#include <fmt/format.h>
#include <stdlib.h>

#include "modconf/cli.hpp"
#include "modconf/error.hpp"

namespace modconf::testing {

std::filesystem::path source_dir() { return MODCONF_SOURCE_DIR; }

std::filesystem::path fixture_path(const std::string& relative) {
  return source_dir() / "tests" / "fixtures" / relative;
}

TempDir::TempDir() {
  auto pattern = (std::filesystem::temp_directory_path() / "modconf-test-XXXXXX").string();
  if (!mkdtemp(pattern.data())) throw std::runtime_error("mkdtemp failed");
  path_ = pattern;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

void ScriptedProvider::set(const std::string& tag, std::string content) {
  std::lock_guard lock(mutex_);
  replies_[tag] = std::move(content);
}

ChatResponse ScriptedProvider::complete(const ChatRequest& request) {
  std::lock_guard lock(mutex_);
  seen_.push_back(request);
  auto it = replies_.find(request.request_tag);
  if (it == replies_.end()) {
    throw Error(ErrorCode::kMissingFixtureEntry, "no scripted reply for '" + request.request_tag + "'");
  }
  return {it->second, FinishReason::kStop, 0};
}

std::vector<ChatRequest> ScriptedProvider::requests() const {
  std::lock_guard lock(mutex_);
  return seen_;
}

std::optional<ChatRequest> ScriptedProvider::request(const std::string& tag) const {
  std::lock_guard lock(mutex_);
  for (const auto& r : seen_) {
    if (r.request_tag == tag) return r;
  }
  return std::nullopt;
}

CliResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "modconf");
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

// --- oracles ------------------------------------------------------------------------

namespace {

bool is_subsequence(const std::vector<std::string>& sub, const std::vector<std::string>& of) {
  std::size_t j = 0;
  for (const auto& tok : of) {
    if (j < sub.size() && sub[j] == tok) ++j;
  }
  return j == sub.size();
}

}  // namespace

std::size_t brute_force_lcs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  const auto& shorter = a.size() <= b.size() ? a : b;
  const auto& longer = a.size() <= b.size() ? b : a;
  if (shorter.size() > 16) throw std::invalid_argument("brute_force_lcs: input too long");
  std::size_t best = 0;
  for (std::uint32_t mask = 0; mask < (1u << shorter.size()); ++mask) {
    std::vector<std::string> sub;
    for (std::size_t i = 0; i < shorter.size(); ++i) {
      if (mask & (1u << i)) sub.push_back(shorter[i]);
    }
    if (sub.size() > best && is_subsequence(sub, longer)) best = sub.size();
  }
  return best;
}

OracleVerdict conflict_oracle(const PlainGraph& text, const PlainGraph& scene) {
  std::set<std::string> text_names, scene_names;
  for (const auto& o : text.objects) text_names.insert(o.name);
  for (const auto& o : scene.objects) scene_names.insert(o.name);

  bool subset = std::includes(scene_names.begin(), scene_names.end(), text_names.begin(), text_names.end());

  OracleVerdict v;
  v.object = !subset;

  if (subset) {
    for (const auto& t : text.objects) {
      if (t.attributes.empty()) continue;
      bool satisfied = false;
      for (const auto& s : scene.objects) {
        if (s.name == t.name &&
            std::includes(s.attributes.begin(), s.attributes.end(), t.attributes.begin(), t.attributes.end())) {
          satisfied = true;
        }
      }
      if (!satisfied) v.attribute = true;
    }

    std::set<std::tuple<std::string, std::string, std::string>> scene_triples;
    for (const auto& r : scene.relations) {
      scene_triples.insert({scene.objects[r.subject].name, r.predicate, scene.objects[r.object].name});
    }
    for (const auto& r : text.relations) {
      const auto& s = text.objects[r.subject].name;
      const auto& o = text.objects[r.object].name;
      if (scene_names.count(s) && scene_names.count(o) && !scene_triples.count({s, r.predicate, o})) {
        v.relationship = true;
      }
    }
  }

  if (v.object) {
    v.classified = ConflictType::kObject;
  } else if (v.attribute) {
    v.classified = ConflictType::kAttribute;
  } else if (v.relationship) {
    v.classified = ConflictType::kRelationship;
  }
  return v;
}

namespace {

const std::vector<std::string> kNames = {"dog", "cat", "ball", "table", "sea"};
const std::vector<std::string> kAttributes = {"red", "green", "small", "wet"};
const std::vector<std::string> kPredicates = {"on", "under", "near"};

std::size_t pick(std::mt19937_64& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }
bool coin(std::mt19937_64& rng, double p) { return std::bernoulli_distribution(p)(rng); }

std::set<std::string> random_attributes(std::mt19937_64& rng, const std::vector<std::string>& pool) {
  std::set<std::string> out;
  auto k = pick(rng, 4);  // 0..3
  for (std::size_t i = 0; i < k; ++i) out.insert(pool[pick(rng, pool.size())]);
  return out;
}

}  // namespace

PlainGraph random_graph(std::mt19937_64& rng, bool allow_empty) {
  PlainGraph g;
  std::size_t n = allow_empty ? pick(rng, 7) : 1 + pick(rng, 6);
  for (std::size_t i = 0; i < n; ++i) g.objects.push_back({kNames[pick(rng, kNames.size())], random_attributes(rng, kAttributes)});
  if (n > 0) {
    std::size_t m = pick(rng, 7);
    for (std::size_t i = 0; i < m; ++i) {
      g.relations.push_back({pick(rng, n), kPredicates[pick(rng, kPredicates.size())], pick(rng, n)});
    }
  }
  return g;
}

PlainGraph random_text_for(const PlainGraph& scene, std::mt19937_64& rng) {
  if (scene.objects.empty() || coin(rng, 0.15)) return random_graph(rng, true);
  PlainGraph g;
  std::vector<std::string> scene_attrs;
  for (const auto& o : scene.objects) scene_attrs.insert(scene_attrs.end(), o.attributes.begin(), o.attributes.end());
  if (scene_attrs.empty()) scene_attrs = kAttributes;

  const bool stay_inside = coin(rng, 0.75);
  std::size_t n = pick(rng, 7);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& src = scene.objects[pick(rng, scene.objects.size())];
    std::string name = stay_inside || coin(rng, 0.7) ? src.name : kNames[pick(rng, kNames.size())];
    std::set<std::string> attrs;
    switch (pick(rng, 3)) {
      case 0: break;
      case 1: {
        // a subset of the source's attributes
        for (const auto& a : src.attributes) {
          if (coin(rng, 0.5)) attrs.insert(a);
        }
        break;
      }
      default: attrs = random_attributes(rng, coin(rng, 0.5) ? scene_attrs : kAttributes);
    }
    g.objects.push_back({name, attrs});
  }
  if (g.objects.empty()) return g;
  std::size_t m = pick(rng, 7);
  for (std::size_t i = 0; i < m; ++i) {
    if (!scene.relations.empty() && coin(rng, 0.5)) {
      const auto& r = scene.relations[pick(rng, scene.relations.size())];
      auto index_of = [&](const std::string& name) {
        for (std::size_t k = 0; k < g.objects.size(); ++k) {
          if (g.objects[k].name == name) return k;
        }
        if (g.objects.size() < 6) {
          g.objects.push_back({name, {}});
          return g.objects.size() - 1;
        }
        return pick(rng, g.objects.size());
      };
      auto s = index_of(scene.objects[r.subject].name);
      auto o = index_of(scene.objects[r.object].name);
      auto predicate = coin(rng, 0.7) ? r.predicate : kPredicates[pick(rng, kPredicates.size())];
      g.relations.push_back({s, predicate, o});
    } else {
      g.relations.push_back({pick(rng, g.objects.size()), kPredicates[pick(rng, kPredicates.size())],
                             pick(rng, g.objects.size())});
    }
  }
  return g;
}

namespace {

template <typename Graph>
Graph build(const PlainGraph& g, const std::string& prefix, auto&& make) {
  std::vector<ObjectEntity> objects;
  for (std::size_t i = 0; i < g.objects.size(); ++i) {
    std::vector<std::string> attrs(g.objects[i].attributes.begin(), g.objects[i].attributes.end());
    objects.push_back(ObjectEntity::make(prefix + std::to_string(i), g.objects[i].name, attrs));
  }
  std::vector<Relationship> rels;
  for (const auto& r : g.relations) {
    rels.push_back({prefix + std::to_string(r.subject), r.predicate, prefix + std::to_string(r.object)});
  }
  return make(std::move(objects), std::move(rels));
}

}  // namespace

SceneGraph to_scene(const PlainGraph& g, const std::string& image_id) {
  return build<SceneGraph>(g, "v", [&](auto objects, auto rels) {
    return SceneGraph(image_id, std::move(objects), std::move(rels));
  });
}

TextAnalysis to_text(const PlainGraph& g) {
  return build<TextAnalysis>(g, "t", [](auto objects, auto rels) {
    return TextAnalysis(std::move(objects), std::move(rels));
  });
}

// --- fixtures -----------------------------------------------------------------------

ConflictTriple make_triple(const std::string& record_id, ConflictType type, ReviewStatus status) {
  ConflictTriple t;
  t.record_id = record_id;
  t.image_id = "img-" + record_id;
  t.conflict_type = type;
  switch (type) {
    case ConflictType::kObject:
      t.question = "What color is the ball?";
      t.answer = "The image does not contain a ball.";
      t.provenance = {"What color is the surfboard?", "White.", {"surfboard"}, {}};
      break;
    case ConflictType::kAttribute:
      t.question = "Is the red apple fresh?";
      t.answer = "The apple in the image is green, not red.";
      t.provenance = {"Is the green apple fresh?", "Yes.", {"green"}, {}};
      break;
    case ConflictType::kRelationship:
      t.question = "Is the cat under the table?";
      t.answer = "The cat is on the floor, not under the table.";
      t.provenance = {"What is the cat on?", "The floor.", {"on"}, {}};
      break;
  }
  t.provenance.prompts_used = {record_id + "/detect/extract", record_id + "/substitute", record_id + "/answer"};
  t.review_status = status;
  if (status == ReviewStatus::kEdited) t.edited_answer = t.answer + " Edited.";
  return t;
}

std::vector<ConflictTriple> make_triples(std::size_t n, std::uint64_t salt) {
  std::mt19937_64 rng(salt);
  std::vector<ConflictTriple> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto type = kAllConflictTypes[pick(rng, 3)];
    out.push_back(make_triple(fmt::format("mc-{:05d}", i), type));
  }
  return out;
}

namespace {

nlohmann::json vg_object(int id, const std::string& name, std::vector<std::string> attributes) {
  return {{"object_id", id}, {"names", {name}}, {"attributes", attributes}};
}

nlohmann::json vg_relation(int subject, const std::string& predicate, int object) {
  return {{"subject_id", subject}, {"predicate", predicate}, {"object_id", object}};
}

}  // namespace

SyntheticCorpus make_synthetic_corpus(std::size_t images) {
  SyntheticCorpus c;
  c.scene_json = nlohmann::json::array();
  c.qa_json = nlohmann::json::array();
  for (std::size_t i = 1; i <= images; ++i) {
    const std::string id = std::to_string(i);
    nlohmann::json scene{{"image_id", i}};
    std::string question, answer;
    std::map<std::string, std::string> replies;
    auto put = [&](const std::string& stage, const std::string& content) { replies[id + "/" + stage] = content; };
    switch (i % 3) {
      case 0:
        scene["objects"] = {vg_object(1, "dog", {"brown"}), vg_object(2, "surfboard", {"white"}),
                            vg_object(3, "sea", {"blue"})};
        scene["relationships"] = {vg_relation(1, "on", 2), vg_relation(2, "on", 3)};
        question = "What color is the surfboard?";
        answer = "White.";
        put("detect/extract", "surfboard");
        put("detect/objects", "surfboard");
        put("detect/attributes", "None");
        put("detect/relationships", "None");
        put("substitute", "What color is the ball?");
        put("verify/extract", "ball");
        put("verify/objects", "None");
        put("verify/attributes", "None");
        put("verify/relationships", "None");
        put("answer", "The image does not contain a ball.");
        break;
      case 1:
        scene["objects"] = {vg_object(1, "apple", {"green"}), vg_object(2, "table", {"wooden"})};
        scene["relationships"] = {vg_relation(1, "on", 2)};
        question = "Is the green apple fresh?";
        answer = "Yes.";
        put("detect/extract", "green apple");
        put("detect/objects", "None");
        put("detect/attributes", "green");
        put("detect/relationships", "None");
        put("substitute", "Is the red apple fresh?");
        put("verify/extract", "red apple");
        put("verify/objects", "apple");
        put("verify/attributes", "None");
        put("verify/relationships", "None");
        put("answer", "The apple in the image is green, not red.");
        break;
      default:
        scene["objects"] = {vg_object(1, "cat", {"black"}), vg_object(2, "table", {"wooden"}),
                            vg_object(3, "floor", {}), vg_object(4, "lamp", {})};
        scene["relationships"] = {vg_relation(1, "on", 3), vg_relation(2, "under", 4)};
        question = "What is the cat on?";
        answer = "The floor.";
        put("detect/extract", "cat, on");
        put("detect/objects", "None");
        put("detect/attributes", "None");
        put("detect/relationships", "on");
        put("substitute", "Is the cat under the table?");
        put("verify/extract", "cat, under, table");
        put("verify/objects", "cat, table");
        put("verify/attributes", "None");
        put("verify/relationships", "under");
        put("answer", "The cat is on the floor, not under the table.");
        break;
    }
    c.scene_json.push_back(scene);
    c.qa_json.push_back({{"id", i}, {"qas", {{{"qa_id", 1000 + i}, {"question", question}, {"answer", answer}}}}});
    for (auto& [tag, content] : replies) c.fixture.put({tag, "", content});
  }
  c.inputs.scenes = parse_scene_graphs(c.scene_json);
  c.inputs.qa_pool = parse_qa_pool(c.qa_json);
  return c;
}

SceneGraph dogball_scene() {
  return SceneGraph("2417",
                    {ObjectEntity::make("1", "dog", {"brown", "wet"}), ObjectEntity::make("2", "surfboard", {"white"}),
                     ObjectEntity::make("3", "sea", {"blue"})},
                    {{"1", "on", "2"}, {"2", "on", "3"}});
}

}  // namespace modconf::testing
