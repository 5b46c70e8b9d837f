#include <set>

#include <gtest/gtest.h>

#include "modconf/dataset_store.hpp"
#include "modconf/error.hpp"
#include "modconf/synthesis.hpp"
#include "test_support.hpp"

using namespace modconf;
using modconf::testing::dogball_scene;
using modconf::testing::ScriptedProvider;

namespace {

std::string error_name(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return std::string(e.code_name());
  }
  return "no error";
}

QaPool pool_of(const std::string& image_id, int n) {
  QaPool pool;
  for (int i = 0; i < n; ++i) {
    pool[image_id].push_back({image_id, "Question " + std::to_string(i) + "?", "Answer " + std::to_string(i) + ".",
                              std::to_string(i)});
  }
  return pool;
}

std::string jsonl(const std::vector<ConflictTriple>& triples) {
  std::string out;
  for (const auto& t : triples) out += to_jsonl_line(t) + "\n";
  return out;
}

}  // namespace

TEST(QaPool, ParsesBothLayouts) {
  auto vg = parse_qa_pool(nlohmann::json::parse(
      R"([{"id": 5, "qas": [{"qa_id": 1, "question": "Q1?", "answer": "A1."}, {"question": "Q2?", "answer": "A2."}]}])"));
  EXPECT_EQ(vg.at("5").size(), 2u);
  auto flat = parse_qa_pool(nlohmann::json::parse(R"([{"image_id": "x", "question": "Q?", "answer": "A."}])"));
  EXPECT_EQ(flat.at("x").front().question, "Q?");
  EXPECT_THROW(parse_qa_pool(nlohmann::json::parse("{}")), Error);
}

TEST(SampleBaseQuestion, SingletonAndDeterminism) {
  auto one = pool_of("1", 1);
  EXPECT_EQ(sample_base_question("1", one, 123).question, "Question 0?");
  auto five = pool_of("1", 5);
  auto first = sample_base_question("1", five, 77);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(sample_base_question("1", five, 77).question, first.question);

  // Pool order does not matter.
  auto reversed = five;
  std::reverse(reversed["1"].begin(), reversed["1"].end());
  EXPECT_EQ(sample_base_question("1", reversed, 77).question, first.question);

  EXPECT_EQ(error_name([&] { sample_base_question("2", five, 1); }), "no-questions-for-image");
}

TEST(SampleBaseQuestion, UniformOverSeeds) {
  constexpr int kPool = 20, kDraws = 10000;
  auto pool = pool_of("img", kPool);
  std::map<std::string, int> counts;
  for (int seed = 0; seed < kDraws; ++seed) counts[sample_base_question("img", pool, seed).question]++;
  ASSERT_EQ(counts.size(), static_cast<std::size_t>(kPool));
  double expected = static_cast<double>(kDraws) / kPool, chi2 = 0;
  for (auto& [_, c] : counts) chi2 += (c - expected) * (c - expected) / expected;
  EXPECT_LT(chi2, 43.82);  // 19 degrees of freedom, p = 0.001
}

TEST(ParseComponentList, Forms) {
  EXPECT_EQ(parse_component_list("cat, table"), (std::vector<std::string>{"cat", "table"}));
  EXPECT_TRUE(parse_component_list("None").empty());
  EXPECT_TRUE(parse_component_list("`None'.").empty());
  EXPECT_EQ(parse_component_list("Red Apple,\n\"table\".\n- cat"), (std::vector<std::string>{"red apple", "table", "cat"}));
  EXPECT_EQ(parse_component_list("cat, cat"), (std::vector<std::string>{"cat"}));
  EXPECT_EQ(error_name([] { parse_component_list("  "); }), "component-parse-failure");
  EXPECT_EQ(error_name([] {
              parse_component_list("Sure! Here are the words you asked for: the cat and also the table that it sits on");
            }),
            "component-parse-failure");
}

TEST(DetectKeyComponents, TwoStageTraceOnDogBallScene) {
  ScriptedProvider llm({{"q/extract", "ball"}, {"q/objects", "None"}, {"q/attributes", "None"}, {"q/relationships", "None"}});
  auto c = detect_key_components("What color is the ball?", dogball_scene(), llm, "q");
  EXPECT_EQ(c.extracted, std::vector<std::string>{"ball"});
  EXPECT_TRUE(c.objects.empty());
  EXPECT_EQ(c.tags, (std::vector<std::string>{"q/extract", "q/objects", "q/attributes", "q/relationships"}));

  auto filter = llm.request("q/objects");
  ASSERT_TRUE(filter);
  const auto& prompt = filter->messages.back().content;
  EXPECT_NE(prompt.find("Text: ball\n"), std::string::npos);
  EXPECT_NE(prompt.find("Candidate words: dog, sea, surfboard\n"), std::string::npos);
  EXPECT_NE(llm.request("q/attributes")->messages.back().content.find("Candidate words: blue, brown, wet, white\n"),
            std::string::npos);
  EXPECT_NE(llm.request("q/relationships")->messages.back().content.find("Candidate words: on\n"), std::string::npos);
  EXPECT_EQ(llm.request("q/extract")->model, "gpt-4o-mini");
}

TEST(DetectKeyComponents, FiltersToVocabulary) {
  auto scene = SceneGraph("s", {ObjectEntity::make("1", "cat"), ObjectEntity::make("2", "table"),
                                ObjectEntity::make("3", "floor")}, {});
  ScriptedProvider llm({{"p/extract", "cat, table"}, {"p/objects", "Cats, table, spaceship"}});
  auto c = detect_key_components("Is the cat on the table?", scene, llm, "p");
  EXPECT_EQ(c.objects, (std::vector<std::string>{"cat", "table"}));
  // No attributes or predicates in the scene: those filter prompts are not sent.
  EXPECT_EQ(llm.requests().size(), 2u);
}

TEST(DetectKeyComponents, NoneFromExtractSkipsFiltering) {
  ScriptedProvider llm({{"p/extract", "None"}});
  auto c = detect_key_components("Hello?", dogball_scene(), llm, "p");
  EXPECT_TRUE(c.empty());
  EXPECT_EQ(llm.requests().size(), 1u);
}

TEST(PlanSubstitution, Rules) {
  BaseQuestion base{"2417", "What color is the surfboard?", "White."};
  KeyComponents only_objects;
  only_objects.objects = {"surfboard"};
  auto plan = plan_substitution(base, only_objects, dogball_scene(), 1);
  EXPECT_EQ(plan.conflict_type, ConflictType::kObject);
  EXPECT_EQ(plan.components_to_modify, std::vector<std::string>{"surfboard"});
  std::set<std::string> excluded(plan.excluded_objects.begin(), plan.excluded_objects.end());
  for (auto name : {"dog", "surfboard", "sea"}) EXPECT_TRUE(excluded.count(name)) << name;

  KeyComponents mixed;
  mixed.objects = {"dog"};
  mixed.attributes = {"brown"};
  auto a = plan_substitution(base, mixed, dogball_scene(), 99);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(plan_substitution(base, mixed, dogball_scene(), 99).conflict_type, a.conflict_type);
  if (a.conflict_type == ConflictType::kAttribute) EXPECT_TRUE(a.excluded_objects.empty());

  EXPECT_EQ(error_name([&] { plan_substitution(base, KeyComponents{}, dogball_scene(), 1); }),
            "no-substitutable-components");
  EXPECT_EQ(error_name([&] { plan_substitution(base, mixed, dogball_scene(), 1, {0.0, 0.0, 1.0}); }),
            "no-substitutable-components");
}

TEST(PlanSubstitution, UniformOverAvailableTypes) {
  BaseQuestion base{"2417", "Is the brown dog on the surfboard?", "Yes."};
  KeyComponents all;
  all.objects = {"dog", "surfboard"};
  all.attributes = {"brown"};
  all.relationships = {"on"};
  std::map<ConflictType, int> counts;
  constexpr int kDraws = 9000;
  for (int seed = 0; seed < kDraws; ++seed) counts[plan_substitution(base, all, dogball_scene(), seed).conflict_type]++;
  double chi2 = 0, expected = kDraws / 3.0;
  for (auto t : kAllConflictTypes) chi2 += (counts[t] - expected) * (counts[t] - expected) / expected;
  EXPECT_LT(chi2, 13.82);  // 2 degrees of freedom, p = 0.001

  std::map<ConflictType, int> weighted;
  for (int seed = 0; seed < kDraws; ++seed) {
    weighted[plan_substitution(base, all, dogball_scene(), seed, {1.0, 0.0, 0.0}).conflict_type]++;
  }
  EXPECT_EQ(weighted[ConflictType::kObject], kDraws);
}

TEST(SubstituteComponents, DogBallAndFailures) {
  BaseQuestion base{"2417", "What color is the surfboard?", "White."};
  SubstitutionPlan plan{ConflictType::kObject, {"surfboard"}, {"dog", "sea", "surfboard"}};
  ScriptedProvider llm({{"s", "What color is the ball?"}, {"same", "what color is the surfboard?"}, {"empty", "  \n"},
                        {"quoted", "\n\"What color is the kite?\"\nExplanation: replaced the surfboard."}});
  EXPECT_EQ(substitute_components(plan, base, llm, "s"), "What color is the ball?");
  const auto prompt = llm.request("s")->messages.back().content;
  EXPECT_NE(prompt.find("the object `surfboard' replaced by another object"), std::string::npos);
  EXPECT_NE(prompt.find("Objects: dog, sea, surfboard\n"), std::string::npos);

  EXPECT_EQ(substitute_components(plan, base, llm, "quoted"), "What color is the kite?");
  EXPECT_EQ(error_name([&] { substitute_components(plan, base, llm, "same"); }), "substitution-failure");
  EXPECT_EQ(error_name([&] { substitute_components(plan, base, llm, "empty"); }), "substitution-failure");
}

TEST(SubstituteComponents, AttributeAndRelationshipTemplates) {
  BaseQuestion base{"1", "Is the green apple fresh?", "Yes."};
  auto attr = build_substitution_request({ConflictType::kAttribute, {"red"}, {}}, base, "t");
  EXPECT_NE(attr.messages.back().content.find("the attribute `red' replaced by different attribute"), std::string::npos);
  auto rel = build_substitution_request({ConflictType::kRelationship, {"on"}, {}}, base, "t");
  EXPECT_NE(rel.messages.back().content.find("the relationship `on' replaced by another type of relationship"),
            std::string::npos);
  SubstitutionPlan bad{ConflictType::kAttribute, {"red"}, {"dog"}};
  EXPECT_THROW(bad.validate(), Error);
  SubstitutionPlan empty{ConflictType::kObject, {}, {"dog"}};
  EXPECT_THROW(empty.validate(), Error);
}

TEST(GenerateAnswer, DogBallAndPreconditions) {
  AnswerInput input{"What color is the ball?", ConflictType::kObject, "surfboard", "What color is the surfboard?",
                    "White."};
  ScriptedProvider llm({{"a", "The image does not contain a ball."}, {"echo", "White."}});
  EXPECT_EQ(generate_answer(input, llm, "a"), "The image does not contain a ball.");
  const auto prompt = llm.request("a")->messages.back().content;
  EXPECT_NE(prompt.find("But the question has conflicted object with the image. The image actually contains "
                        "``surfboard''."),
            std::string::npos);
  EXPECT_EQ(generate_answer(input, llm, "echo"), "White.");

  auto missing = input;
  missing.key_component = "";
  EXPECT_EQ(error_name([&] { generate_answer(missing, llm, "a"); }), "precondition");
  auto no_type = input;
  no_type.conflict_type.reset();
  EXPECT_EQ(error_name([&] { generate_answer(no_type, llm, "a"); }), "precondition");
  EXPECT_EQ(llm.requests().size(), 2u);  // precondition failures never reach the provider
}

TEST(VerifyGeneratedConflict, Examples) {
  KeyComponents ball;
  ball.source_text = "What color is the ball?";
  ball.extracted = {"ball"};
  EXPECT_TRUE(verify_generated_conflict(ball, dogball_scene()));

  KeyComponents dog;
  dog.source_text = "What color is the dog?";
  dog.extracted = {"dog"};
  dog.objects = {"dog"};
  EXPECT_FALSE(verify_generated_conflict(dog, dogball_scene()));

  EXPECT_FALSE(verify_generated_conflict(KeyComponents{}, dogball_scene()));
}

TEST(TextAnalysisHeuristic, AttributesAndRelationships) {
  auto scene = SceneGraph("s",
                          {ObjectEntity::make("1", "apple", {"green"}), ObjectEntity::make("2", "table"),
                           ObjectEntity::make("3", "cat"), ObjectEntity::make("4", "floor")},
                          {{"3", "on", "4"}});
  KeyComponents red;
  red.source_text = "Is the red apple on the table?";
  red.extracted = {"red apple", "table"};
  red.objects = {"apple", "table"};
  auto t = text_analysis(red, scene);
  EXPECT_EQ(classify_conflict(t, scene), ConflictType::kAttribute);

  KeyComponents loose;
  loose.source_text = "Is the red apple fresh?";
  loose.extracted = {"red", "apple"};
  loose.objects = {"apple"};
  loose.attributes = {"red"};
  EXPECT_EQ(classify_conflict(text_analysis(loose, scene), scene), ConflictType::kAttribute);

  KeyComponents rel;
  rel.source_text = "Is the cat under the table?";
  rel.extracted = {"cat", "under", "table"};
  rel.objects = {"cat", "table"};
  rel.relationships = {"under"};
  auto r = text_analysis(rel, scene);
  ASSERT_EQ(r.relationships().size(), 1u);
  EXPECT_EQ(r.find(r.relationships()[0].subject_id)->name, "cat");
  EXPECT_EQ(r.find(r.relationships()[0].object_id)->name, "table");
  EXPECT_EQ(classify_conflict(r, scene), ConflictType::kRelationship);

  KeyComponents same;
  same.source_text = "Is the cat on the floor?";
  same.extracted = {"cat", "on", "floor"};
  same.objects = {"cat", "floor"};
  same.relationships = {"on"};
  EXPECT_EQ(classify_conflict(text_analysis(same, scene), scene), std::nullopt);
}

// --- pipeline -----------------------------------------------------------------------

TEST(Pipeline, DogBallFixture) {
  auto inputs = PipelineInputs::load(modconf::testing::fixture_path("dogball/scene_graphs.json"),
                                     modconf::testing::fixture_path("dogball/qa.json"));
  ReplayProvider replay(Fixture::load(modconf::testing::fixture_path("dogball/replay.json")));
  auto result = run_pipeline(inputs, {}, replay, 7);
  ASSERT_EQ(result.triples.size(), 1u);
  EXPECT_TRUE(result.skips.empty());
  const auto& t = result.triples.front();
  EXPECT_EQ(t.conflict_type, ConflictType::kObject);
  EXPECT_EQ(t.question, "What color is the ball?");
  EXPECT_EQ(t.answer, "The image does not contain a ball.");
  EXPECT_EQ(t.review_status, ReviewStatus::kPending);
  EXPECT_EQ(t.record_id, "mc-2417");
  EXPECT_EQ(t.provenance.base_question, "What color is the surfboard?");
  EXPECT_EQ(t.provenance.components_modified, std::vector<std::string>{"surfboard"});
  for (const auto& tag : t.provenance.prompts_used) EXPECT_TRUE(replay.fixture().find(tag)) << tag;
}

TEST(Pipeline, ThreeImagesDeterministic) {
  auto corpus = modconf::testing::make_synthetic_corpus(3);
  ReplayProvider replay(corpus.fixture);
  auto a = run_pipeline(corpus.inputs, {}, replay, 11);
  auto b = run_pipeline(corpus.inputs, {}, replay, 11);
  ASSERT_EQ(a.triples.size(), 3u);
  EXPECT_EQ(jsonl(a.triples), jsonl(b.triples));
  EXPECT_EQ(a.triples[0].conflict_type, ConflictType::kAttribute);
  EXPECT_EQ(a.triples[1].conflict_type, ConflictType::kRelationship);
  EXPECT_EQ(a.triples[2].conflict_type, ConflictType::kObject);
}

TEST(Pipeline, VerifyFailureBecomesSkip) {
  auto corpus = modconf::testing::make_synthetic_corpus(3);
  corpus.fixture.put({"2/verify/extract", "", "cat, on, floor"});
  corpus.fixture.put({"2/verify/objects", "", "cat, floor"});
  corpus.fixture.put({"2/verify/relationships", "", "on"});
  corpus.fixture.put({"2/substitute", "", "Is the cat on the floor?"});
  ReplayProvider replay(corpus.fixture);
  std::vector<std::string> streamed;
  auto result = run_pipeline(corpus.inputs, {}, replay, 11, [&](const ConflictTriple& t) { streamed.push_back(t.record_id); });
  EXPECT_EQ(result.triples.size(), 2u);
  ASSERT_EQ(result.skips.size(), 1u);
  EXPECT_EQ(result.skips[0].image_id, "2");
  EXPECT_EQ(result.skips[0].stage, "verify");
  EXPECT_EQ(result.skips[0].error_code, "verification-failed");
  EXPECT_EQ(streamed, (std::vector<std::string>{"mc-1", "mc-3"}));
}

TEST(Pipeline, MissingFixtureEntryIsPerImageSkip) {
  auto corpus = modconf::testing::make_synthetic_corpus(2);
  Fixture trimmed;
  for (const auto& [tag, e] : corpus.fixture.entries()) {
    if (tag != "1/answer") trimmed.put(e);
  }
  ReplayProvider replay(trimmed);
  auto result = run_pipeline(corpus.inputs, {}, replay, 1);
  EXPECT_EQ(result.triples.size(), 1u);
  ASSERT_EQ(result.skips.size(), 1u);
  EXPECT_EQ(result.skips[0].stage, "answer");
  EXPECT_EQ(result.skips[0].error_code, "missing-fixture-entry");
}

TEST(Pipeline, TwoHundredTriplesWithFullProvenance) {
  auto corpus = modconf::testing::make_synthetic_corpus(240);
  ReplayProvider replay(corpus.fixture);
  SynthesisConfig config;
  config.count = 200;
  auto result = run_pipeline(corpus.inputs, config, replay, 2024);
  ASSERT_EQ(result.triples.size(), 200u);
  std::map<ConflictType, int> types;
  for (const auto& t : result.triples) {
    types[t.conflict_type]++;
    EXPECT_NO_THROW(t.validate());
    EXPECT_FALSE(t.provenance.base_question.empty());
    EXPECT_FALSE(t.provenance.base_answer.empty());
    EXPECT_FALSE(t.provenance.components_modified.empty());
    EXPECT_GE(t.provenance.prompts_used.size(), 5u);
    for (const auto& tag : t.provenance.prompts_used) ASSERT_TRUE(corpus.fixture.find(tag)) << tag;
    // Every emitted triple still verifies when re-detected from the fixture.
    auto scene_it = std::find_if(corpus.inputs.scenes.begin(), corpus.inputs.scenes.end(),
                                 [&](const SceneGraph& s) { return s.image_id() == t.image_id; });
    auto redetected = detect_key_components(t.question, *scene_it, replay, t.image_id + "/verify");
    EXPECT_TRUE(verify_generated_conflict(redetected, *scene_it));
  }
  EXPECT_EQ(types.size(), 3u);
  EXPECT_EQ(result.triples.back().image_id, "200");
}

TEST(Pipeline, ConcurrencyDoesNotChangeOutput) {
  auto corpus = modconf::testing::make_synthetic_corpus(30);
  corpus.fixture.put({"7/substitute", "", "Is the green apple fresh?"});  // forces a skip mid-run
  ReplayProvider replay(corpus.fixture);
  SynthesisConfig serial;
  serial.count = 20;
  auto parallel = serial;
  parallel.jobs = 4;
  auto a = run_pipeline(corpus.inputs, serial, replay, 5);
  auto b = run_pipeline(corpus.inputs, parallel, replay, 5);
  EXPECT_EQ(a.triples.size(), 20u);
  EXPECT_EQ(jsonl(a.triples), jsonl(b.triples));
  ASSERT_EQ(a.skips.size(), b.skips.size());
  EXPECT_EQ(a.skips[0].stage, "substitute");
}

TEST(Pipeline, ObjectPromptsListEveryExcludedName) {
  auto corpus = modconf::testing::make_synthetic_corpus(9);
  ScriptedProvider spy;
  for (const auto& [tag, e] : corpus.fixture.entries()) spy.set(tag, e.content);
  run_pipeline(corpus.inputs, {}, spy, 3);
  for (const auto& r : spy.requests()) {
    if (r.request_tag == "3/substitute" || r.request_tag == "6/substitute" || r.request_tag == "9/substitute") {
      EXPECT_NE(r.messages.back().content.find("Objects: dog, sea, surfboard\n"), std::string::npos);
    }
  }
}

TEST(Pipeline, DuplicateSceneIdsAreSkipped) {
  auto corpus = modconf::testing::make_synthetic_corpus(2);
  corpus.inputs.scenes.push_back(corpus.inputs.scenes.front());
  ReplayProvider replay(corpus.fixture);
  auto result = run_pipeline(corpus.inputs, {}, replay, 1);
  EXPECT_EQ(result.triples.size(), 2u);
  ASSERT_EQ(result.skips.size(), 1u);
  EXPECT_EQ(result.skips[0].stage, "load");
}

TEST(SynthesisConfig, FromJson) {
  auto c = SynthesisConfig::from_json(nlohmann::json::parse(
      R"({"model": "m", "temperature": 0.7, "count": 5, "jobs": 2, "type_ratios": {"object": 2, "attribute": 1, "relationship": 0}})"));
  EXPECT_EQ(c.model, "m");
  EXPECT_EQ(c.temperature, 0.7);
  EXPECT_EQ(c.count, 5u);
  EXPECT_EQ(c.type_weights[2], 0.0);
  EXPECT_THROW(SynthesisConfig::from_json(nlohmann::json::parse(R"({"type_ratios": {"object": -1}})")), Error);
}
