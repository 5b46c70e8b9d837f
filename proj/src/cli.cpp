#include "modconf/cli.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "modconf/dataset_store.hpp"
#include "modconf/evaluation.hpp"
#include "modconf/judge.hpp"
#include "modconf/llm_gateway.hpp"
#include "modconf/review_service.hpp"
#include "modconf/scene_graph.hpp"
#include "modconf/synthesis.hpp"

namespace modconf::cli {

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIoError:
    case ErrorCode::kParseError:
    case ErrorCode::kSchemaError:
      return kInput;
    case ErrorCode::kTransportExhausted:
    case ErrorCode::kAuthFailure:
    case ErrorCode::kProviderRefusal:
      return kGateway;
    case ErrorCode::kMissingFixtureEntry:
      return kMissingFixture;
    case ErrorCode::kDuplicateId:
    case ErrorCode::kUnresolvedRecord:
    case ErrorCode::kNotFound:
    case ErrorCode::kConflict:
      return kData;
    case ErrorCode::kUnparseableVerdict:
    case ErrorCode::kUnparseableRating:
    case ErrorCode::kOutOfRangeRating:
      return kJudgeParse;
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kInvalidName:
    case ErrorCode::kPrecondition:
      return kUsage;
    default:
      return kInternal;
  }
}

namespace {

// Raised for flag combinations CLI11 cannot express; reported like a parse error.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ProviderOptions {
  std::string replay;
  std::string provider_url;
  std::string provider_config;
  std::string api_key_env;
  std::string record;
  bool verify_hash = false;
  int jobs = 1;
};

void add_provider_options(CLI::App* cmd, ProviderOptions& o) {
  cmd->add_option("--replay", o.replay, "Answer model requests from a recorded fixture (no network)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--provider-url", o.provider_url, "Chat-completions base URL, e.g. https://api.openai.com/v1");
  cmd->add_option("--provider-config", o.provider_config, "JSON provider config file")->check(CLI::ExistingFile);
  cmd->add_option("--api-key-env", o.api_key_env, "Environment variable holding the API key");
  cmd->add_option("--record", o.record, "Write every live request/response to this fixture file");
  cmd->add_flag("--verify-hash", o.verify_hash, "Replay: require recorded request hashes to match");
  cmd->add_option("--jobs", o.jobs, "Maximum concurrent model requests")->check(CLI::Range(1, 1024));
  cmd->get_option("--replay")->excludes("--provider-url");
  cmd->get_option("--replay")->excludes("--provider-config");
  cmd->get_option("--replay")->excludes("--record");
}

class ProviderHandle {
 public:
  ProviderHandle(const ProviderOptions& o, const std::string& command, std::optional<ProviderConfig> preset = {}) {
    if (!o.replay.empty()) {
      base_ = std::make_unique<ReplayProvider>(Fixture::load(o.replay), o.verify_hash);
      return;
    }
    if (o.provider_url.empty() && o.provider_config.empty() && !preset) {
      throw UsageError(command + " requires --replay or --provider-url/--provider-config");
    }
    ProviderConfig config = preset.value_or(ProviderConfig{});
    if (!o.provider_config.empty()) {
      std::ifstream in(o.provider_config);
      config = ProviderConfig::from_json(nlohmann::json::parse(in));
    }
    if (!o.provider_url.empty()) config.base_url = o.provider_url;
    if (!o.api_key_env.empty()) config.api_key_env = o.api_key_env;
    config.max_in_flight = std::max(config.max_in_flight, o.jobs);
    base_ = std::make_unique<HttpChatProvider>(config);
    if (!o.record.empty()) {
      recorder_ = std::make_unique<RecordingProvider>(*base_);
      record_path_ = o.record;
    }
  }

  ChatProvider& get() { return recorder_ ? static_cast<ChatProvider&>(*recorder_) : *base_; }

  void finish() {
    if (recorder_) recorder_->fixture().save(record_path_);
  }

 private:
  std::unique_ptr<ChatProvider> base_;
  std::unique_ptr<RecordingProvider> recorder_;
  std::string record_path_;
};

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kIoError, path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorCode::kIoError, "cannot write " + path);
  file << content;
}

template <typename Json>
std::string jsonl(const std::vector<Json>& rows) {
  std::string out;
  for (const auto& r : rows) out += r.dump() + '\n';
  return out;
}

// --- synthesize --------------------------------------------------------------------

struct SynthesizeArgs {
  std::string scene_graphs, qa, out, skips, config, model;
  std::size_t count = 0;
  std::uint64_t seed = 0;
  ProviderOptions provider;
};

int synthesize(const SynthesizeArgs& a, const CLI::App& cmd, std::ostream& out) {
  SynthesisConfig config;
  std::uint64_t seed = a.seed;
  std::optional<ProviderConfig> provider_preset;
  if (!a.config.empty()) {
    auto j = read_json_file(a.config);
    config = SynthesisConfig::from_json(j);
    if (j.contains("seed") && cmd.count("--seed") == 0) seed = j["seed"].get<std::uint64_t>();
    if (j.contains("provider")) provider_preset = ProviderConfig::from_json(j["provider"]);
  }
  if (cmd.count("--count")) config.count = a.count;
  if (cmd.count("--jobs")) config.jobs = a.provider.jobs;
  if (!a.model.empty()) config.model = a.model;
  config.validate();

  ProviderHandle provider(a.provider, "synthesize", a.provider.replay.empty() ? provider_preset : std::nullopt);
  auto inputs = PipelineInputs::load(a.scene_graphs, a.qa);
  auto result = run_pipeline(inputs, config, provider.get(), seed);
  provider.finish();

  write_dataset(a.out, result.triples);
  if (!a.skips.empty()) {
    std::vector<nlohmann::ordered_json> rows;
    for (const auto& s : result.skips) rows.push_back(to_json(s));
    write_text(a.skips, jsonl(rows), out);
  }
  nlohmann::ordered_json summary;
  summary["emitted"] = result.triples.size();
  summary["skipped"] = result.skips.size();
  summary["output"] = a.out;
  out << summary.dump() << '\n';
  return kOk;
}

// --- classify ------------------------------------------------------------------------

int classify(const std::string& scene_path, const std::string& text_path, const std::string& out_path,
             std::ostream& out) {
  auto scenes = load_scene_graphs(scene_path);
  std::map<std::string, const SceneGraph*> by_id;
  for (const auto& s : scenes) by_id.emplace(s.image_id(), &s);

  std::ifstream in(text_path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + text_path);
  std::vector<nlohmann::ordered_json> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line_no, e.what());
    }
    auto image_id = record.at("image_id").is_string() ? record["image_id"].get<std::string>()
                                                      : std::to_string(record["image_id"].get<long long>());
    auto it = by_id.find(image_id);
    if (it == by_id.end()) throw Error(ErrorCode::kUnresolvedRecord, "no scene graph for image '" + image_id + "'");
    const auto& scene = *it->second;
    auto names = scene.object_names();
    Vocabulary vocab(names.begin(), names.end());
    TextAnalysis analysis;
    try {
      analysis = parse_text_analysis(record, &vocab);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, e.what());
    }
    auto type = classify_conflict(analysis, scene);
    nlohmann::ordered_json row;
    row["image_id"] = image_id;
    if (record.contains("id")) row["id"] = record["id"];
    row["conflict_type"] = type ? nlohmann::ordered_json(to_string(*type)) : nlohmann::ordered_json(nullptr);
    row["object_conflict"] = check_object_conflict(analysis, scene);
    row["attribute_conflict"] = check_attribute_conflict(analysis, scene);
    row["relationship_conflict"] = check_relationship_conflict(analysis, scene);
    rows.push_back(std::move(row));
  }
  write_text(out_path, jsonl(rows), out);
  return kOk;
}

// --- evaluate / reward / judge ------------------------------------------------------------

struct EvaluateArgs {
  std::string dataset, responses, out, csv, format = "json", judge_model = "gpt-4o";
  double beta = 1.0;
  ProviderOptions provider;
};

int evaluate(const EvaluateArgs& a, std::ostream& out) {
  auto dataset = load_dataset(a.dataset);
  auto responses = load_responses(a.responses);
  ProviderHandle provider(a.provider, "evaluate");
  EvalOptions options;
  options.beta = a.beta;
  options.jobs = a.provider.jobs;
  options.judge.model = a.judge_model;
  auto reports = evaluate_grouped(dataset.records, responses, provider.get(), options);
  provider.finish();

  if (!a.csv.empty()) write_text(a.csv, to_csv(reports), out);
  if (a.format == "table") {
    write_text(a.out, to_table(reports), out);
  } else {
    nlohmann::ordered_json body;
    body["reports"] = nlohmann::ordered_json::array();
    for (const auto& r : reports) body["reports"].push_back(to_json(r));
    write_text(a.out, body.dump(2) + '\n', out);
  }
  return kOk;
}

struct RewardArgs {
  int final_step = 0;
  std::string consistent;
  std::string dataset, responses, out, judge_model = "gpt-4o";
  ProviderOptions provider;
};

int reward(const RewardArgs& a, std::ostream& out) {
  if (a.final_step > 0) {
    std::vector<bool> cases;
    if (a.consistent.empty() || a.consistent == "true") cases.push_back(true);
    if (a.consistent.empty() || a.consistent == "false") cases.push_back(false);
    std::vector<nlohmann::ordered_json> rows;
    for (bool c : cases) {
      for (int t = 1; t <= a.final_step; ++t) {
        nlohmann::ordered_json row;
        row["step"] = t;
        row["final_step"] = a.final_step;
        row["consistent"] = c;
        row["reward"] = reward_at_step(t, a.final_step, c);
        rows.push_back(std::move(row));
      }
    }
    write_text(a.out, jsonl(rows), out);
    return kOk;
  }
  if (a.dataset.empty() || a.responses.empty()) {
    throw UsageError("reward requires --final-step, or --dataset with --responses");
  }
  auto dataset = load_dataset(a.dataset);
  auto responses = load_responses(a.responses);
  ProviderHandle provider(a.provider, "reward");
  EvalOptions options;
  options.jobs = a.provider.jobs;
  options.judge.model = a.judge_model;
  auto records = score_rewards(dataset.records, responses, provider.get(), options);
  provider.finish();
  std::vector<nlohmann::ordered_json> rows;
  for (const auto& r : records) rows.push_back(to_json(r));
  write_text(a.out, jsonl(rows), out);
  return kOk;
}

struct JudgeArgs {
  std::string kind, question, answer, reference, tag, judge_model = "gpt-4o";
  ProviderOptions provider;
};

int judge(const JudgeArgs& a, std::ostream& out) {
  JudgeOptions options;
  options.model = a.judge_model;
  const std::string tag = a.tag.empty() ? "judge/" + a.kind : a.tag;
  ChatRequest request;
  if (a.kind == "hallucination") {
    request = build_hallucination_prompt(a.question, a.answer, tag, options);
  } else if (a.kind == "quality") {
    if (a.reference.empty()) throw UsageError("judge --kind quality requires --reference");
    request = build_quality_prompt(a.question, a.answer, a.reference, tag, options);
  } else {
    if (a.reference.empty()) throw UsageError("judge --kind consistency requires --reference");
    request = build_consistency_prompt(a.question, a.reference, a.answer, tag, options);
  }
  ProviderHandle provider(a.provider, "judge");
  auto response = provider.get().complete(request);
  provider.finish();

  nlohmann::ordered_json body;
  body["kind"] = a.kind;
  body["tag"] = tag;
  if (a.kind == "hallucination") {
    auto verdict = parse_hallucination_verdict(response.content);
    body["hallucinated"] = verdict.hallucinated;
    body["rationale"] = verdict.rationale;
    body["fallback"] = verdict.fallback;
  } else if (a.kind == "quality") {
    auto rating = parse_quality_rating(response.content);
    body["score"] = rating.score;
    body["rationale"] = rating.rationale;
  } else {
    bool consistent = parse_consistency(response.content);
    body["consistent"] = consistent;
    body["reward"] = consistent ? 1 : -1;
  }
  out << body.dump() << '\n';
  return kOk;
}

// --- stats / split / serve --------------------------------------------------------------

int stats(const std::string& path, const std::string& format, std::size_t top_k, bool lenient,
          std::ostream& out, std::ostream& err) {
  std::vector<LoadIssue> issues;
  auto dataset = load_dataset(path, lenient ? LoadMode::kLenient : LoadMode::kStrict, &issues);
  for (const auto& issue : issues) err << "line " << issue.line << ": " << issue.message << '\n';
  auto s = compute_stats(dataset.records, top_k);
  if (format == "table") {
    out << to_table(s);
  } else {
    out << to_json(s).dump(2) << '\n';
  }
  return kOk;
}

struct SplitArgs {
  std::string dataset, train, test;
  double ratio = 0.9;
  std::uint64_t seed = 0;
  bool stratified = false;
};

std::string with_suffix(const std::string& path, const std::string& suffix) {
  auto p = std::filesystem::path(path);
  auto stem = p.stem().string();
  return (p.parent_path() / (stem + suffix + p.extension().string())).string();
}

int split_command(const SplitArgs& a, std::ostream& out) {
  auto dataset = load_dataset(a.dataset);
  SplitSpec spec{a.ratio, a.seed, a.stratified};
  auto [train, test] = split(dataset, spec);
  const auto train_path = a.train.empty() ? with_suffix(a.dataset, ".train") : a.train;
  const auto test_path = a.test.empty() ? with_suffix(a.dataset, ".test") : a.test;
  write_dataset(train_path, train.records);
  write_dataset(test_path, test.records);
  nlohmann::ordered_json summary;
  summary["n"] = dataset.records.size();
  summary["train"] = train.records.size();
  summary["test"] = test.records.size();
  summary["train_path"] = train_path;
  summary["test_path"] = test_path;
  out << summary.dump() << '\n';
  return kOk;
}

struct ServeArgs {
  std::string dataset, audit_log, image_root, image_ext = ".jpg", ui_dir, host = "127.0.0.1";
  int port = 8080;
};

int serve(const ServeArgs& a) {
  ReviewStore store({a.dataset, a.audit_log, utc_timestamp});
  ServerOptions options;
  options.host = a.host;
  options.port = a.port;
  options.image_root = a.image_root;
  options.image_extension = a.image_ext;
  options.ui_dir = a.ui_dir;
  ReviewServer server(store, options);
  server.bind();
  server.listen();
  return kOk;
}

// Sends log lines to `err` for the duration of one run, then restores the
// previous default logger (the stream may not outlive the call).
class LogRoute {
 public:
  explicit LogRoute(std::ostream& err) : previous_(spdlog::default_logger()) {
    auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
    auto logger = std::make_shared<spdlog::logger>("modconf", sink);
    logger->set_pattern("[%l] %v");
    logger->set_level(previous_->level());
    spdlog::set_default_logger(logger);
  }
  ~LogRoute() { spdlog::set_default_logger(previous_); }
  LogRoute(const LogRoute&) = delete;
  LogRoute& operator=(const LogRoute&) = delete;

 private:
  std::shared_ptr<spdlog::logger> previous_;
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  LogRoute log_route(err);

  CLI::App app{"Modality-conflict dataset synthesis and hallucination evaluation"};
  app.name(args.empty() ? "modconf" : args.front());
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");
  app.footer(
      "Exit codes: 0 ok, 1 internal error, 2 usage, 3 unreadable/malformed input, 4 gateway "
      "(transport/auth/refusal), 5 missing replay fixture entry, 6 data error (duplicate or unknown ids), "
      "7 unparseable judge output.\nThe API key is read from the variable named by --api-key-env "
      "(default OPENAI_API_KEY).");

  SynthesizeArgs syn;
  auto* synthesize_cmd = app.add_subcommand("synthesize", "Build pending conflict triples from scene graphs");
  synthesize_cmd->add_option("--scene-graphs", syn.scene_graphs, "Scene-graph JSON")->required()->check(CLI::ExistingFile);
  synthesize_cmd->add_option("--qa", syn.qa, "Question-answer JSON")->required()->check(CLI::ExistingFile);
  synthesize_cmd->add_option("--out", syn.out, "Output JSONL dataset")->required();
  synthesize_cmd->add_option("--skips", syn.skips, "Write per-image skip records (JSONL)");
  synthesize_cmd->add_option("--count", syn.count, "Number of triples to emit (0: one attempt per image)");
  synthesize_cmd->add_option("--seed", syn.seed, "Seed for all random choices");
  synthesize_cmd->add_option("--config", syn.config, "JSON run config")->check(CLI::ExistingFile);
  synthesize_cmd->add_option("--model", syn.model, "Construction model name");
  add_provider_options(synthesize_cmd, syn.provider);

  std::string classify_scenes, classify_text, classify_out;
  auto* classify_cmd = app.add_subcommand("classify", "Classify text analyses against scene graphs");
  classify_cmd->add_option("--scene-graphs", classify_scenes, "Scene-graph JSON")->required()->check(CLI::ExistingFile);
  classify_cmd->add_option("--text", classify_text, "Text analyses (JSONL)")->required()->check(CLI::ExistingFile);
  classify_cmd->add_option("--out", classify_out, "Output JSONL (default stdout)");

  EvaluateArgs eva;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score model responses: ROUGE-L, Hallu-Rate, LLM-Judge");
  evaluate_cmd->add_option("--dataset", eva.dataset, "Dataset JSONL")->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--responses", eva.responses, "Model responses JSONL")->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--out", eva.out, "Report path (default stdout)");
  evaluate_cmd->add_option("--csv", eva.csv, "Also write a CSV summary");
  evaluate_cmd->add_option("--format", eva.format, "json or table")->check(CLI::IsMember({"json", "table"}));
  evaluate_cmd->add_option("--beta", eva.beta, "ROUGE-L F beta")->check(CLI::PositiveNumber);
  evaluate_cmd->add_option("--judge-model", eva.judge_model, "Judge model name");
  add_provider_options(evaluate_cmd, eva.provider);

  JudgeArgs jud;
  auto* judge_cmd = app.add_subcommand("judge", "Judge a single response");
  judge_cmd->add_option("--kind", jud.kind, "hallucination, quality or consistency")
      ->required()
      ->check(CLI::IsMember({"hallucination", "quality", "consistency"}));
  judge_cmd->add_option("--question", jud.question, "Question text")->required();
  judge_cmd->add_option("--answer", jud.answer, "Model answer");
  judge_cmd->add_option("--reference", jud.reference, "Reference answer");
  judge_cmd->add_option("--tag", jud.tag, "Request tag (default judge/<kind>)");
  judge_cmd->add_option("--judge-model", jud.judge_model, "Judge model name");
  add_provider_options(judge_cmd, jud.provider);

  RewardArgs rew;
  auto* reward_cmd = app.add_subcommand("reward", "Terminal consistency reward: truth table or judged responses");
  reward_cmd->add_option("--final-step", rew.final_step, "Print the per-step reward table for this final step")
      ->check(CLI::PositiveNumber);
  reward_cmd->add_option("--consistent", rew.consistent, "Restrict the table to true or false")
      ->check(CLI::IsMember({"true", "false"}));
  reward_cmd->add_option("--dataset", rew.dataset, "Dataset JSONL")->check(CLI::ExistingFile);
  reward_cmd->add_option("--responses", rew.responses, "Model responses JSONL")->check(CLI::ExistingFile);
  reward_cmd->add_option("--out", rew.out, "Output JSONL (default stdout)");
  reward_cmd->add_option("--judge-model", rew.judge_model, "Judge model name");
  add_provider_options(reward_cmd, rew.provider);

  std::string stats_dataset, stats_format = "json";
  std::size_t stats_top_k = 10;
  bool stats_lenient = false;
  auto* stats_cmd = app.add_subcommand("stats", "Dataset statistics");
  stats_cmd->add_option("--dataset", stats_dataset, "Dataset JSONL")->required()->check(CLI::ExistingFile);
  stats_cmd->add_option("--format", stats_format, "json or table")->check(CLI::IsMember({"json", "table"}));
  stats_cmd->add_option("--top-k", stats_top_k, "Tokens per frequency table");
  stats_cmd->add_flag("--lenient", stats_lenient, "Skip malformed lines instead of failing");

  SplitArgs spl;
  auto* split_cmd = app.add_subcommand("split", "Seeded train/test split");
  split_cmd->add_option("--dataset", spl.dataset, "Dataset JSONL")->required()->check(CLI::ExistingFile);
  split_cmd->add_option("--ratio", spl.ratio, "Train fraction in (0, 1)")->check(CLI::Range(0.0, 1.0));
  split_cmd->add_option("--seed", spl.seed, "Shuffle seed");
  split_cmd->add_option("--train", spl.train, "Train output (default <dataset>.train.jsonl)");
  split_cmd->add_option("--test", spl.test, "Test output (default <dataset>.test.jsonl)");
  split_cmd->add_flag("--stratified", spl.stratified, "Split each conflict type separately");

  ServeArgs srv;
  auto* serve_cmd = app.add_subcommand("serve", "Run the human review service");
  serve_cmd->add_option("--dataset", srv.dataset, "Dataset JSONL under review")->required()->check(CLI::ExistingFile);
  serve_cmd->add_option("--audit-log", srv.audit_log, "Audit log (default <dataset>.audit.jsonl)");
  serve_cmd->add_option("--image-root", srv.image_root, "Directory with <image_id><ext> files");
  serve_cmd->add_option("--image-ext", srv.image_ext, "Image file extension");
  serve_cmd->add_option("--ui-dir", srv.ui_dir, "Built review UI assets");
  serve_cmd->add_option("--host", srv.host, "Bind address");
  serve_cmd->add_option("--port", srv.port, "Port")->check(CLI::Range(0, 65535));

  std::vector<std::string> owned(args.empty() ? std::vector<std::string>{"modconf"} : args);
  std::vector<char*> argv;
  for (auto& a : owned) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (*synthesize_cmd) return synthesize(syn, *synthesize_cmd, out);
    if (*classify_cmd) return classify(classify_scenes, classify_text, classify_out, out);
    if (*evaluate_cmd) return evaluate(eva, out);
    if (*judge_cmd) return judge(jud, out);
    if (*reward_cmd) return reward(rew, out);
    if (*stats_cmd) return stats(stats_dataset, stats_format, stats_top_k, stats_lenient, out, err);
    if (*split_cmd) return split_command(spl, out);
    if (*serve_cmd) return serve(srv);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\nRun with --help for more information.\n";
    return kUsage;
  } catch (const Error& e) {
    err << "error [" << e.code_name() << "]: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const nlohmann::json::exception& e) {
    err << "error [schema-error]: " << e.what() << '\n';
    return kInput;
  } catch (const std::exception& e) {
    err << "error [internal]: " << e.what() << '\n';
    return kInternal;
  }
  return kInternal;
}

}  // namespace modconf::cli
