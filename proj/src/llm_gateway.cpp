#include "modconf/llm_gateway.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "modconf/error.hpp"

namespace modconf {

std::string_view to_string(Role role) {
  switch (role) {
    case Role::kSystem: return "system";
    case Role::kUser: return "user";
    case Role::kAssistant: return "assistant";
  }
  return "user";
}

std::string_view to_string(FinishReason reason) {
  switch (reason) {
    case FinishReason::kStop: return "stop";
    case FinishReason::kLength: return "length";
    case FinishReason::kError: return "error";
  }
  return "error";
}

ChatRequest ChatRequest::user_prompt(std::string model, std::string prompt, std::string tag,
                                     std::optional<double> temperature, int max_tokens) {
  ChatRequest req;
  req.model = std::move(model);
  req.messages.push_back({Role::kUser, std::move(prompt)});
  req.temperature = temperature;
  req.max_tokens = max_tokens;
  req.request_tag = std::move(tag);
  return req;
}

void ChatRequest::validate() const {
  if (messages.empty()) throw Error(ErrorCode::kInvalidArgument, "chat request has no messages");
  if (messages.back().role != Role::kUser) {
    throw Error(ErrorCode::kInvalidArgument, "last chat message must come from the user");
  }
  if (temperature && !(*temperature >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "temperature must be >= 0");
  }
  if (max_tokens <= 0) throw Error(ErrorCode::kInvalidArgument, "max_tokens must be positive");
}

nlohmann::ordered_json ChatRequest::to_wire() const {
  nlohmann::ordered_json body;
  body["model"] = model;
  auto msgs = nlohmann::ordered_json::array();
  for (const auto& m : messages) {
    msgs.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  body["messages"] = std::move(msgs);
  if (temperature) body["temperature"] = *temperature;
  body["max_tokens"] = max_tokens;
  return body;
}

std::string ChatRequest::hash() const {
  const std::string body = to_wire().dump();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_Digest(body.data(), body.size(), digest, &length, EVP_sha256(), nullptr);
  std::ostringstream out;
  for (unsigned int i = 0; i < length; ++i) {
    out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return out.str();
}

// --- ProviderConfig -----------------------------------------------------------

void ProviderConfig::validate() const {
  if (base_url.empty()) throw Error(ErrorCode::kInvalidArgument, "provider base_url is empty");
  if (timeout_ms <= 0) throw Error(ErrorCode::kInvalidArgument, "timeout_ms must be positive");
  if (max_retries < 0) throw Error(ErrorCode::kInvalidArgument, "max_retries must be >= 0");
  if (backoff_initial_ms < 0 || backoff_max_ms < 0 || backoff_multiplier < 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "invalid backoff schedule");
  }
  if (max_in_flight <= 0 || max_in_flight > 1024) {
    throw Error(ErrorCode::kInvalidArgument, "max_in_flight must be in [1, 1024]");
  }
}

std::chrono::milliseconds ProviderConfig::backoff_delay(int retry_index) const {
  double delay = backoff_initial_ms * std::pow(backoff_multiplier, retry_index);
  return std::chrono::milliseconds(static_cast<std::int64_t>(std::min<double>(delay, backoff_max_ms)));
}

ProviderConfig ProviderConfig::from_json(const nlohmann::json& j) {
  ProviderConfig c;
  c.base_url = j.value("base_url", c.base_url);
  c.api_key_env = j.value("api_key_env", c.api_key_env);
  c.model = j.value("model", c.model);
  c.timeout_ms = j.value("timeout_ms", c.timeout_ms);
  c.max_retries = j.value("max_retries", c.max_retries);
  c.backoff_initial_ms = j.value("backoff_initial_ms", c.backoff_initial_ms);
  c.backoff_multiplier = j.value("backoff_multiplier", c.backoff_multiplier);
  c.backoff_max_ms = j.value("backoff_max_ms", c.backoff_max_ms);
  c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
  c.validate();
  return c;
}

nlohmann::json ProviderConfig::to_json() const {
  return {{"base_url", base_url},           {"api_key_env", api_key_env},
          {"model", model},                 {"timeout_ms", timeout_ms},
          {"max_retries", max_retries},     {"backoff_initial_ms", backoff_initial_ms},
          {"backoff_multiplier", backoff_multiplier}, {"backoff_max_ms", backoff_max_ms},
          {"max_in_flight", max_in_flight}};
}

// --- HttpChatProvider -----------------------------------------------------------

ChatResponse parse_chat_completion(const std::string& body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error&) {
    throw Error(ErrorCode::kProviderRefusal, "provider returned a non-JSON body");
  }
  if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) {
    throw Error(ErrorCode::kProviderRefusal, "provider response has no choices");
  }
  const auto& choice = j["choices"][0];
  std::string finish = choice.value("finish_reason", std::string("stop"));
  if (finish == "content_filter") {
    throw Error(ErrorCode::kProviderRefusal, "provider filtered the completion");
  }
  const auto message = choice.value("message", nlohmann::json::object());
  if (!message.contains("content") || !message["content"].is_string()) {
    throw Error(ErrorCode::kProviderRefusal, "provider response has no message content");
  }
  ChatResponse out;
  out.content = message["content"].get<std::string>();
  out.finish_reason = finish == "length" ? FinishReason::kLength : FinishReason::kStop;
  return out;
}

HttpChatProvider::HttpChatProvider(ProviderConfig config, Transport transport, Sleeper sleeper)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      sleeper_(sleeper ? std::move(sleeper)
                       : Sleeper([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })),
      in_flight_(config_.max_in_flight) {
  config_.validate();
}

ChatResponse HttpChatProvider::complete(const ChatRequest& request) {
  request.validate();
  const char* key = std::getenv(config_.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw Error(ErrorCode::kAuthFailure, "environment variable " + config_.api_key_env + " is not set");
  }
  TransportRequest wire{config_.base_url + "/chat/completions", key, request.to_wire().dump(),
                        config_.timeout_ms};

  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      auto delay = config_.backoff_delay(attempt - 1);
      spdlog::warn("[{}] retry {}/{} in {} ms: {}", request.request_tag, attempt, config_.max_retries,
                   delay.count(), last_error);
      sleeper_(delay);
    }
    TransportResult result;
    auto started = std::chrono::steady_clock::now();
    {
      in_flight_.acquire();
      struct Release {
        std::counting_semaphore<1024>& s;
        ~Release() { s.release(); }
      } release{in_flight_};
      ++attempts_made_;
      result = transport_(wire);
    }
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - started);

    if (!result.transport_ok) {
      last_error = "transport: " + result.error;
      continue;
    }
    if (result.status == 401 || result.status == 403) {
      throw Error(ErrorCode::kAuthFailure, "provider rejected credentials (HTTP " +
                                               std::to_string(result.status) + ")");
    }
    if (result.status == 429 || result.status >= 500) {
      last_error = "HTTP " + std::to_string(result.status);
      continue;
    }
    if (result.status != 200) {
      throw Error(ErrorCode::kProviderRefusal,
                  "provider refused request (HTTP " + std::to_string(result.status) + "): " + result.body);
    }
    auto response = parse_chat_completion(result.body);
    response.latency_ms = elapsed.count();
    return response;
  }
  throw Error(ErrorCode::kTransportExhausted,
              "gave up after " + std::to_string(config_.max_retries + 1) + " attempts: " + last_error);
}

// --- fixtures -------------------------------------------------------------------

void Fixture::put(FixtureEntry entry) {
  auto tag = entry.tag;
  entries_.insert_or_assign(std::move(tag), std::move(entry));
}

const FixtureEntry* Fixture::find(std::string_view tag) const {
  auto it = entries_.find(tag);
  return it == entries_.end() ? nullptr : &it->second;
}

nlohmann::ordered_json Fixture::to_json() const {
  auto entries = nlohmann::ordered_json::array();
  for (const auto& [tag, e] : entries_) {
    entries.push_back({{"tag", e.tag}, {"request_hash", e.request_hash}, {"content", e.content}});
  }
  nlohmann::ordered_json j;
  j["entries"] = std::move(entries);
  return j;
}

Fixture Fixture::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("entries") || !j["entries"].is_array()) {
    throw Error(ErrorCode::kSchemaError, "fixture must be an object with an 'entries' array");
  }
  Fixture f;
  for (const auto& e : j["entries"]) {
    if (!e.contains("tag") || !e.contains("content")) {
      throw Error(ErrorCode::kSchemaError, "fixture entry needs 'tag' and 'content'");
    }
    auto tag = e["tag"].get<std::string>();
    if (f.find(tag)) throw Error(ErrorCode::kSchemaError, "duplicate fixture tag '" + tag + "'");
    f.put({tag, e.value("request_hash", std::string{}), e["content"].get<std::string>()});
  }
  return f;
}

Fixture Fixture::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open fixture " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchemaError, path.string() + ": " + e.what());
  }
}

void Fixture::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write fixture " + path.string());
  out << to_json().dump(2) << '\n';
}

ChatResponse ReplayProvider::complete(const ChatRequest& request) {
  request.validate();
  const auto* entry = fixture_.find(request.request_tag);
  if (entry == nullptr) {
    throw Error(ErrorCode::kMissingFixtureEntry, "no fixture entry for tag '" + request.request_tag + "'");
  }
  if (verify_hash_ && !entry->request_hash.empty() && entry->request_hash != request.hash()) {
    throw Error(ErrorCode::kMissingFixtureEntry,
                "fixture entry '" + request.request_tag + "' was recorded for a different request");
  }
  return {entry->content, FinishReason::kStop, 0};
}

ChatResponse RecordingProvider::complete(const ChatRequest& request) {
  auto response = inner_.complete(request);
  std::lock_guard lock(mutex_);
  recorded_.put({request.request_tag, request.hash(), response.content});
  return response;
}

Fixture RecordingProvider::fixture() const {
  std::lock_guard lock(mutex_);
  return recorded_;
}

Fixture record_session(ChatProvider& provider, const std::vector<ChatRequest>& requests) {
  RecordingProvider recorder(provider);
  for (const auto& r : requests) recorder.complete(r);
  return recorder.fixture();
}

std::unique_ptr<ChatProvider> replay_session(Fixture fixture) {
  return std::make_unique<ReplayProvider>(std::move(fixture));
}

}  // namespace modconf
