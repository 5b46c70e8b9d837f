#pragma once

// Chat-completion client. Every network call in the toolchain goes through a
// ChatProvider: HttpChatProvider for live runs, ReplayProvider for recorded
// fixtures, RecordingProvider to capture a live session into a fixture.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace modconf {

enum class Role { kSystem, kUser, kAssistant };
std::string_view to_string(Role role);

struct ChatMessage {
  Role role = Role::kUser;
  std::string content;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  std::optional<double> temperature;  // nullopt: provider default
  int max_tokens = 512;
  std::string request_tag;

  static ChatRequest user_prompt(std::string model, std::string prompt, std::string tag,
                                 std::optional<double> temperature = std::nullopt,
                                 int max_tokens = 512);

  // Throws Error(kInvalidArgument) unless messages are non-empty, the last one
  // is from the user, temperature >= 0 and max_tokens > 0.
  void validate() const;

  // JSON body in the chat-completions wire shape, keys in fixed order.
  nlohmann::ordered_json to_wire() const;
  // Hex SHA-256 of the serialized wire body.
  std::string hash() const;
};

enum class FinishReason { kStop, kLength, kError };
std::string_view to_string(FinishReason reason);

struct ChatResponse {
  std::string content;
  FinishReason finish_reason = FinishReason::kStop;
  std::int64_t latency_ms = 0;
};

class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  virtual ChatResponse complete(const ChatRequest& request) = 0;
};

struct ProviderConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key_env = "OPENAI_API_KEY";
  std::string model = "gpt-4o-mini";
  int timeout_ms = 60000;
  int max_retries = 3;
  // Delay before retry k (0-based) is min(initial * multiplier^k, max).
  int backoff_initial_ms = 500;
  double backoff_multiplier = 2.0;
  int backoff_max_ms = 8000;
  int max_in_flight = 4;

  void validate() const;
  std::chrono::milliseconds backoff_delay(int retry_index) const;

  static ProviderConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// --- live HTTP provider -----------------------------------------------------

struct TransportRequest {
  std::string url;  // full endpoint URL
  std::string api_key;
  std::string body;
  int timeout_ms = 0;
};

struct TransportResult {
  bool transport_ok = true;  // false: connection failure or timeout
  int status = 0;
  std::string body;
  std::string error;  // transport error description
};

using Transport = std::function<TransportResult(const TransportRequest&)>;
using Sleeper = std::function<void(std::chrono::milliseconds)>;

// httplib-backed POST.
Transport make_http_transport();

class HttpChatProvider : public ChatProvider {
 public:
  explicit HttpChatProvider(ProviderConfig config, Transport transport = make_http_transport(),
                            Sleeper sleeper = {});

  // Retries transport failures, 429 and 5xx with exponential backoff. 401/403
  // fail immediately with kAuthFailure; other 4xx and content-filter stops are
  // kProviderRefusal; exhausted retries are kTransportExhausted.
  ChatResponse complete(const ChatRequest& request) override;

  const ProviderConfig& config() const { return config_; }
  int attempts_made() const { return attempts_made_.load(); }

 private:
  ProviderConfig config_;
  Transport transport_;
  Sleeper sleeper_;
  std::counting_semaphore<1024> in_flight_;
  std::atomic<int> attempts_made_{0};
};

// Extracts the first choice's content; throws kProviderRefusal on malformed or
// filtered bodies.
ChatResponse parse_chat_completion(const std::string& body);

// --- fixtures ---------------------------------------------------------------

struct FixtureEntry {
  std::string tag;
  std::string request_hash;
  std::string content;
};

// {"entries": [{"tag", "request_hash", "content"}]}, entries sorted by tag.
class Fixture {
 public:
  void put(FixtureEntry entry);
  const FixtureEntry* find(std::string_view tag) const;
  std::size_t size() const { return entries_.size(); }
  const std::map<std::string, FixtureEntry, std::less<>>& entries() const { return entries_; }

  nlohmann::ordered_json to_json() const;
  static Fixture from_json(const nlohmann::json& j);
  static Fixture load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

 private:
  std::map<std::string, FixtureEntry, std::less<>> entries_;
};

class ReplayProvider : public ChatProvider {
 public:
  explicit ReplayProvider(Fixture fixture, bool verify_hash = false)
      : fixture_(std::move(fixture)), verify_hash_(verify_hash) {}

  // Looks the request up by request_tag; kMissingFixtureEntry when absent, or
  // when verify_hash is set and the recorded hash differs.
  ChatResponse complete(const ChatRequest& request) override;

  const Fixture& fixture() const { return fixture_; }

 private:
  const Fixture fixture_;
  bool verify_hash_;
};

class RecordingProvider : public ChatProvider {
 public:
  explicit RecordingProvider(ChatProvider& inner) : inner_(inner) {}

  ChatResponse complete(const ChatRequest& request) override;
  Fixture fixture() const;

 private:
  ChatProvider& inner_;
  mutable std::mutex mutex_;
  Fixture recorded_;
};

// Runs every request through `provider` and captures the answers.
Fixture record_session(ChatProvider& provider, const std::vector<ChatRequest>& requests);
std::unique_ptr<ChatProvider> replay_session(Fixture fixture);

}  // namespace modconf
