#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "autodsm/error.hpp"
#include "autodsm/http.hpp"

namespace autodsm::oracle {

inline constexpr const char* kDefaultModel = "gpt-3.5-turbo";

struct CompletionRequest {
  std::string system_text;
  std::string user_text;
  double temperature = 0.0;
  std::string model_id = kDefaultModel;
};

struct CompletionAnswer {
  std::string text;  // verbatim, never trimmed
  std::string backend_id;
  bool cached = false;
};

/// SHA-256 (hex) over model_id, temperature, system_text and user_text.
/// Stable across runs and platforms.
std::string cache_key(const CompletionRequest& req);

/// SHA-256 (hex) over system_text and user_text only; what scripts key on.
std::string prompt_fingerprint(const CompletionRequest& req);

/// A completion provider. complete() may be called from several threads.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string id() const = 0;
  virtual CompletionAnswer complete(const CompletionRequest& req) = 0;
};

/// The scripted backend had no entry for a request.
class ScriptMissError : public Error {
 public:
  explicit ScriptMissError(std::string prompt);
  const std::string& prompt() const { return prompt_; }

 private:
  std::string prompt_;
};

/// Replays canned answers. Entries match either on the exact prompt
/// fingerprint or on a substring of user_text; fingerprints win, then the
/// longest matching substring.
///
/// Script file format (UTF-8 text):
///
///     # comment lines are allowed before the first entry
///     >>> match: Are Piston and Crankshaft
///     Yes
///     >>> key: 9f86d081884c7d659a2feaa0c55ad015a3bf4f1b2b0b822cd15d6c15b0f00a08
///     No
///
/// An entry's answer is every line up to the next ">>> " header, joined
/// with "\n"; trailing blank lines are dropped.
class ScriptedBackend final : public ChatBackend {
 public:
  enum class MatchKind { Fingerprint, Substring };
  struct Entry {
    MatchKind kind;
    std::string pattern;
    std::string answer;
  };

  /// Throws ParseError if a pattern appears twice.
  explicit ScriptedBackend(std::vector<Entry> entries);

  static ScriptedBackend parse(std::string_view script);
  static ScriptedBackend load(const std::filesystem::path& path);

  std::string id() const override { return "scripted"; }
  CompletionAnswer complete(const CompletionRequest& req) override;

  const std::vector<Entry>& entries() const { return entries_; }

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> by_fingerprint_;
};

/// Serializes a script back into the file format accepted by parse().
std::string format_script(const std::vector<ScriptedBackend::Entry>& entries);

/// Memoizes an inner backend by cache_key. Concurrent identical requests
/// are coalesced so the inner backend sees each key at most once. With a
/// file path, answers are appended as JSON lines as soon as they arrive
/// and reloaded on construction.
class CachingBackend final : public ChatBackend {
 public:
  explicit CachingBackend(std::shared_ptr<ChatBackend> inner,
                          std::optional<std::filesystem::path> file = std::nullopt);

  std::string id() const override { return inner_->id(); }
  CompletionAnswer complete(const CompletionRequest& req) override;

  std::size_t size() const;
  std::size_t hits() const { return hits_.load(); }
  std::size_t misses() const { return misses_.load(); }

 private:
  void persist(const std::string& key, const std::string& text);

  std::shared_ptr<ChatBackend> inner_;
  std::optional<std::filesystem::path> file_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, std::string> answers_;
  std::mutex inflight_mutex_;
  std::unordered_map<std::string, std::shared_future<std::string>> inflight_;
  std::mutex file_mutex_;
  std::ofstream out_;
  std::atomic<std::size_t> hits_{0};
  std::atomic<std::size_t> misses_{0};
};

/// Counts calls that reach the wrapped backend.
class CountingBackend final : public ChatBackend {
 public:
  explicit CountingBackend(std::shared_ptr<ChatBackend> inner) : inner_(std::move(inner)) {}

  std::string id() const override { return inner_->id(); }
  CompletionAnswer complete(const CompletionRequest& req) override {
    ++calls_;
    return inner_->complete(req);
  }
  std::size_t calls() const { return calls_.load(); }

 private:
  std::shared_ptr<ChatBackend> inner_;
  std::atomic<std::size_t> calls_{0};
};

struct RemoteChatConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key;
  std::size_t max_in_flight = 4;
  std::chrono::seconds timeout{120};
  http::RetryPolicy retry;
};

/// OpenAI-compatible `POST {base}/chat/completions`, non-streaming.
class RemoteChatBackend final : public ChatBackend {
 public:
  explicit RemoteChatBackend(RemoteChatConfig config);

  std::string id() const override;
  CompletionAnswer complete(const CompletionRequest& req) override;

 private:
  static constexpr std::ptrdiff_t kMaxSlots = 1024;

  RemoteChatConfig config_;
  http::Endpoint endpoint_;
  std::counting_semaphore<kMaxSlots> slots_;
};

/// The JSON body RemoteChatBackend sends for a request.
std::string chat_request_body(const CompletionRequest& req);

/// Extracts choices[0].message.content from a chat completions response.
std::string parse_chat_response(std::string_view body);

}  // namespace autodsm::oracle
