#include "autodsm/oracle.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>
#include <sstream>

namespace autodsm::oracle {
namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (ctx_ == nullptr || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) {
      throw Error("SHA-256 initialisation failed");
    }
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  // Length-prefixed so field boundaries cannot be shifted.
  void field(std::string_view s) {
    const auto n = static_cast<std::uint64_t>(s.size());
    std::array<unsigned char, 8> len{};
    for (int i = 0; i < 8; ++i) len[i] = static_cast<unsigned char>(n >> (8 * i));
    EVP_DigestUpdate(ctx_, len.data(), len.size());
    EVP_DigestUpdate(ctx_, s.data(), s.size());
  }

  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int n = 0;
    EVP_DigestFinal_ex(ctx_, md.data(), &n);
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(n * 2);
    for (unsigned int i = 0; i < n; ++i) {
      out.push_back(kDigits[md[i] >> 4]);
      out.push_back(kDigits[md[i] & 0xF]);
    }
    return out;
  }

 private:
  EVP_MD_CTX* ctx_;
};

std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

std::string_view trim_view(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string cache_key(const CompletionRequest& req) {
  Sha256 h;
  h.field("autodsm-completion-v1");
  h.field(req.model_id);
  h.field(format_double(req.temperature));
  h.field(req.system_text);
  h.field(req.user_text);
  return h.hex();
}

std::string prompt_fingerprint(const CompletionRequest& req) {
  Sha256 h;
  h.field("autodsm-prompt-v1");
  h.field(req.system_text);
  h.field(req.user_text);
  return h.hex();
}

ScriptMissError::ScriptMissError(std::string prompt)
    : Error("scripted backend has no answer for prompt (fingerprint entries and substrings "
            "all missed):\n" +
            prompt),
      prompt_(std::move(prompt)) {}

ScriptedBackend::ScriptedBackend(std::vector<Entry> entries) : entries_(std::move(entries)) {
  std::map<std::pair<MatchKind, std::string>, std::size_t> seen;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (e.pattern.empty()) throw ParseError("script entry " + std::to_string(i + 1) + " has an empty pattern");
    if (!seen.emplace(std::pair{e.kind, e.pattern}, i).second) {
      throw ParseError("script pattern appears more than once: " + e.pattern);
    }
    if (e.kind == MatchKind::Fingerprint) by_fingerprint_.emplace(e.pattern, i);
  }
}

ScriptedBackend ScriptedBackend::parse(std::string_view script) {
  std::vector<Entry> entries;
  std::vector<std::string> lines;
  auto flush = [&] {
    if (entries.empty()) return;
    while (!lines.empty() && trim_view(lines.back()).empty()) lines.pop_back();
    std::string answer;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (i) answer.push_back('\n');
      answer += lines[i];
    }
    entries.back().answer = std::move(answer);
    lines.clear();
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= script.size()) {
    auto eol = script.find('\n', pos);
    if (eol == std::string_view::npos) eol = script.size();
    std::string_view line = script.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    const bool last = eol == script.size();
    pos = eol + 1;

    if (line.starts_with(">>> ")) {
      flush();
      const auto header = line.substr(4);
      const auto colon = header.find(':');
      if (colon == std::string_view::npos) {
        throw ParseError("script line " + std::to_string(line_no) + ": expected 'match:' or 'key:'");
      }
      const auto kind = trim_view(header.substr(0, colon));
      const auto pattern = std::string(trim_view(header.substr(colon + 1)));
      if (kind == "match") {
        entries.push_back({MatchKind::Substring, pattern, {}});
      } else if (kind == "key") {
        entries.push_back({MatchKind::Fingerprint, pattern, {}});
      } else {
        throw ParseError("script line " + std::to_string(line_no) + ": unknown entry kind '" +
                         std::string(kind) + "'");
      }
    } else if (entries.empty()) {
      if (!trim_view(line).empty() && !line.starts_with("#")) {
        throw ParseError("script line " + std::to_string(line_no) +
                         ": text before the first '>>> ' entry");
      }
    } else {
      // The empty string after a final newline is not a line.
      if (!(last && line.empty())) lines.emplace_back(line);
    }
    if (last) break;
  }
  flush();
  return ScriptedBackend(std::move(entries));
}

ScriptedBackend ScriptedBackend::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open script file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

CompletionAnswer ScriptedBackend::complete(const CompletionRequest& req) {
  if (auto it = by_fingerprint_.find(prompt_fingerprint(req)); it != by_fingerprint_.end()) {
    return {entries_[it->second].answer, id(), false};
  }
  const Entry* best = nullptr;
  bool ambiguous = false;
  for (const auto& e : entries_) {
    if (e.kind != MatchKind::Substring) continue;
    if (req.user_text.find(e.pattern) == std::string::npos) continue;
    if (best == nullptr || e.pattern.size() > best->pattern.size()) {
      best = &e;
      ambiguous = false;
    } else if (e.pattern.size() == best->pattern.size()) {
      ambiguous = true;
    }
  }
  if (best == nullptr) throw ScriptMissError(req.user_text);
  if (ambiguous) {
    throw Error("scripted backend: several equally long patterns match prompt:\n" + req.user_text);
  }
  return {best->answer, id(), false};
}

std::string format_script(const std::vector<ScriptedBackend::Entry>& entries) {
  std::string out;
  for (const auto& e : entries) {
    out += e.kind == ScriptedBackend::MatchKind::Substring ? ">>> match: " : ">>> key: ";
    out += e.pattern;
    out += '\n';
    out += e.answer;
    out += '\n';
  }
  return out;
}

CachingBackend::CachingBackend(std::shared_ptr<ChatBackend> inner,
                               std::optional<std::filesystem::path> file)
    : inner_(std::move(inner)), file_(std::move(file)) {
  if (!inner_) throw ConfigError("caching backend needs an inner backend");
  if (!file_) return;
  if (std::ifstream in(*file_, std::ios::binary); in) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      try {
        const auto rec = nlohmann::json::parse(line);
        answers_[rec.at("key").get<std::string>()] = rec.at("text").get<std::string>();
      } catch (const nlohmann::json::exception&) {
        // An interrupted run can leave a torn final record.
        spdlog::warn("{}:{}: skipping unreadable cache record", file_->string(), line_no);
      }
    }
  }
  out_.open(*file_, std::ios::binary | std::ios::app);
  if (!out_) throw IoError("cannot open cache file for appending: " + file_->string());
}

std::size_t CachingBackend::size() const {
  std::shared_lock lock(mutex_);
  return answers_.size();
}

void CachingBackend::persist(const std::string& key, const std::string& text) {
  if (!file_) return;
  std::lock_guard lock(file_mutex_);
  out_ << nlohmann::json{{"key", key}, {"text", text}}.dump() << '\n';
  out_.flush();
  if (!out_) throw IoError("failed writing cache file: " + file_->string());
}

CompletionAnswer CachingBackend::complete(const CompletionRequest& req) {
  const auto key = cache_key(req);
  {
    std::shared_lock lock(mutex_);
    if (auto it = answers_.find(key); it != answers_.end()) {
      ++hits_;
      return {it->second, id(), true};
    }
  }

  std::promise<std::string> promise;
  {
    std::unique_lock lock(inflight_mutex_);
    {
      // Re-check: the answer may have landed while we waited for the lock.
      std::shared_lock read(mutex_);
      if (auto it = answers_.find(key); it != answers_.end()) {
        ++hits_;
        return {it->second, id(), true};
      }
    }
    if (auto it = inflight_.find(key); it != inflight_.end()) {
      auto pending = it->second;
      lock.unlock();
      ++hits_;
      return {pending.get(), id(), true};
    }
    inflight_.emplace(key, promise.get_future().share());
  }

  ++misses_;
  try {
    auto answer = inner_->complete(req);
    {
      std::unique_lock lock(mutex_);
      answers_.emplace(key, answer.text);
    }
    persist(key, answer.text);
    promise.set_value(answer.text);
    {
      std::lock_guard lock(inflight_mutex_);
      inflight_.erase(key);
    }
    answer.cached = false;
    return answer;
  } catch (...) {
    promise.set_exception(std::current_exception());
    std::lock_guard lock(inflight_mutex_);
    inflight_.erase(key);
    throw;
  }
}

std::string chat_request_body(const CompletionRequest& req) {
  nlohmann::json messages = nlohmann::json::array();
  if (!req.system_text.empty()) {
    messages.push_back({{"role", "system"}, {"content", req.system_text}});
  }
  messages.push_back({{"role", "user"}, {"content", req.user_text}});
  return nlohmann::json{{"model", req.model_id},
                        {"temperature", req.temperature},
                        {"messages", std::move(messages)}}
      .dump();
}

std::string parse_chat_response(std::string_view body) {
  try {
    const auto j = nlohmann::json::parse(body);
    const auto& content = j.at("choices").at(0).at("message").at("content");
    return content.is_null() ? std::string{} : content.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed chat completion response: ") + e.what());
  }
}

RemoteChatBackend::RemoteChatBackend(RemoteChatConfig config)
    : config_(std::move(config)),
      endpoint_(http::Endpoint::parse(config_.base_url)),
      slots_(static_cast<std::ptrdiff_t>(
          std::clamp<std::size_t>(config_.max_in_flight, 1, kMaxSlots))) {
  if (config_.max_in_flight == 0) throw ConfigError("max_in_flight must be positive");
}

std::string RemoteChatBackend::id() const {
  return "remote:" + endpoint_.origin + endpoint_.base_path;
}

CompletionAnswer RemoteChatBackend::complete(const CompletionRequest& req) {
  slots_.acquire();
  struct Release {
    std::counting_semaphore<kMaxSlots>& s;
    ~Release() { s.release(); }
  } release{slots_};

  const http::PostOptions options{config_.api_key, config_.timeout, config_.retry};
  const auto response = http::post_json(endpoint_, "/chat/completions", chat_request_body(req), options);
  return {parse_chat_response(response.body), id(), false};
}

}  // namespace autodsm::oracle
