#pragma once

#include <chrono>
#include <functional>
#include <string>
#include <string_view>

#include "autodsm/error.hpp"

namespace autodsm::http {

/// Base URL split into what the HTTP client needs, e.g.
/// "https://api.openai.com/v1" -> origin "https://api.openai.com", base_path "/v1".
struct Endpoint {
  std::string origin;
  std::string base_path;

  static Endpoint parse(std::string_view url);
  std::string path(std::string_view suffix) const;
};

/// Transport failure or non-2xx status. `status` is 0 when no response arrived.
class TransportError : public Error {
 public:
  TransportError(const std::string& what, int status, bool retriable)
      : Error(what), status_(status), retriable_(retriable) {}
  int status() const { return status_; }
  bool retriable() const { return retriable_; }

 private:
  int status_;
  bool retriable_;
};

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds initial_delay{1000};
  double multiplier = 2.0;
  std::chrono::milliseconds max_delay{30000};
  // Replaceable so tests do not sleep.
  std::function<void(std::chrono::milliseconds)> sleep;

  std::chrono::milliseconds delay_for(int attempt) const;
};

bool is_retriable_status(int status);

struct Response {
  int status = 0;
  std::string body;
};

struct PostOptions {
  std::string bearer_token;
  std::chrono::seconds timeout{120};
  RetryPolicy retry;
};

/// POSTs a JSON body, retrying transport failures, 429 and 5xx with
/// exponential backoff. Returns the first 2xx response; throws TransportError
/// otherwise.
Response post_json(const Endpoint& endpoint, std::string_view suffix, const std::string& body,
                   const PostOptions& options);

/// Reads the API token from the environment. Throws ConfigError if unset.
std::string api_key_from_env(const char* variable = "DSM_API_KEY");

}  // namespace autodsm::http
