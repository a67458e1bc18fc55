#include "autodsm/http.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <spdlog/spdlog.h>

namespace autodsm::http {

Endpoint Endpoint::parse(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) {
    throw ConfigError("endpoint URL must include a scheme: " + std::string(url));
  }
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw ConfigError("unsupported endpoint scheme: " + std::string(scheme));
  }
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint ep;
  if (path_start == std::string_view::npos) {
    ep.origin = std::string(url);
  } else {
    ep.origin = std::string(url.substr(0, path_start));
    ep.base_path = std::string(url.substr(path_start));
    while (!ep.base_path.empty() && ep.base_path.back() == '/') ep.base_path.pop_back();
  }
  if (ep.origin.size() <= scheme_end + 3) throw ConfigError("endpoint URL has no host");
  return ep;
}

std::string Endpoint::path(std::string_view suffix) const {
  std::string p = base_path;
  if (suffix.empty() || suffix.front() != '/') p.push_back('/');
  p.append(suffix);
  return p;
}

std::chrono::milliseconds RetryPolicy::delay_for(int attempt) const {
  double d = static_cast<double>(initial_delay.count());
  for (int i = 0; i < attempt; ++i) d *= multiplier;
  d = std::min(d, static_cast<double>(max_delay.count()));
  return std::chrono::milliseconds(static_cast<long long>(d));
}

bool is_retriable_status(int status) { return status == 429 || (status >= 500 && status < 600); }

Response post_json(const Endpoint& endpoint, std::string_view suffix, const std::string& body,
                   const PostOptions& options) {
  httplib::Client client(endpoint.origin);
  client.set_connection_timeout(std::chrono::seconds(10));
  client.set_read_timeout(options.timeout);
  client.set_write_timeout(std::chrono::seconds(30));
  httplib::Headers headers;
  if (!options.bearer_token.empty()) {
    headers.emplace("Authorization", "Bearer " + options.bearer_token);
  }
  const auto path = endpoint.path(suffix);

  for (int attempt = 0;; ++attempt) {
    auto res = client.Post(path, headers, body, "application/json");
    int status = 0;
    std::string what;
    if (!res) {
      what = "request to " + endpoint.origin + path + " failed: " + httplib::to_string(res.error());
    } else if (res->status >= 200 && res->status < 300) {
      return Response{res->status, res->body};
    } else {
      status = res->status;
      what = "HTTP " + std::to_string(status) + " from " + endpoint.origin + path;
      if (!is_retriable_status(status)) {
        throw TransportError(what + ": " + res->body.substr(0, 500), status, false);
      }
    }
    if (attempt >= options.retry.max_retries) {
      throw TransportError(what + " (after " + std::to_string(attempt + 1) + " attempts)",
                           status, true);
    }
    const auto delay = options.retry.delay_for(attempt);
    spdlog::warn("{}; retrying in {} ms", what, delay.count());
    if (options.retry.sleep) {
      options.retry.sleep(delay);
    } else {
      std::this_thread::sleep_for(delay);
    }
  }
}

std::string api_key_from_env(const char* variable) {
  const char* v = std::getenv(variable);
  if (v == nullptr || *v == '\0') {
    throw ConfigError(std::string("environment variable ") + variable + " is not set");
  }
  return v;
}

}  // namespace autodsm::http
