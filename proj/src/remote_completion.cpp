#include "zsvqa/remote_completion.hpp"

#include <httplib.h>

#include <algorithm>
#include <cstdlib>
#include <json.hpp>
#include <thread>

#include "zsvqa/errors.hpp"
#include "zsvqa/text.hpp"

namespace zsvqa {

using json = nlohmann::json;

EndpointConfig resolve_endpoint(EndpointConfig config) {
  if (config.url.empty()) {
    if (const char* env = std::getenv(kEndpointEnvVar); env != nullptr && *env != '\0') {
      config.url = env;
    }
  }
  if (config.url.empty()) {
    throw ArgumentError(std::string("no completion endpoint: pass --endpoint or set ") +
                        kEndpointEnvVar);
  }
  if (config.max_attempts < 1) throw ArgumentError("max_attempts must be at least 1");
  return config;
}

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ArgumentError("endpoint URL needs a scheme: " + url);
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http") {
    throw ArgumentError("only http:// endpoints are supported, got " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

std::chrono::milliseconds backoff_for(const EndpointConfig& cfg, int attempt) {
  auto delay = cfg.initial_backoff;
  for (int i = 1; i < attempt; ++i) delay = std::min(cfg.max_backoff, delay * 2);
  return std::min(delay, cfg.max_backoff);
}

}  // namespace

std::string remote_completion(const EndpointConfig& endpoint, std::string_view prompt) {
  const SplitUrl url = split_url(endpoint.url);
  httplib::Client client(url.origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(endpoint.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(endpoint.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  const std::string body = json{{"prompt", std::string(prompt)},
                                {"max_new_tokens", endpoint.max_new_tokens},
                                {"greedy", true}}
                               .dump();

  std::string last_failure;
  for (int attempt = 1; attempt <= endpoint.max_attempts; ++attempt) {
    if (attempt > 1) std::this_thread::sleep_for(backoff_for(endpoint, attempt - 1));

    auto res = client.Post(url.path, body, "application/json");
    if (!res) {
      last_failure = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_failure = "server status " + std::to_string(res->status);
      continue;
    }
    if (res->status >= 400) {
      const json err = json::parse(res->body, nullptr, false);
      if (err.is_object() && err.value("error", std::string{}) == "token_limit") {
        const auto used = err.value("prompt_tokens", std::size_t{0});
        const auto limit = err.value("limit", std::size_t{0});
        throw BudgetError("prompt of " + std::to_string(used) +
                              " tokens exceeds the server limit of " + std::to_string(limit),
                          used, limit);
      }
      throw BackendError("completion server rejected the request with status " +
                         std::to_string(res->status) + ": " + res->body);
    }

    const json reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.is_object()) {
      throw MalformedResponseError("completion response is not a JSON object: " + res->body);
    }
    auto it = reply.find("text");
    if (it == reply.end() || !it->is_string()) {
      throw MalformedResponseError("completion response lacks a string 'text' member");
    }
    return it->get<std::string>();
  }
  throw NetworkError("completion endpoint " + endpoint.url + " failed after " +
                     std::to_string(endpoint.max_attempts) + " attempts (" + last_failure + ")");
}

std::string RemoteCompletionBackend::complete_greedy(std::string_view prompt,
                                                     std::size_t max_new_tokens) const {
  EndpointConfig cfg = endpoint_;
  cfg.max_new_tokens = max_new_tokens;
  return remote_completion(cfg, prompt);
}

std::size_t RemoteCompletionBackend::token_count(std::string_view text) const {
  return text::heuristic_token_count(text);
}

}  // namespace zsvqa
