#pragma once

#include <chrono>
#include <cstddef>
#include <string>
#include <string_view>

#include "zsvqa/adapters.hpp"

namespace zsvqa {

// Environment variable consulted when no endpoint URL is given explicitly.
inline constexpr const char* kEndpointEnvVar = "ZSVQA_COMPLETION_URL";

struct EndpointConfig {
  std::string url;  // e.g. http://127.0.0.1:8080/complete
  std::chrono::milliseconds timeout{30000};
  int max_attempts = 4;
  std::chrono::milliseconds initial_backoff{200};
  std::chrono::milliseconds max_backoff{5000};
  std::size_t max_new_tokens = 10;
};

// Fills `url` from the environment when it is empty. Throws ArgumentError if
// neither is set.
EndpointConfig resolve_endpoint(EndpointConfig config);

// POSTs {"prompt", "max_new_tokens", "greedy": true} and returns the "text"
// member of the response. 5xx responses and transport failures are retried
// with exponential backoff up to max_attempts.
//
// Errors: NetworkError (transport, timeout, exhausted retries),
// MalformedResponseError (non-JSON or missing "text"), BudgetError (server
// reports the prompt exceeds its token limit).
std::string remote_completion(const EndpointConfig& endpoint, std::string_view prompt);

class RemoteCompletionBackend final : public CompletionBackend {
 public:
  explicit RemoteCompletionBackend(EndpointConfig endpoint) : endpoint_(std::move(endpoint)) {}

  std::string complete_greedy(std::string_view prompt, std::size_t max_new_tokens) const override;
  // The wire protocol carries no tokenizer, so prompt budgeting uses the
  // heuristic counter and the server's own limit remains authoritative.
  std::size_t token_count(std::string_view text) const override;
  std::string tokenizer_name() const override { return "heuristic-alnum-punct"; }

  const EndpointConfig& endpoint() const { return endpoint_; }

 private:
  EndpointConfig endpoint_;
};

}  // namespace zsvqa
