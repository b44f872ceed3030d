#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace causalrag {

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// Minimal blocking POST transport. Implementations throw TransportError when
/// no HTTP response was obtained (connect failure, timeout, TLS).
class HttpClient {
public:
  virtual ~HttpClient() = default;

  virtual HttpResponse post(const std::string& url, const std::string& body,
                            const HttpHeaders& headers, std::chrono::milliseconds timeout) = 0;
};

/// cpp-httplib backed client supporting http:// and https:// URLs.
std::shared_ptr<HttpClient> make_default_http_client();

struct RetryPolicy {
  int max_retries = 2;
  std::chrono::milliseconds base_delay{500}; // doubled after every failed attempt
};

/// 408, 429 and 5xx.
bool is_retryable_status(int status) noexcept;

/// POSTs and retries transport failures and retryable statuses with
/// exponential backoff. Returns the first 2xx response; throws ProviderError
/// describing the last failure otherwise.
HttpResponse post_with_retries(HttpClient& client, const std::string& url, const std::string& body,
                               const HttpHeaders& headers, std::chrono::milliseconds timeout,
                               const RetryPolicy& policy);

/// Value of the environment variable named `env_var`, or nullopt when `env_var`
/// is empty. Throws ConfigError when the name is set but the variable is not.
std::optional<std::string> resolve_api_key(const std::string& env_var);

} // namespace causalrag
