#include "causalrag/http.hpp"

#include <httplib.h>

#include <cstdlib>
#include <thread>

#include "causalrag/error.hpp"

namespace causalrag {
namespace {

struct SplitUrl {
  std::string origin; // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("URL '" + url + "' has no scheme");
  }
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw ConfigError("unsupported URL scheme '" + scheme + "'");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    return {url, "/"};
  }
  return {url.substr(0, path_start), url.substr(path_start)};
}

class HttplibClient final : public HttpClient {
public:
  HttpResponse post(const std::string& url, const std::string& body, const HttpHeaders& headers,
                    std::chrono::milliseconds timeout) override {
    const auto parts = split_url(url);
    httplib::Client client(parts.origin);
    const auto secs = static_cast<time_t>(timeout.count() / 1000);
    const auto usecs = static_cast<time_t>((timeout.count() % 1000) * 1000);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);

    httplib::Headers h;
    for (const auto& [k, v] : headers) {
      h.emplace(k, v);
    }
    auto result = client.Post(parts.path, h, body, "application/json");
    if (!result) {
      throw TransportError("POST " + url + " failed: " + httplib::to_string(result.error()));
    }
    return {result->status, result->body};
  }
};

} // namespace

std::shared_ptr<HttpClient> make_default_http_client() { return std::make_shared<HttplibClient>(); }

bool is_retryable_status(int status) noexcept {
  return status == 408 || status == 429 || status >= 500;
}

HttpResponse post_with_retries(HttpClient& client, const std::string& url, const std::string& body,
                               const HttpHeaders& headers, std::chrono::milliseconds timeout,
                               const RetryPolicy& policy) {
  std::string last_failure;
  auto delay = policy.base_delay;
  for (int attempt = 0; attempt <= policy.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
    try {
      HttpResponse response = client.post(url, body, headers, timeout);
      if (response.status >= 200 && response.status < 300) {
        return response;
      }
      last_failure = "HTTP " + std::to_string(response.status);
      if (!response.body.empty()) {
        last_failure += ": " + response.body.substr(0, 200);
      }
      if (!is_retryable_status(response.status)) {
        break;
      }
    } catch (const TransportError& e) {
      last_failure = e.what();
    }
  }
  throw ProviderError("request to " + url + " failed after " +
                      std::to_string(policy.max_retries + 1) + " attempt(s): " + last_failure);
}

std::optional<std::string> resolve_api_key(const std::string& env_var) {
  if (env_var.empty()) {
    return std::nullopt;
  }
  const char* value = std::getenv(env_var.c_str());
  if (value == nullptr) {
    throw ConfigError("environment variable '" + env_var + "' is not set");
  }
  return std::string(value);
}

} // namespace causalrag
