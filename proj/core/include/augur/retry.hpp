#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "augur/http.hpp"

namespace augur {

/// Exponential backoff with a hard attempt cap and a ceiling on the total
/// time spent waiting. Server `Retry-After` hints raise the delay for that
/// attempt but never push the total past `max_total_backoff`.
struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds initial_backoff{1000};
  double multiplier = 2.0;
  std::chrono::milliseconds max_total_backoff{60000};
};

struct AttemptRecord {
  int attempt = 0;
  int status = 0;  // 0 when the transport produced no response
  std::chrono::milliseconds wait_after{0};
  std::string note;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

Sleeper thread_sleeper();

/// Nominal delay after the `failed_attempt`-th (1-based) failure.
std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int failed_attempt,
                                        std::optional<std::chrono::seconds> hint);

/// Parses a delta-seconds `Retry-After` value; HTTP-date forms yield nullopt.
std::optional<std::chrono::seconds> parse_retry_after(const std::string& value);

bool is_retryable_status(int status);

/// Sends `request`, retrying transport failures, 429 and transient 5xx.
/// 401/403 raise AuthError at once. When attempts or the backoff budget run
/// out: 429 raises RateLimited carrying the last hint, 5xx and transport
/// failures raise TransportError. Other statuses are returned as-is.
HttpResponse send_with_retry(HttpTransport& transport, const HttpRequest& request, const RetryPolicy& policy,
                             const Sleeper& sleep, std::vector<AttemptRecord>* log = nullptr);

}  // namespace augur
