#include "augur/retry.hpp"

#include <cctype>
#include <cmath>
#include <thread>

#include "augur/errors.hpp"

namespace augur {

using std::chrono::milliseconds;
using std::chrono::seconds;

Sleeper thread_sleeper() {
  return [](milliseconds d) { std::this_thread::sleep_for(d); };
}

milliseconds backoff_delay(const RetryPolicy& policy, int failed_attempt, std::optional<seconds> hint) {
  const double scaled =
      static_cast<double>(policy.initial_backoff.count()) * std::pow(policy.multiplier, failed_attempt - 1);
  milliseconds delay{static_cast<milliseconds::rep>(std::min(scaled, 1e12))};
  if (hint && *hint > delay) delay = std::chrono::duration_cast<milliseconds>(*hint);
  return delay;
}

std::optional<seconds> parse_retry_after(const std::string& value) {
  if (value.empty()) return std::nullopt;
  for (char c : value) {
    if (!std::isdigit(static_cast<unsigned char>(c)) && c != ' ') return std::nullopt;
  }
  return seconds{std::stoll(value)};
}

bool is_retryable_status(int status) {
  return status == 408 || status == 429 || status == 500 || status == 502 || status == 503 || status == 504;
}

HttpResponse send_with_retry(HttpTransport& transport, const HttpRequest& request, const RetryPolicy& policy,
                             const Sleeper& sleep, std::vector<AttemptRecord>* log) {
  milliseconds waited{0};
  for (int attempt = 1;; ++attempt) {
    AttemptRecord record{attempt, 0, milliseconds{0}, {}};
    std::optional<seconds> hint;
    std::string failure;
    int status = 0;
    try {
      HttpResponse response = transport.send(request);
      status = record.status = response.status;
      if (status == 401 || status == 403) {
        record.note = "auth";
        if (log) log->push_back(record);
        throw AuthError("authentication rejected (HTTP " + std::to_string(status) + ")");
      }
      if (!is_retryable_status(status)) {
        record.note = "done";
        if (log) log->push_back(record);
        return response;
      }
      if (auto h = response.header("retry-after")) hint = parse_retry_after(*h);
      failure = "HTTP " + std::to_string(status);
    } catch (const TransportError& e) {
      failure = e.what();
    }

    milliseconds delay = backoff_delay(policy, attempt, hint);
    const milliseconds remaining = policy.max_total_backoff - waited;
    const bool out_of_attempts = attempt >= policy.max_attempts;
    const bool out_of_budget = remaining <= milliseconds{0} || (hint && delay > remaining);
    if (out_of_attempts || out_of_budget) {
      record.note = out_of_attempts ? "attempts exhausted" : "backoff budget exhausted";
      if (log) log->push_back(record);
      if (status == 429) {
        throw RateLimited("rate limited after " + std::to_string(attempt) + " attempts", hint);
      }
      throw TransportError(failure + " after " + std::to_string(attempt) + " attempts");
    }
    delay = std::min(delay, remaining);
    record.wait_after = delay;
    record.note = "retry";
    if (log) log->push_back(record);
    sleep(delay);
    waited += delay;
  }
}

}  // namespace augur
