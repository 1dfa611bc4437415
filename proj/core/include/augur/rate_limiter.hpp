#pragma once

#include <chrono>
#include <mutex>

namespace augur {

/// Token bucket shared by every outbound call of a process.
class RateLimiter {
 public:
  /// `requests_per_minute <= 0` disables limiting.
  explicit RateLimiter(double requests_per_minute, double burst = 1.0);

  /// Blocks until a token is available.
  void acquire();

  double requests_per_minute() const noexcept { return rate_per_minute_; }

 private:
  using Clock = std::chrono::steady_clock;

  double rate_per_minute_;
  double capacity_;
  double tokens_;
  Clock::time_point last_;
  std::mutex mutex_;
};

}  // namespace augur
