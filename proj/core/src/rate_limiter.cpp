#include "augur/rate_limiter.hpp"

#include <algorithm>
#include <thread>

namespace augur {

RateLimiter::RateLimiter(double requests_per_minute, double burst)
    : rate_per_minute_(requests_per_minute),
      capacity_(std::max(1.0, burst)),
      tokens_(std::max(1.0, burst)),
      last_(Clock::now()) {}

void RateLimiter::acquire() {
  if (rate_per_minute_ <= 0.0) return;
  const double per_second = rate_per_minute_ / 60.0;
  for (;;) {
    std::chrono::duration<double> wait{0};
    {
      std::lock_guard lock(mutex_);
      const auto now = Clock::now();
      tokens_ = std::min(capacity_, tokens_ + std::chrono::duration<double>(now - last_).count() * per_second);
      last_ = now;
      if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return;
      }
      wait = std::chrono::duration<double>((1.0 - tokens_) / per_second);
    }
    std::this_thread::sleep_for(wait);
  }
}

}  // namespace augur
