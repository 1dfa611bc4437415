#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

namespace augur {

/// UTC instant with seconds precision.
using Timestamp = std::chrono::sys_seconds;
/// UTC calendar day.
using Date = std::chrono::sys_days;

/// Accepts `YYYY-MM-DD`, `YYYY-MM-DDTHH:MM[:SS[.fff]]` with an optional `Z`
/// or `±HH:MM` suffix. Fractional seconds are truncated. Throws
/// std::invalid_argument on malformed input.
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp t);

Date parse_date(std::string_view text);
std::string format_date(Date d);
/// "April 30, 2024"
std::string format_long_date(Date d);

Timestamp from_epoch_millis(std::int64_t millis);
Date date_of(Timestamp t);
Date today_utc();

}  // namespace augur
