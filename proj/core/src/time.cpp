#include "augur/time.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace augur {
namespace {

using namespace std::chrono;

int read_digits(std::string_view text, std::size_t& pos, std::size_t count) {
  if (pos + count > text.size()) {
    throw std::invalid_argument("truncated timestamp: " + std::string(text));
  }
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + count, value);
  if (ec != std::errc{} || ptr != text.data() + pos + count) {
    throw std::invalid_argument("malformed timestamp: " + std::string(text));
  }
  pos += count;
  return value;
}

void expect(std::string_view text, std::size_t& pos, char c) {
  if (pos >= text.size() || text[pos] != c) {
    throw std::invalid_argument("malformed timestamp: " + std::string(text));
  }
  ++pos;
}

Date read_date(std::string_view text, std::size_t& pos) {
  const int y = read_digits(text, pos, 4);
  expect(text, pos, '-');
  const int m = read_digits(text, pos, 2);
  expect(text, pos, '-');
  const int d = read_digits(text, pos, 2);
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) {
    throw std::invalid_argument("invalid calendar date: " + std::string(text));
  }
  return sys_days{ymd};
}

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
  std::size_t pos = 0;
  const Date day_part = read_date(text, pos);
  Timestamp result = time_point_cast<seconds>(day_part);
  if (pos == text.size()) {
    return result;
  }
  if (text[pos] != 'T' && text[pos] != ' ') {
    throw std::invalid_argument("malformed timestamp: " + std::string(text));
  }
  ++pos;
  const int hh = read_digits(text, pos, 2);
  expect(text, pos, ':');
  const int mm = read_digits(text, pos, 2);
  int ss = 0;
  if (pos < text.size() && text[pos] == ':') {
    ++pos;
    ss = read_digits(text, pos, 2);
  }
  if (hh > 23 || mm > 59 || ss > 60) {
    throw std::invalid_argument("time of day out of range: " + std::string(text));
  }
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    const std::size_t start = pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
    if (pos == start) throw std::invalid_argument("malformed fraction: " + std::string(text));
  }
  result += hours{hh} + minutes{mm} + seconds{ss};
  if (pos == text.size()) {
    return result;
  }
  if (text[pos] == 'Z' && pos + 1 == text.size()) {
    return result;
  }
  if (text[pos] == '+' || text[pos] == '-') {
    const int sign = text[pos] == '+' ? 1 : -1;
    ++pos;
    const int oh = read_digits(text, pos, 2);
    expect(text, pos, ':');
    const int om = read_digits(text, pos, 2);
    if (pos != text.size()) throw std::invalid_argument("trailing text: " + std::string(text));
    return result - sign * (hours{oh} + minutes{om});
  }
  throw std::invalid_argument("malformed timestamp: " + std::string(text));
}

std::string format_timestamp(Timestamp t) {
  const Date d = floor<days>(t);
  const year_month_day ymd{d};
  const hh_mm_ss<seconds> tod{t - d};
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                static_cast<int>(tod.seconds().count()));
  return buf.data();
}

Date parse_date(std::string_view text) {
  std::size_t pos = 0;
  const Date d = read_date(text, pos);
  if (pos != text.size()) {
    throw std::invalid_argument("expected YYYY-MM-DD: " + std::string(text));
  }
  return d;
}

std::string format_date(Date d) {
  const year_month_day ymd{d};
  std::array<char, 16> buf{};
  std::snprintf(buf.data(), buf.size(), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf.data();
}

std::string format_long_date(Date d) {
  static constexpr std::array<const char*, 12> kMonths = {
      "January", "February", "March",     "April",   "May",      "June",
      "July",    "August",   "September", "October", "November", "December"};
  const year_month_day ymd{d};
  return std::string(kMonths[static_cast<unsigned>(ymd.month()) - 1]) + " " +
         std::to_string(static_cast<unsigned>(ymd.day())) + ", " +
         std::to_string(static_cast<int>(ymd.year()));
}

Timestamp from_epoch_millis(std::int64_t millis) {
  // Floor division so pre-1970 instants truncate toward the earlier second.
  std::int64_t secs = millis / 1000;
  if (millis % 1000 < 0) --secs;
  return Timestamp{seconds{secs}};
}

Date date_of(Timestamp t) { return floor<days>(t); }

Date today_utc() { return floor<days>(system_clock::now()); }

}  // namespace augur
