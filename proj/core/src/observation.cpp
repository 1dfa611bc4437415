#include "augur/observation.hpp"

#include <algorithm>
#include <sstream>

namespace augur {
namespace {

std::string one_line(std::string_view text) {
  std::string out(text);
  std::replace(out.begin(), out.end(), '\n', ' ');
  std::replace(out.begin(), out.end(), '\r', ' ');
  return out;
}

std::size_t utf8_floor(std::string_view text, std::size_t cut) {
  while (cut > 0 && cut < text.size() && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) --cut;
  return cut;
}

std::string format_seconds(std::chrono::milliseconds d) {
  std::ostringstream out;
  if (d.count() % 1000 == 0) {
    out << d.count() / 1000 << 's';
  } else {
    out << static_cast<double>(d.count()) / 1000.0 << 's';
  }
  return out.str();
}

}  // namespace

std::string truncate_observation(std::string_view text, std::size_t budget) {
  if (text.size() <= budget) return std::string(text);
  if (budget < kTruncatedMarker.size()) return std::string(kTruncatedMarker.substr(0, budget));
  const std::size_t cut = utf8_floor(text, budget - kTruncatedMarker.size());
  std::string out(text.substr(0, cut));
  out += kTruncatedMarker;
  return out;
}

std::string render_observation(std::span<const SearchResult> results, std::size_t budget) {
  if (results.empty()) return truncate_observation(kNoResults, budget);
  std::string out;
  for (const auto& r : results) {
    if (!out.empty()) out += '\n';
    if (r.title.empty()) {
      out += one_line(r.snippet);
    } else {
      out += one_line(r.title) + " \xE2\x80\x94 " + one_line(r.snippet);
    }
  }
  return truncate_observation(out, budget);
}

std::string render_observation(const ExecOutcome& outcome, std::size_t budget) {
  if (const auto* timeout = std::get_if<ExecTimeout>(&outcome)) {
    return truncate_observation("execution timed out after " + format_seconds(timeout->timeout), budget);
  }
  const auto& result = std::get<ExecResult>(outcome);
  if (result.ok()) {
    std::string text = result.stdout_text.empty() ? "(no output)" : result.stdout_text;
    if (!result.stderr_text.empty()) text += "\nstderr:\n" + result.stderr_text;
    return truncate_observation(text, budget);
  }
  // Failures keep the tail of stderr, where interpreters put the error line.
  std::string header = "exit status " + std::to_string(result.exit_status) + "\n";
  if (!result.stdout_text.empty()) {
    header += "stdout:\n" + truncate_observation(result.stdout_text, budget / 4) + "\n";
  }
  header += "stderr:\n";
  if (header.size() >= budget) return truncate_observation(header, budget);
  const std::size_t room = budget - header.size();
  std::string_view err = result.stderr_text;
  if (err.size() > room) {
    std::size_t start = err.size() - room + 3;
    while (start < err.size() && (static_cast<unsigned char>(err[start]) & 0xC0) == 0x80) ++start;
    return header + "..." + std::string(err.substr(start));
  }
  return header + std::string(err);
}

}  // namespace augur
