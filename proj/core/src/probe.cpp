#include "augur/probe.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "augur/domain.hpp"
#include "augur/errors.hpp"

namespace augur {
namespace {

std::string fold(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

constexpr std::array<std::string_view, 10> kCutoffPhrases = {
    "knowledge cutoff",       "cutoff date",           "cut-off",
    "training data",          "as of my last update",  "last knowledge update",
    "i don't have information", "i do not have information", "beyond my knowledge",
    "my knowledge ends",
};

}  // namespace

std::string_view to_string(ProbeResult r) {
  switch (r) {
    case ProbeResult::leaked: return "Leaked";
    case ProbeResult::cutoff_respected: return "CutoffRespected";
    case ProbeResult::inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

std::string probe_prompt(std::string_view question) {
  return "Answer this question without searching the web: " + std::string(question);
}

ProbeOutcome classify_probe_reply(std::string_view reply, std::string_view cutoff_hint,
                                  const std::vector<std::string>& answer_patterns) {
  ProbeOutcome out;
  out.reply = std::string(reply);
  const std::string text = fold(reply);
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    out.rule = "empty reply";
    return out;
  }
  for (const auto& pattern : answer_patterns) {
    if (!pattern.empty() && text.find(fold(pattern)) != std::string::npos) {
      out.result = ProbeResult::leaked;
      out.rule = "answer pattern '" + pattern + "'";
      return out;
    }
  }
  for (auto phrase : kCutoffPhrases) {
    if (text.find(phrase) != std::string::npos) {
      out.result = ProbeResult::cutoff_respected;
      out.rule = "cutoff phrase '" + std::string(phrase) + "'";
      return out;
    }
  }
  if (!cutoff_hint.empty() && text.find(fold(cutoff_hint)) != std::string::npos) {
    out.result = ProbeResult::cutoff_respected;
    out.rule = "cutoff hint '" + std::string(cutoff_hint) + "'";
    return out;
  }
  out.rule = "no rule matched";
  return out;
}

ProbeOutcome leakage_probe(Backend& backend, const std::string& model_id, const ProbeQuestion& probe,
                           std::string_view cutoff_hint) {
  ChatRequest request;
  request.model_id = model_id;
  request.messages = {{Role::user, probe_prompt(probe.question)}};
  const ChatResponse response = complete(backend, request);
  return classify_probe_reply(response.content, cutoff_hint, probe.answer_patterns);
}

std::vector<ProbeQuestion> load_probes(const std::filesystem::path& path) {
  std::vector<ProbeQuestion> probes;
  std::size_t line = 0;
  for (const auto& row : read_json_lines(path)) {
    ++line;
    if (!row.contains("question") || !row["question"].is_string()) {
      throw FormatError(path.string(), line, "probe entry needs a 'question' string");
    }
    probes.push_back({row["question"].get<std::string>(),
                      row.value("answer_patterns", std::vector<std::string>{})});
  }
  return probes;
}

}  // namespace augur
