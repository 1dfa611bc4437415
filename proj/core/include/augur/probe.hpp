#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "augur/llm.hpp"

namespace augur {

enum class ProbeResult { leaked, cutoff_respected, inconclusive };

std::string_view to_string(ProbeResult r);

struct ProbeQuestion {
  std::string question;
  /// Substrings (case-insensitive) that only a leaked answer would contain.
  std::vector<std::string> answer_patterns;
};

struct ProbeOutcome {
  ProbeResult result = ProbeResult::inconclusive;
  std::string reply;
  std::string rule;  // which keyword rule fired
};

/// "Answer this question without searching the web: <question>"
std::string probe_prompt(std::string_view question);

/// Keyword classification. An answer pattern wins over a cutoff statement;
/// an empty reply is inconclusive.
ProbeOutcome classify_probe_reply(std::string_view reply, std::string_view cutoff_hint,
                                  const std::vector<std::string>& answer_patterns);

ProbeOutcome leakage_probe(Backend& backend, const std::string& model_id, const ProbeQuestion& probe,
                           std::string_view cutoff_hint);

/// Line-delimited `{"question": ..., "answer_patterns": [...]}`.
std::vector<ProbeQuestion> load_probes(const std::filesystem::path& path);

}  // namespace augur
