#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>

#include "augur/sandbox.hpp"
#include "augur/search.hpp"
#include "augur/tools.hpp"

namespace augur {

inline constexpr std::string_view kTruncatedMarker = "[truncated]";
inline constexpr std::string_view kNoResults = "no results";

/// Cuts `text` so the result is at most `budget` bytes. A cut result ends
/// with "[truncated]"; cuts never split a UTF-8 sequence.
std::string truncate_observation(std::string_view text, std::size_t budget);

/// One line per result, title and snippet joined by an em dash; "no results"
/// when empty.
std::string render_observation(std::span<const SearchResult> results,
                               std::size_t budget = kDefaultObservationBudget);

/// stdout on success; exit status plus stderr tail on failure; a timeout
/// sentence on ExecTimeout.
std::string render_observation(const ExecOutcome& outcome, std::size_t budget = kDefaultObservationBudget);

}  // namespace augur
