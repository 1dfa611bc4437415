#pragma once

#include <cstddef>
#include <span>
#include <string_view>

#include "augur/llm.hpp"

namespace augur {

/// Character/4 heuristic, rounded up. Provider tokenizers differ, so this
/// is the one estimate used everywhere.
std::size_t estimate_tokens(std::string_view text);
std::size_t estimate_tokens(std::span<const Message> messages);

enum class BudgetStatus { ok, exceeded };

struct BudgetCheck {
  BudgetStatus status = BudgetStatus::ok;
  std::size_t estimated_tokens = 0;
  std::size_t limit_tokens = 0;
};

BudgetCheck context_budget_guard(std::string_view context, std::size_t limit_tokens);
BudgetCheck context_budget_guard(std::span<const Message> context, std::size_t limit_tokens);

/// With `compact`, an over-limit context has its oldest steps folded into
/// "[earlier steps omitted]"; without it, the run ends Declined(budget).
struct BudgetPolicy {
  std::size_t limit_tokens = 32000;
  bool compact = true;
};

inline constexpr std::string_view kOmittedMarker = "[earlier steps omitted]";
/// Most recent steps that compaction always keeps verbatim.
inline constexpr std::size_t kPreservedSteps = 2;

}  // namespace augur
