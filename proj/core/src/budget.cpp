#include "augur/budget.hpp"

namespace augur {

std::size_t estimate_tokens(std::string_view text) { return (text.size() + 3) / 4; }

std::size_t estimate_tokens(std::span<const Message> messages) {
  std::size_t chars = 0;
  for (const auto& m : messages) chars += m.content.size();
  return (chars + 3) / 4;
}

BudgetCheck context_budget_guard(std::string_view context, std::size_t limit_tokens) {
  const std::size_t estimate = estimate_tokens(context);
  return {estimate > limit_tokens ? BudgetStatus::exceeded : BudgetStatus::ok, estimate, limit_tokens};
}

BudgetCheck context_budget_guard(std::span<const Message> context, std::size_t limit_tokens) {
  const std::size_t estimate = estimate_tokens(context);
  return {estimate > limit_tokens ? BudgetStatus::exceeded : BudgetStatus::ok, estimate, limit_tokens};
}

}  // namespace augur
