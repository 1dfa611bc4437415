#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "augur/time.hpp"

namespace augur {

class SearchProvider;
class Sandbox;

enum class ToolKind {
  raw,    // wraps an external API or interpreter
  agent,  // a low-level agent exposed as a tool
};

/// One entry of an agent's action space.
struct ToolSpec {
  std::string name;
  std::string description;
  std::function<std::string(const std::string& input)> invoke;
  ToolKind kind = ToolKind::raw;
  /// Set on tools that issue date-restricted searches.
  std::optional<Date> date_restriction;
};

/// Ordered set of tools with unique, single-line names.
class ToolRegistry {
 public:
  ToolRegistry() = default;
  ToolRegistry(std::initializer_list<ToolSpec> tools);

  /// Throws ConfigError on duplicate, empty or multi-line names, or a
  /// missing invoke function.
  void add(ToolSpec tool);

  const ToolSpec* find(std::string_view name) const;
  std::vector<std::string> names() const;
  const std::vector<ToolSpec>& tools() const noexcept { return tools_; }
  bool empty() const noexcept { return tools_.empty(); }
  std::size_t size() const noexcept { return tools_.size(); }

 private:
  std::vector<ToolSpec> tools_;
};

inline constexpr std::size_t kDefaultObservationBudget = 4000;

struct SearchToolOptions {
  std::string name = "web_search";
  std::optional<Date> before_date;
  int max_results = 8;
  std::size_t observation_budget = kDefaultObservationBudget;
};

/// Search tool over `provider`. The input may be quoted; quotes are
/// stripped before querying. Provider failures become observations.
ToolSpec make_search_tool(SearchProvider& provider, SearchToolOptions options);

struct CodeToolOptions {
  std::string name = "python";
  std::size_t observation_budget = kDefaultObservationBudget;
};

/// Code-execution tool. Markdown code fences around the program are removed.
ToolSpec make_code_tool(const Sandbox& sandbox, CodeToolOptions options);

}  // namespace augur
