#include "augur/tools.hpp"

#include "augur/errors.hpp"
#include "augur/observation.hpp"
#include "augur/sandbox.hpp"
#include "augur/search.hpp"

namespace augur {
namespace {

std::string strip(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string unquote(std::string_view s) {
  std::string t = strip(s);
  while (t.size() >= 2 && ((t.front() == '"' && t.back() == '"') || (t.front() == '\'' && t.back() == '\''))) {
    t = strip(std::string_view(t).substr(1, t.size() - 2));
  }
  return t;
}

std::string unfence(std::string_view s) {
  std::string t = strip(s);
  if (t.rfind("```", 0) != 0) return t;
  const auto first_newline = t.find('\n');
  if (first_newline == std::string::npos) return {};
  std::string body = t.substr(first_newline + 1);
  const auto close = body.rfind("```");
  if (close != std::string::npos) body.erase(close);
  return body;
}

}  // namespace

ToolRegistry::ToolRegistry(std::initializer_list<ToolSpec> tools) {
  for (const auto& t : tools) add(t);
}

void ToolRegistry::add(ToolSpec tool) {
  if (tool.name.empty() || tool.name != strip(tool.name)) {
    throw ConfigError("tool name must be non-empty without surrounding whitespace: '" + tool.name + "'");
  }
  if (tool.name.find_first_of("\r\n") != std::string::npos) {
    throw ConfigError("tool name must be a single line: '" + tool.name + "'");
  }
  if (!tool.invoke) throw ConfigError("tool '" + tool.name + "' has no invoke function");
  if (find(tool.name) != nullptr) throw ConfigError("duplicate tool name '" + tool.name + "'");
  tools_.push_back(std::move(tool));
}

const ToolSpec* ToolRegistry::find(std::string_view name) const {
  for (const auto& t : tools_) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

std::vector<std::string> ToolRegistry::names() const {
  std::vector<std::string> out;
  out.reserve(tools_.size());
  for (const auto& t : tools_) out.push_back(t.name);
  return out;
}

ToolSpec make_search_tool(SearchProvider& provider, SearchToolOptions options) {
  ToolSpec spec;
  spec.name = options.name;
  spec.description =
      "Web search returning result titles and text snippets. Input: a plain search query string, e.g. "
      "\"historical price data of Ethereum\". Results are limited to pages published before the "
      "forecasting cutoff date.";
  spec.date_restriction = options.before_date;
  spec.invoke = [&provider, options](const std::string& input) {
    const std::string query = unquote(input);
    if (query.empty()) return std::string("search failed: empty query");
    try {
      const auto results = search(provider, query, options.before_date, options.max_results);
      return render_observation(results, options.observation_budget);
    } catch (const ProviderError& e) {
      return truncate_observation(std::string("search failed: ") + e.what(), options.observation_budget);
    }
  };
  return spec;
}

ToolSpec make_code_tool(const Sandbox& sandbox, CodeToolOptions options) {
  ToolSpec spec;
  spec.name = options.name;
  spec.description =
      "Python interpreter for calculations and simulations. Input: a complete Python program; only "
      "what it prints to stdout is returned. No network access.";
  spec.invoke = [&sandbox, options](const std::string& input) {
    const std::string program = unfence(input);
    if (program.empty()) return std::string("execution failed: empty program");
    try {
      return render_observation(sandbox.run(program), options.observation_budget);
    } catch (const ConfigError& e) {
      return truncate_observation(std::string("execution failed: ") + e.what(), options.observation_budget);
    }
  };
  return spec;
}

}  // namespace augur
