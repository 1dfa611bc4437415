#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "augur/pipeline.hpp"

namespace augur {

/// Fixed-point text with `decimals` places, "-0.000" normalized to "0.000".
std::string format_fixed(double value, int decimals);

/// Markdown report: a header line with n and drop counts, the score table
/// (Method, Brier, Acc %, Std) and the calibration table (Method,
/// Calibration Index). Brier, Std and CI use three decimals, Acc % one.
/// Missing values render as "-".
std::string render_report(const ScoreReport& report);

/// One JSON object per method with full-precision values.
std::vector<json> score_rows(const ScoreReport& report);

struct ParsedTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Every pipe table in `markdown`, in order. Separator rows are skipped.
std::vector<ParsedTable> parse_markdown_tables(std::string_view markdown);

}  // namespace augur
