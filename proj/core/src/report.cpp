#include "augur/report.hpp"

#include <cstdio>
#include <sstream>

namespace augur {
namespace {

std::string cell_trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_row(std::string_view line) {
  std::vector<std::string> cells;
  std::string_view body = line;
  if (!body.empty() && body.front() == '|') body.remove_prefix(1);
  if (!body.empty() && body.back() == '|') body.remove_suffix(1);
  std::size_t pos = 0;
  while (true) {
    const auto bar = body.find('|', pos);
    cells.push_back(cell_trim(body.substr(pos, bar == std::string_view::npos ? std::string_view::npos : bar - pos)));
    if (bar == std::string_view::npos) break;
    pos = bar + 1;
  }
  return cells;
}

bool is_separator(const std::vector<std::string>& cells) {
  for (const auto& c : cells) {
    if (c.empty() || c.find_first_not_of("-:") != std::string::npos) return false;
  }
  return !cells.empty();
}

}  // namespace

std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  std::string out(buf);
  if (out.front() == '-' && out.find_first_not_of("-0.") == std::string::npos) out.erase(0, 1);
  return out;
}

std::string render_report(const ScoreReport& report) {
  std::ostringstream out;
  const std::size_t n = report.methods.empty() ? 0 : report.methods.front().n;
  out << "# Forecast scores\n\n";
  out << "Scored questions: " << n << ". Dropped by the decline rule: " << report.dropped.size()
      << ". Unresolved or excluded: " << report.unresolved << ".\n\n";
  out << "| Method | Brier | Acc % | Std |\n";
  out << "|---|---:|---:|---:|\n";
  for (const auto& m : report.methods) {
    out << "| " << m.label << " | " << format_fixed(m.brier, 3) << " | " << format_fixed(100.0 * m.accuracy, 1)
        << " | " << (m.stdev ? format_fixed(*m.stdev, 3) : "-") << " |\n";
  }
  out << "\nCalibration with K = " << report.bins << " quantile bins.\n\n";
  out << "| Method | Calibration Index |\n";
  out << "|---|---:|\n";
  for (const auto& m : report.methods) {
    out << "| " << m.label << " | " << (m.calibration ? format_fixed(m.calibration->index, 3) : "-") << " |\n";
  }
  return out.str();
}

std::vector<json> score_rows(const ScoreReport& report) {
  std::vector<json> rows;
  for (const auto& m : report.methods) {
    json row = {{"method", m.label}, {"n", m.n}, {"brier", m.brier}, {"accuracy", m.accuracy}, {"bins", report.bins}};
    row["std"] = m.stdev ? json(*m.stdev) : json(nullptr);
    row["calibration_index"] = m.calibration ? json(m.calibration->index) : json(nullptr);
    row["dropped"] = report.dropped;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ParsedTable> parse_markdown_tables(std::string_view markdown) {
  std::vector<ParsedTable> tables;
  std::optional<ParsedTable> current;
  std::size_t pos = 0;
  while (pos <= markdown.size()) {
    const auto eol = markdown.find('\n', pos);
    const std::string_view line =
        markdown.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    const std::string trimmed = cell_trim(line);
    if (!trimmed.empty() && trimmed.front() == '|') {
      auto cells = split_row(trimmed);
      if (!current) {
        current = ParsedTable{std::move(cells), {}};
      } else if (!is_separator(cells)) {
        current->rows.push_back(std::move(cells));
      }
    } else if (current) {
      tables.push_back(std::move(*current));
      current.reset();
    }
    if (eol == std::string_view::npos) break;
    pos = eol + 1;
  }
  if (current) tables.push_back(std::move(*current));
  return tables;
}

}  // namespace augur
