#include "pbci/train/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace pbci::train {
namespace {

std::vector<std::string> split_commas(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_cell(const std::string& s) {
  if (s.empty() || s == "-" || s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw std::runtime_error("bad table cell '" + s + "'");
  return v;
}

}  // namespace

double finite_mean(const std::vector<double>& values) {
  double sum = 0.0;
  std::size_t n = 0;
  for (double v : values) {
    if (std::isfinite(v)) {
      sum += v;
      ++n;
    }
  }
  return n == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / static_cast<double>(n);
}

double ResultTable::grand_mean() const {
  if (cells.empty() || cells.back().empty()) return std::numeric_limits<double>::quiet_NaN();
  return cells.back().back();
}

std::string ResultTable::to_text(int precision) const {
  std::ostringstream os;
  if (!title.empty()) os << "# " << title << "\n";
  for (const auto& c : config) os << "# " << c << "\n";

  std::size_t label_w = 7;
  for (const auto& r : row_labels) label_w = std::max(label_w, r.size());
  std::size_t col_w = static_cast<std::size_t>(precision) + 3;
  for (const auto& c : columns) col_w = std::max(col_w, c.size());

  os << std::left << std::setw(static_cast<int>(label_w)) << "Subject";
  for (const auto& c : columns) os << "  " << std::right << std::setw(static_cast<int>(col_w)) << c;
  os << "\n";
  for (std::size_t r = 0; r < cells.size(); ++r) {
    if (r + 1 == cells.size()) os << std::string(label_w + columns.size() * (col_w + 2), '-') << "\n";
    os << std::left << std::setw(static_cast<int>(label_w)) << row_labels.at(r);
    for (double v : cells[r]) {
      std::ostringstream cell;
      if (std::isfinite(v)) {
        cell << std::fixed << std::setprecision(precision) << v;
      } else {
        cell << "-";
      }
      os << "  " << std::right << std::setw(static_cast<int>(col_w)) << cell.str();
    }
    os << "\n";
  }
  return os.str();
}

std::string ResultTable::to_csv() const {
  std::ostringstream os;
  os << "# title=" << title << "\n";
  for (const auto& c : config) os << "# " << c << "\n";
  os << "subject";
  for (const auto& c : columns) os << "," << c;
  os << "\n";
  os << std::setprecision(17);
  for (std::size_t r = 0; r < cells.size(); ++r) {
    os << row_labels.at(r);
    for (double v : cells[r]) {
      os << ",";
      if (std::isfinite(v)) {
        os << v;
      } else {
        os << "-";
      }
    }
    os << "\n";
  }
  return os.str();
}

ResultTable ResultTable::from_csv(std::string_view csv) {
  ResultTable t;
  std::istringstream in{std::string(csv)};
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.starts_with("# ")) {
      const std::string body = line.substr(2);
      if (body.starts_with("title=")) {
        t.title = body.substr(6);
      } else {
        t.config.push_back(body);
      }
      continue;
    }
    auto fields = split_commas(line);
    if (!have_header) {
      if (fields.size() < 2) throw std::runtime_error("table header needs at least one column");
      t.columns.assign(fields.begin() + 1, fields.end());
      have_header = true;
      continue;
    }
    if (fields.size() != t.columns.size() + 1) throw std::runtime_error("table row has wrong column count");
    t.row_labels.push_back(fields.front());
    std::vector<double> row;
    for (std::size_t i = 1; i < fields.size(); ++i) row.push_back(parse_cell(fields[i]));
    t.cells.push_back(std::move(row));
  }
  if (!have_header) throw std::runtime_error("empty table");
  return t;
}

}  // namespace pbci::train
