#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace pbci::train {

/// Accuracy table: one row per subject plus a trailing mean row, one column
/// per paradigm plus an overall column. Missing cells hold NaN and print
/// as "-".
struct ResultTable {
  std::string title;
  std::vector<std::string> config;  ///< key=value lines echoed in the header
  std::vector<std::string> columns;
  std::vector<std::string> row_labels;
  std::vector<std::vector<double>> cells;

  /// Value of the last row's last column (the grand mean).
  [[nodiscard]] double grand_mean() const;

  /// Aligned text with `#`-prefixed title and config header.
  [[nodiscard]] std::string to_text(int precision = 3) const;
  /// CSV with the same header lines; values use full precision.
  [[nodiscard]] std::string to_csv() const;
  /// Inverse of to_csv. Throws std::runtime_error on malformed input.
  static ResultTable from_csv(std::string_view csv);
};

/// Mean over the finite entries of `values`, NaN if there are none.
double finite_mean(const std::vector<double>& values);

}  // namespace pbci::train
