#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "pbci/eeg/types.hpp"

namespace pbci::dispatch {

using Parameters = std::map<std::string, std::string>;

/// Per-subject string preferences.
///
/// Text form, one preference per line:
///   <subject>\t<key>\t<value>
/// where subject is a 1-based index, optionally written "S3". Blank lines
/// and lines starting with '#' are ignored. Keys must be unique per subject.
class PreferenceStore {
 public:
  /// Inserts or replaces one preference. Keys may not be empty or contain
  /// tabs or newlines; values may not contain tabs or newlines.
  void set(eeg::SubjectId subject, std::string key, std::string value);

  /// Preferences of a subject, or an empty map for an unknown subject.
  [[nodiscard]] const Parameters& of(eeg::SubjectId subject) const;
  [[nodiscard]] bool contains(eeg::SubjectId subject) const { return prefs_.contains(subject); }
  [[nodiscard]] std::size_t subject_count() const noexcept { return prefs_.size(); }

  [[nodiscard]] std::string format() const;
  /// Throws std::runtime_error naming the line on malformed input or a
  /// repeated key.
  static PreferenceStore parse(std::string_view text);
  static PreferenceStore load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  friend bool operator==(const PreferenceStore&, const PreferenceStore&) = default;

 private:
  std::map<eeg::SubjectId, Parameters> prefs_;
};

struct ActionTemplate {
  std::string action_name;
  Parameters defaults;

  friend bool operator==(const ActionTemplate&, const ActionTemplate&) = default;
};

/// Action template per imagery label.
///
/// Text form, one label per line:
///   <label>\t<action_name>[\t<key>=<value>]...
/// Blank lines and '#' comments are ignored.
class ApiRegistry {
 public:
  void set(eeg::ImageryLabel label, ActionTemplate action);
  /// Throws std::out_of_range for a label without a template.
  [[nodiscard]] const ActionTemplate& at(eeg::ImageryLabel label) const;
  [[nodiscard]] bool is_total() const noexcept;
  /// Throws std::invalid_argument naming the first label without a template.
  void require_total() const;

  [[nodiscard]] std::string format() const;
  /// Parses and checks totality.
  static ApiRegistry parse(std::string_view text);
  static ApiRegistry load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  friend bool operator==(const ApiRegistry&, const ApiRegistry&) = default;

 private:
  std::map<eeg::ImageryLabel, ActionTemplate> actions_;
};

/// Parses "3" or "S3".
std::optional<eeg::SubjectId> parse_subject(std::string_view s);

}  // namespace pbci::dispatch
