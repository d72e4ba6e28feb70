#pragma once

// Dataset manifest: a line-delimited text index with one record per epoch.
//
//   # eegd-manifest 1
//   # sample_rate<TAB>250
//   # montage<TAB>Fp1,Fp2,...
//   # provenance<TAB>free text (may repeat)
//   path<TAB>subject<TAB>paradigm<TAB>label<TAB>trial_id
//
// Record paths are relative to the manifest's directory unless absolute.

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "pbci/eeg/types.hpp"

namespace pbci::eeg {

struct ManifestRecord {
  std::filesystem::path path;
  SubjectId subject;
  Paradigm paradigm = Paradigm::MI;
  ImageryLabel label = ImageryLabel::apple;
  int trial_id = 0;

  friend bool operator==(const ManifestRecord&, const ManifestRecord&) = default;
};

struct DatasetManifest {
  Montage montage = Montage::standard32();
  double sample_rate = kCanonicalSampleRate;
  std::vector<ManifestRecord> records;
  std::vector<std::string> provenance;
  /// Directory that relative record paths resolve against.
  std::filesystem::path base_dir;

  [[nodiscard]] std::filesystem::path resolve(const ManifestRecord& r) const;

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

/// Parses manifest text. Throws std::runtime_error with the line number on a
/// malformed record.
DatasetManifest parse_manifest(const std::string& text, std::filesystem::path base_dir = {});
std::string format_manifest(const DatasetManifest& manifest);

DatasetManifest read_manifest(const std::filesystem::path& path);
/// Writes the manifest; base_dir is not stored, paths are written verbatim.
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

struct CellKey {
  int subject = 0;
  Paradigm paradigm = Paradigm::MI;
  ImageryLabel label = ImageryLabel::apple;

  friend auto operator<=>(const CellKey&, const CellKey&) = default;
};

struct ValidationReport {
  std::map<CellKey, std::size_t> cell_counts;
  std::size_t total = 0;
  std::size_t expected_per_cell = kCanonicalTrialsPerLabel;
  std::size_t expected_total = 0;
  std::vector<CellKey> deviating_cells;
  std::vector<std::string> missing_files;
  /// "path: reason" for files that exist but fail to parse or disagree
  /// with their manifest record.
  std::vector<std::string> invalid_files;
  std::vector<std::string> duplicates;

  [[nodiscard]] bool ok() const noexcept {
    return deviating_cells.empty() && missing_files.empty() && invalid_files.empty() &&
           duplicates.empty() && total == expected_total;
  }
  [[nodiscard]] std::string summary() const;
};

struct ValidationOptions {
  std::size_t expected_per_cell = kCanonicalTrialsPerLabel;
  int n_subjects = kCanonicalSubjects;
  /// When false only existence is checked, not file contents.
  bool parse_files = true;
};

/// Report-only check of a manifest against the acquisition protocol: every
/// (subject, paradigm, label) cell should hold expected_per_cell trials,
/// giving n_subjects * 3 * 4 * expected_per_cell in total.
ValidationReport validate_dataset(const DatasetManifest& manifest, const ValidationOptions& options = {});

/// Reads every referenced epoch, attaching manifest metadata. Throws if a
/// file's header disagrees with its record.
std::vector<Epoch> load_epochs(const DatasetManifest& manifest);

}  // namespace pbci::eeg
