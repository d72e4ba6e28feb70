#include "pbci/eeg/manifest.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "pbci/eeg/epoch_io.hpp"

namespace pbci::eeg {
namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find('\t', start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

int parse_int(const std::string& s, std::size_t line_no, const char* what) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::runtime_error("manifest line " + std::to_string(line_no) + ": invalid " + what +
                             " '" + s + "'");
  }
  return value;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace

std::filesystem::path DatasetManifest::resolve(const ManifestRecord& r) const {
  if (r.path.is_absolute() || base_dir.empty()) return r.path;
  return base_dir / r.path;
}

DatasetManifest parse_manifest(const std::string& text, std::filesystem::path base_dir) {
  DatasetManifest m;
  m.base_dir = std::move(base_dir);
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = line.substr(1);
      if (!body.empty() && body[0] == ' ') body.erase(0, 1);
      const auto tab = body.find('\t');
      const std::string key = body.substr(0, tab);
      const std::string value = tab == std::string::npos ? "" : body.substr(tab + 1);
      if (key == "sample_rate") {
        m.sample_rate = std::stod(value);
      } else if (key == "montage") {
        std::vector<std::string> names;
        std::stringstream ss(value);
        std::string name;
        while (std::getline(ss, name, ',')) names.push_back(name);
        m.montage = Montage(std::move(names));
      } else if (key == "provenance") {
        m.provenance.push_back(value);
      }
      continue;
    }
    const auto fields = split_tabs(line);
    if (fields.size() != 5) {
      throw std::runtime_error("manifest line " + std::to_string(line_no) + ": expected 5 fields, got " +
                               std::to_string(fields.size()));
    }
    ManifestRecord r;
    r.path = fields[0];
    r.subject = SubjectId(parse_int(fields[1], line_no, "subject"));
    const auto paradigm = parse_paradigm(fields[2]);
    if (!paradigm) {
      throw std::runtime_error("manifest line " + std::to_string(line_no) + ": unknown paradigm '" +
                               fields[2] + "'");
    }
    const auto label = parse_label(fields[3]);
    if (!label) {
      throw std::runtime_error("manifest line " + std::to_string(line_no) + ": unknown label '" +
                               fields[3] + "'");
    }
    r.paradigm = *paradigm;
    r.label = *label;
    r.trial_id = parse_int(fields[4], line_no, "trial_id");
    m.records.push_back(std::move(r));
  }
  return m;
}

std::string format_manifest(const DatasetManifest& m) {
  std::ostringstream out;
  out << "# eegd-manifest\t1\n";
  out << "# sample_rate\t" << m.sample_rate << "\n";
  out << "# montage\t";
  for (std::size_t i = 0; i < m.montage.size(); ++i) {
    if (i) out << ',';
    out << m.montage.names()[i];
  }
  out << "\n";
  for (const auto& p : m.provenance) out << "# provenance\t" << p << "\n";
  out << "# path\tsubject\tparadigm\tlabel\ttrial_id\n";
  for (const auto& r : m.records) {
    out << r.path.generic_string() << '\t' << r.subject.index() << '\t' << to_string(r.paradigm)
        << '\t' << to_string(r.label) << '\t' << r.trial_id << '\n';
  }
  return out.str();
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_manifest(buf.str(), path.parent_path());
}

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << format_manifest(manifest);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string ValidationReport::summary() const {
  std::ostringstream out;
  out << "records: " << total << " (expected " << expected_total << ")\n";
  out << "cells: " << cell_counts.size() << ", deviating from " << expected_per_cell << ": "
      << deviating_cells.size() << "\n";
  for (const auto& c : deviating_cells) {
    const auto it = cell_counts.find(c);
    out << "  S" << c.subject << ' ' << to_string(c.paradigm) << ' ' << to_string(c.label) << ": "
        << (it == cell_counts.end() ? 0 : it->second) << "\n";
  }
  for (const auto& p : missing_files) out << "missing: " << p << "\n";
  for (const auto& p : invalid_files) out << "invalid: " << p << "\n";
  for (const auto& d : duplicates) out << "duplicate: " << d << "\n";
  out << (ok() ? "OK" : "FAILED") << "\n";
  return out.str();
}

ValidationReport validate_dataset(const DatasetManifest& manifest, const ValidationOptions& options) {
  ValidationReport report;
  report.expected_per_cell = options.expected_per_cell;
  report.expected_total = static_cast<std::size_t>(options.n_subjects) * kAllParadigms.size() *
                          kAllLabels.size() * options.expected_per_cell;

  std::set<std::tuple<int, Paradigm, int>> trial_keys;
  for (const auto& r : manifest.records) {
    ++report.total;
    ++report.cell_counts[CellKey{r.subject.index(), r.paradigm, r.label}];

    if (!trial_keys.emplace(r.subject.index(), r.paradigm, r.trial_id).second) {
      report.duplicates.push_back("S" + std::to_string(r.subject.index()) + " " +
                                  std::string(to_string(r.paradigm)) + " trial " +
                                  std::to_string(r.trial_id) + " (" + r.path.generic_string() + ")");
    }

    const auto path = manifest.resolve(r);
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) {
      report.missing_files.push_back(path.generic_string());
      continue;
    }
    if (!options.parse_files) continue;
    try {
      const Epoch e = read_epoch(path, manifest.sample_rate, r.trial_id);
      if (e.subject != r.subject || e.paradigm != r.paradigm || e.label != r.label) {
        report.invalid_files.push_back(path.generic_string() + ": header disagrees with manifest record");
      }
    } catch (const std::exception& ex) {
      report.invalid_files.push_back(ex.what());
    }
  }

  for (int s = 1; s <= options.n_subjects; ++s) {
    for (Paradigm p : kAllParadigms) {
      for (ImageryLabel l : kAllLabels) {
        const CellKey key{s, p, l};
        const auto it = report.cell_counts.find(key);
        const std::size_t n = it == report.cell_counts.end() ? 0 : it->second;
        if (n != options.expected_per_cell) report.deviating_cells.push_back(key);
      }
    }
  }
  // Cells outside the expected subject range are deviations as well.
  for (const auto& [key, n] : report.cell_counts) {
    if (key.subject > options.n_subjects) report.deviating_cells.push_back(key);
  }
  return report;
}

std::vector<Epoch> load_epochs(const DatasetManifest& manifest) {
  std::vector<Epoch> epochs;
  epochs.reserve(manifest.records.size());
  for (const auto& r : manifest.records) {
    Epoch e = read_epoch(manifest.resolve(r), manifest.sample_rate, r.trial_id);
    if (e.subject != r.subject || e.paradigm != r.paradigm || e.label != r.label) {
      throw std::runtime_error(manifest.resolve(r).string() + ": header disagrees with manifest record");
    }
    epochs.push_back(std::move(e));
  }
  return epochs;
}

}  // namespace pbci::eeg
