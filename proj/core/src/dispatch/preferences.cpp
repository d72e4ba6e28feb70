#include "pbci/dispatch/preferences.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace pbci::dispatch {
namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find('\t', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <class Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty() && line.front() != '#') fn(line, line_no);
    if (end == text.size()) break;
    start = end + 1;
  }
}

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
  throw std::runtime_error("line " + std::to_string(line_no) + ": " + what);
}

void check_field(std::string_view s, bool allow_empty, const char* what) {
  if (!allow_empty && s.empty()) throw std::invalid_argument(std::string("empty ") + what);
  if (s.find_first_of("\t\n\r") != std::string_view::npos) {
    throw std::invalid_argument(std::string(what) + " contains a tab or newline");
  }
}

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_all(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

std::optional<eeg::SubjectId> parse_subject(std::string_view s) {
  if (!s.empty() && (s.front() == 'S' || s.front() == 's')) s.remove_prefix(1);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || v < 1 || v > 255) return std::nullopt;
  return eeg::SubjectId(v);
}

void PreferenceStore::set(eeg::SubjectId subject, std::string key, std::string value) {
  check_field(key, false, "preference key");
  check_field(value, true, "preference value");
  if (key.find('=') != std::string::npos) throw std::invalid_argument("preference key contains '='");
  prefs_[subject][std::move(key)] = std::move(value);
}

const Parameters& PreferenceStore::of(eeg::SubjectId subject) const {
  static const Parameters kEmpty;
  auto it = prefs_.find(subject);
  return it == prefs_.end() ? kEmpty : it->second;
}

std::string PreferenceStore::format() const {
  std::string out = "# subject\tkey\tvalue\n";
  for (const auto& [subject, params] : prefs_) {
    for (const auto& [key, value] : params) {
      out += "S" + std::to_string(subject.index()) + "\t" + key + "\t" + value + "\n";
    }
  }
  return out;
}

PreferenceStore PreferenceStore::parse(std::string_view text) {
  PreferenceStore store;
  for_each_line(text, [&](std::string_view line, std::size_t n) {
    const auto f = split_tabs(line);
    if (f.size() != 3) fail(n, "expected subject, key and value separated by tabs");
    const auto subject = parse_subject(f[0]);
    if (!subject) fail(n, "bad subject '" + std::string(f[0]) + "'");
    if (store.of(*subject).contains(std::string(f[1]))) fail(n, "duplicate key '" + std::string(f[1]) + "'");
    try {
      store.set(*subject, std::string(f[1]), std::string(f[2]));
    } catch (const std::invalid_argument& e) {
      fail(n, e.what());
    }
  });
  return store;
}

PreferenceStore PreferenceStore::load(const std::filesystem::path& path) { return parse(read_all(path)); }

void PreferenceStore::save(const std::filesystem::path& path) const { write_all(path, format()); }

void ApiRegistry::set(eeg::ImageryLabel label, ActionTemplate action) {
  check_field(action.action_name, false, "action name");
  if (action.action_name.find_first_of(" =") != std::string::npos) {
    throw std::invalid_argument("action name contains a space or '='");
  }
  for (const auto& [k, v] : action.defaults) {
    check_field(k, false, "parameter name");
    check_field(v, true, "parameter default");
    if (k.find('=') != std::string::npos) throw std::invalid_argument("parameter name contains '='");
  }
  actions_[label] = std::move(action);
}

const ActionTemplate& ApiRegistry::at(eeg::ImageryLabel label) const {
  auto it = actions_.find(label);
  if (it == actions_.end()) throw std::out_of_range("no action registered for " + std::string(eeg::to_string(label)));
  return it->second;
}

bool ApiRegistry::is_total() const noexcept {
  for (auto l : eeg::kAllLabels)
    if (!actions_.contains(l)) return false;
  return true;
}

void ApiRegistry::require_total() const {
  for (auto l : eeg::kAllLabels) {
    if (!actions_.contains(l)) {
      throw std::invalid_argument("registry has no action for label " + std::string(eeg::to_string(l)));
    }
  }
}

std::string ApiRegistry::format() const {
  std::string out = "# label\taction\tkey=default...\n";
  for (const auto& [label, action] : actions_) {
    out += std::string(eeg::to_string(label)) + "\t" + action.action_name;
    for (const auto& [k, v] : action.defaults) out += "\t" + k + "=" + v;
    out += "\n";
  }
  return out;
}

ApiRegistry ApiRegistry::parse(std::string_view text) {
  ApiRegistry reg;
  for_each_line(text, [&](std::string_view line, std::size_t n) {
    const auto f = split_tabs(line);
    if (f.size() < 2) fail(n, "expected label and action name");
    const auto label = eeg::parse_label(f[0]);
    if (!label) fail(n, "unknown label '" + std::string(f[0]) + "'");
    if (reg.actions_.contains(*label)) fail(n, "duplicate label '" + std::string(f[0]) + "'");
    ActionTemplate action;
    action.action_name = std::string(f[1]);
    for (std::size_t i = 2; i < f.size(); ++i) {
      const auto eq = f[i].find('=');
      if (eq == std::string_view::npos || eq == 0) fail(n, "parameter '" + std::string(f[i]) + "' is not key=value");
      const std::string key(f[i].substr(0, eq));
      if (action.defaults.contains(key)) fail(n, "duplicate parameter '" + key + "'");
      action.defaults.emplace(key, std::string(f[i].substr(eq + 1)));
    }
    try {
      reg.set(*label, std::move(action));
    } catch (const std::invalid_argument& e) {
      fail(n, e.what());
    }
  });
  reg.require_total();
  return reg;
}

ApiRegistry ApiRegistry::load(const std::filesystem::path& path) { return parse(read_all(path)); }

void ApiRegistry::save(const std::filesystem::path& path) const { write_all(path, format()); }

}  // namespace pbci::dispatch
