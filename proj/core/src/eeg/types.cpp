#include "pbci/eeg/types.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace pbci::eeg {

SubjectId::SubjectId(int index, int max_subjects) : index_(index) {
  if (index < 1 || index > max_subjects) {
    throw std::invalid_argument("subject index " + std::to_string(index) + " outside 1.." +
                                std::to_string(max_subjects));
  }
}

std::string_view to_string(Paradigm p) noexcept {
  switch (p) {
    case Paradigm::MI: return "MI";
    case Paradigm::SI: return "SI";
    case Paradigm::VI: return "VI";
  }
  return "?";
}

std::string_view to_string(ImageryLabel l) noexcept {
  switch (l) {
    case ImageryLabel::apple: return "apple";
    case ImageryLabel::star: return "star";
    case ImageryLabel::clover: return "clover";
    case ImageryLabel::snowman: return "snowman";
  }
  return "?";
}

std::optional<Paradigm> parse_paradigm(std::string_view s) noexcept {
  for (Paradigm p : kAllParadigms) {
    if (to_string(p) == s) return p;
  }
  return std::nullopt;
}

std::optional<ImageryLabel> parse_label(std::string_view s) noexcept {
  for (ImageryLabel l : kAllLabels) {
    if (to_string(l) == s) return l;
  }
  return std::nullopt;
}

ImageryLabel label_from_ordinal(std::size_t i) {
  if (i >= kAllLabels.size()) throw std::invalid_argument("label ordinal out of range");
  return kAllLabels[i];
}

Paradigm paradigm_from_ordinal(std::size_t i) {
  if (i >= kAllParadigms.size()) throw std::invalid_argument("paradigm ordinal out of range");
  return kAllParadigms[i];
}

SampleMatrix::SampleMatrix(std::size_t channels, std::size_t samples, std::vector<float> data)
    : channels_(channels), samples_(samples), data_(std::move(data)) {
  if (data_.size() != channels_ * samples_) {
    throw std::invalid_argument("sample matrix data length does not match channels x samples");
  }
}

bool SampleMatrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

Montage::Montage(std::vector<std::string> names) : names_(std::move(names)) {
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (n.empty()) throw std::invalid_argument("empty channel name in montage");
    if (!seen.insert(n).second) throw std::invalid_argument("duplicate channel name: " + n);
  }
}

Montage Montage::standard32() {
  return Montage({"Fp1", "Fp2", "F7",  "F3",  "Fz",  "F4",  "F8",  "FC5", "FC1", "FC2", "FC6",
                  "T7",  "C3",  "Cz",  "C4",  "T8",  "TP9", "CP5", "CP1", "CP2", "CP6", "TP10",
                  "P7",  "P3",  "Pz",  "P4",  "P8",  "PO9", "O1",  "Oz",  "O2",  "PO10"});
}

}  // namespace pbci::eeg
