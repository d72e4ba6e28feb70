#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pbci::eeg {

inline constexpr std::size_t kCanonicalChannels = 32;
inline constexpr std::size_t kCanonicalSamples = 750;
inline constexpr double kCanonicalSampleRate = 250.0;
inline constexpr int kCanonicalSubjects = 8;
inline constexpr int kCanonicalTrialsPerLabel = 50;

/// 1-based subject index.
class SubjectId {
 public:
  constexpr SubjectId() = default;
  /// Throws std::invalid_argument when index is outside 1..max_subjects.
  explicit SubjectId(int index, int max_subjects = 255);

  [[nodiscard]] constexpr int index() const noexcept { return index_; }
  /// Zero-based class index used as a training target.
  [[nodiscard]] constexpr std::size_t ordinal() const noexcept {
    return static_cast<std::size_t>(index_ - 1);
  }

  friend constexpr auto operator<=>(SubjectId, SubjectId) = default;

 private:
  int index_ = 1;
};

enum class Paradigm : std::uint8_t { MI = 0, SI = 1, VI = 2 };
inline constexpr std::array<Paradigm, 3> kAllParadigms{Paradigm::MI, Paradigm::SI, Paradigm::VI};

enum class ImageryLabel : std::uint8_t { apple = 0, star = 1, clover = 2, snowman = 3 };
inline constexpr std::array<ImageryLabel, 4> kAllLabels{ImageryLabel::apple, ImageryLabel::star,
                                                         ImageryLabel::clover, ImageryLabel::snowman};

std::string_view to_string(Paradigm p) noexcept;
std::string_view to_string(ImageryLabel l) noexcept;
std::optional<Paradigm> parse_paradigm(std::string_view s) noexcept;
std::optional<ImageryLabel> parse_label(std::string_view s) noexcept;

constexpr std::size_t ordinal(ImageryLabel l) noexcept { return static_cast<std::size_t>(l); }
constexpr std::size_t ordinal(Paradigm p) noexcept { return static_cast<std::size_t>(p); }
ImageryLabel label_from_ordinal(std::size_t i);
Paradigm paradigm_from_ordinal(std::size_t i);

/// Dense channel-major sample matrix: all samples of channel 0, then 1, ...
class SampleMatrix {
 public:
  SampleMatrix() = default;
  SampleMatrix(std::size_t channels, std::size_t samples, float fill = 0.0f)
      : channels_(channels), samples_(samples), data_(channels * samples, fill) {}
  SampleMatrix(std::size_t channels, std::size_t samples, std::vector<float> data);

  [[nodiscard]] std::size_t channels() const noexcept { return channels_; }
  [[nodiscard]] std::size_t samples() const noexcept { return samples_; }

  float& operator()(std::size_t c, std::size_t t) noexcept { return data_[c * samples_ + t]; }
  float operator()(std::size_t c, std::size_t t) const noexcept { return data_[c * samples_ + t]; }

  std::span<float> channel(std::size_t c) noexcept { return {data_.data() + c * samples_, samples_}; }
  std::span<const float> channel(std::size_t c) const noexcept {
    return {data_.data() + c * samples_, samples_};
  }

  std::span<float> values() noexcept { return data_; }
  std::span<const float> values() const noexcept { return data_; }

  [[nodiscard]] bool all_finite() const noexcept;

  friend bool operator==(const SampleMatrix&, const SampleMatrix&) = default;

 private:
  std::size_t channels_ = 0;
  std::size_t samples_ = 0;
  std::vector<float> data_;
};

/// One imagery trial. trial_id and sample_rate are manifest-level metadata
/// and are not stored in the EEGD file itself.
struct Epoch {
  SampleMatrix data;
  double sample_rate = kCanonicalSampleRate;
  SubjectId subject;
  Paradigm paradigm = Paradigm::MI;
  ImageryLabel label = ImageryLabel::apple;
  int trial_id = 0;

  [[nodiscard]] std::size_t channels() const noexcept { return data.channels(); }
  [[nodiscard]] std::size_t samples() const noexcept { return data.samples(); }

  friend bool operator==(const Epoch&, const Epoch&) = default;
};

/// Ordered list of electrode names, unique.
class Montage {
 public:
  Montage() = default;
  /// Throws std::invalid_argument on duplicate or empty names.
  explicit Montage(std::vector<std::string> names);

  /// 32-channel 10/20 layout used by common 32-electrode caps.
  static Montage standard32();

  [[nodiscard]] const std::vector<std::string>& names() const noexcept { return names_; }
  [[nodiscard]] std::size_t size() const noexcept { return names_.size(); }

  friend bool operator==(const Montage&, const Montage&) = default;

 private:
  std::vector<std::string> names_;
};

}  // namespace pbci::eeg
