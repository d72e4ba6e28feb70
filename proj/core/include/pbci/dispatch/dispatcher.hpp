#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pbci/decoder/model.hpp"
#include "pbci/dispatch/preferences.hpp"
#include "pbci/eeg/types.hpp"

namespace pbci::dispatch {

struct SubjectPrediction {
  eeg::SubjectId subject;
  double confidence = 0.0;
  std::vector<double> probabilities;

  friend bool operator==(const SubjectPrediction&, const SubjectPrediction&) = default;
};

struct IntentPrediction {
  eeg::ImageryLabel intent = eeg::ImageryLabel::apple;
  double confidence = 0.0;
  std::vector<double> probabilities;

  friend bool operator==(const IntentPrediction&, const IntentPrediction&) = default;
};

struct PersonalizedAction {
  eeg::SubjectId subject;
  double subject_confidence = 0.0;
  eeg::ImageryLabel intent = eeg::ImageryLabel::apple;
  double intent_confidence = 0.0;
  bool abstained = true;
  std::string action_name;  ///< empty when abstained
  Parameters parameters;    ///< empty when abstained

  /// key=value lines: subject, subject_confidence, intent,
  /// intent_confidence, abstained, then action and param.<key> when not
  /// abstained.
  [[nodiscard]] std::vector<std::pair<std::string, std::string>> fields() const;
  /// One field per line.
  [[nodiscard]] std::string to_record() const;
  /// All fields on one line separated by spaces; values with whitespace,
  /// quotes or no characters are double-quoted.
  [[nodiscard]] std::string to_line() const;

  friend bool operator==(const PersonalizedAction&, const PersonalizedAction&) = default;
};

inline constexpr double kDefaultTau = 0.5;

/// Subject prediction from an identification model. Throws
/// std::invalid_argument("wrong task ...") for any other task.
SubjectPrediction identify_user(const decoder::EpochClassifier& model_f, const eeg::Epoch& epoch);

/// Intent prediction from an intention model. Throws
/// std::invalid_argument("wrong task ...") for any other task.
IntentPrediction classify_intent(const decoder::EpochClassifier& model_g, const eeg::Epoch& epoch);

/// Abstains when min(subject confidence, intent confidence) < tau.
/// Otherwise the action is registry[intent] with each default replaced by
/// the predicted subject's preference of the same key.
PersonalizedAction resolve(const SubjectPrediction& who, const IntentPrediction& what, const PreferenceStore& store,
                           const ApiRegistry& registry, double tau = kDefaultTau);

/// identify_user and classify_intent on the same epoch, then resolve.
PersonalizedAction dispatch(const decoder::EpochClassifier& model_f, const decoder::EpochClassifier& model_g,
                            const PreferenceStore& store, const ApiRegistry& registry, const eeg::Epoch& epoch,
                            double tau = kDefaultTau);

}  // namespace pbci::dispatch
