#include "pbci/dispatch/dispatcher.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pbci::dispatch {
namespace {

void require_task(const decoder::EpochClassifier& model, decoder::Task expected) {
  if (model.task() != expected) {
    throw std::invalid_argument("wrong task: model is for " + std::string(decoder::to_string(model.task())) +
                                ", expected " + std::string(decoder::to_string(expected)));
  }
}

std::string number(double v) {
  std::ostringstream os;
  os.precision(6);
  os << std::fixed << v;
  return os.str();
}

std::string quoted(const std::string& v) {
  const bool plain = !v.empty() && v.find_first_of(" \t\"\\") == std::string::npos;
  if (plain) return v;
  std::string out = "\"";
  for (char c : v) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::vector<std::pair<std::string, std::string>> PersonalizedAction::fields() const {
  std::vector<std::pair<std::string, std::string>> f = {
      {"subject", "S" + std::to_string(subject.index())},
      {"subject_confidence", number(subject_confidence)},
      {"intent", std::string(eeg::to_string(intent))},
      {"intent_confidence", number(intent_confidence)},
      {"abstained", abstained ? "true" : "false"},
  };
  if (!abstained) {
    f.emplace_back("action", action_name);
    for (const auto& [k, v] : parameters) f.emplace_back("param." + k, v);
  }
  return f;
}

std::string PersonalizedAction::to_record() const {
  std::string out;
  for (const auto& [k, v] : fields()) out += k + "=" + v + "\n";
  return out;
}

std::string PersonalizedAction::to_line() const {
  std::string out;
  for (const auto& [k, v] : fields()) {
    if (!out.empty()) out += ' ';
    out += k + "=" + quoted(v);
  }
  return out;
}

SubjectPrediction identify_user(const decoder::EpochClassifier& model_f, const eeg::Epoch& epoch) {
  require_task(model_f, decoder::Task::identification);
  const auto p = decoder::predict(model_f, epoch);
  SubjectPrediction out;
  out.subject = eeg::SubjectId(static_cast<int>(p.label) + 1);
  out.confidence = p.top();
  out.probabilities = p.confidence;
  return out;
}

IntentPrediction classify_intent(const decoder::EpochClassifier& model_g, const eeg::Epoch& epoch) {
  require_task(model_g, decoder::Task::intention);
  const auto p = decoder::predict(model_g, epoch);
  IntentPrediction out;
  out.intent = eeg::label_from_ordinal(p.label);
  out.confidence = p.top();
  out.probabilities = p.confidence;
  return out;
}

PersonalizedAction resolve(const SubjectPrediction& who, const IntentPrediction& what, const PreferenceStore& store,
                           const ApiRegistry& registry, double tau) {
  if (std::isnan(tau)) throw std::invalid_argument("tau is NaN");
  PersonalizedAction a;
  a.subject = who.subject;
  a.subject_confidence = who.confidence;
  a.intent = what.intent;
  a.intent_confidence = what.confidence;
  a.abstained = std::min(who.confidence, what.confidence) < tau;
  if (a.abstained) return a;

  const auto& action = registry.at(what.intent);
  a.action_name = action.action_name;
  a.parameters = action.defaults;
  const auto& prefs = store.of(who.subject);
  for (auto& [key, value] : a.parameters) {
    auto it = prefs.find(key);
    if (it != prefs.end()) value = it->second;
  }
  return a;
}

PersonalizedAction dispatch(const decoder::EpochClassifier& model_f, const decoder::EpochClassifier& model_g,
                            const PreferenceStore& store, const ApiRegistry& registry, const eeg::Epoch& epoch,
                            double tau) {
  registry.require_total();
  const auto who = identify_user(model_f, epoch);
  const auto what = classify_intent(model_g, epoch);
  return resolve(who, what, store, registry, tau);
}

}  // namespace pbci::dispatch
