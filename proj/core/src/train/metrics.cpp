#include "pbci/train/metrics.hpp"

#include <limits>
#include <stdexcept>
#include <string>

namespace pbci::train {

std::size_t EvalReport::total() const noexcept {
  std::size_t n = 0;
  for (const auto& row : confusion)
    for (std::size_t v : row) n += v;
  return n;
}

std::size_t EvalReport::correct() const noexcept {
  std::size_t n = 0;
  for (std::size_t k = 0; k < confusion.size(); ++k) n += confusion[k][k];
  return n;
}

double EvalReport::recall(std::size_t k) const {
  const auto& row = confusion.at(k);
  std::size_t n = 0;
  for (std::size_t v : row) n += v;
  if (n == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(row[k]) / static_cast<double>(n);
}

std::size_t target_of(const eeg::Epoch& epoch, decoder::Task task) {
  if (task == decoder::Task::identification) return static_cast<std::size_t>(epoch.subject.index() - 1);
  return static_cast<std::size_t>(epoch.label);
}

ConfusionMatrix make_confusion(std::size_t k) { return ConfusionMatrix(k, std::vector<std::size_t>(k, 0)); }

void accumulate(ConfusionMatrix& into, const ConfusionMatrix& other) {
  if (into.size() != other.size()) throw std::invalid_argument("confusion size mismatch");
  for (std::size_t i = 0; i < into.size(); ++i)
    for (std::size_t j = 0; j < into.size(); ++j) into[i][j] += other[i][j];
}

double accuracy_of(const ConfusionMatrix& m) {
  std::size_t total = 0, diag = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    diag += m[i][i];
    for (std::size_t v : m[i]) total += v;
  }
  return total == 0 ? 0.0 : static_cast<double>(diag) / static_cast<double>(total);
}

EvalReport evaluate(const decoder::EpochClassifier& model, std::span<const eeg::Epoch* const> test) {
  if (test.empty()) throw std::invalid_argument("empty test set");
  const std::size_t k = model.n_outputs();
  EvalReport report;
  report.confusion = make_confusion(k);
  const auto logits = model.logits_batch(test);
  for (std::size_t i = 0; i < test.size(); ++i) {
    const std::size_t truth = target_of(*test[i], model.task());
    if (truth >= k) {
      throw std::invalid_argument("class index " + std::to_string(truth) + " outside model outputs " +
                                  std::to_string(k));
    }
    const auto p = decoder::prediction_from_logits(logits[i]);
    ++report.confusion[truth][p.label];
  }
  report.accuracy = accuracy_of(report.confusion);
  return report;
}

}  // namespace pbci::train
