#include "pbci/train/experiments.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "pbci/common/random.hpp"
#include "pbci/decoder/model.hpp"
#include "pbci/train/split.hpp"

namespace pbci::train {
namespace {

using decoder::Task;
using EpochPtrs = std::vector<const eeg::Epoch*>;

void say(const ExperimentOptions& o, const std::string& msg) {
  if (o.log) o.log(msg);
}

EpochPtrs pick(const EpochPtrs& pool, const std::vector<std::size_t>& idx) {
  EpochPtrs out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(pool[i]);
  return out;
}

decoder::ModelSpec spec_for(std::span<const eeg::Epoch> epochs, Task task) {
  auto spec = decoder::ModelSpec::for_task(task);
  spec.n_channels = epochs.front().channels();
  spec.n_samples = epochs.front().samples();
  if (task == Task::identification) {
    int top = 0;
    for (const auto& e : epochs) top = std::max(top, e.subject.index());
    spec.n_outputs = std::max<std::size_t>(spec.n_outputs, static_cast<std::size_t>(top));
  }
  spec.validate();
  return spec;
}

std::vector<int> subjects_of(std::span<const eeg::Epoch> epochs) {
  std::set<int> s;
  for (const auto& e : epochs) s.insert(e.subject.index());
  return {s.begin(), s.end()};
}

/// Trains one fresh model and returns its confusion on `test`.
EvalReport fit_and_score(const decoder::ModelSpec& spec, Task task, const EpochPtrs& tr, const EpochPtrs& va,
                         const EpochPtrs& te, const ExperimentOptions& o, std::uint64_t run_key,
                         const std::string& tag) {
  Hyperparams hp = o.hp;
  hp.seed = run_key;
  auto model = decoder::build(spec, task, derive_key(run_key, {0x1417}));
  const auto fit = train(model, tr, va, hp);
  auto rep = evaluate(model, te);
  std::ostringstream os;
  os << tag << ": train " << tr.size() << " val " << va.size() << " test " << te.size() << ", best epoch "
     << fit.best_epoch << ", test accuracy " << rep.accuracy;
  say(o, os.str());
  rep.history = fit.history;
  return rep;
}

ResultTable empty_table(std::string title, const std::vector<int>& subjects, const ExperimentOptions& o,
                        Task task) {
  ResultTable t;
  t.title = std::move(title);
  t.config.push_back("task=" + std::string(decoder::to_string(task)));
  t.config.push_back("folds=" + std::to_string(o.folds));
  {
    std::ostringstream os;
    os << "inner_val_fraction=" << o.inner_val_fraction;
    t.config.push_back(os.str());
  }
  if (task == Task::identification) {
    t.config.push_back(std::string("models=") + (o.per_paradigm ? "per-paradigm" : "pooled"));
  } else {
    t.config.push_back(std::string("split=") +
                       (o.split == IntentSplit::cross_subject ? "cross-subject" : "per-subject-cv"));
  }
  for (auto& line : o.hp.describe()) t.config.push_back(std::move(line));
  for (auto p : eeg::kAllParadigms) t.columns.emplace_back(eeg::to_string(p));
  t.columns.emplace_back("Overall");
  for (int s : subjects) t.row_labels.push_back("S" + std::to_string(s));
  t.row_labels.emplace_back("Mean");
  return t;
}

void fill_mean_row(ResultTable& t) {
  std::vector<double> mean;
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    std::vector<double> col;
    for (const auto& row : t.cells) col.push_back(row[c]);
    mean.push_back(finite_mean(col));
  }
  t.cells.push_back(std::move(mean));
}

void check_input(std::span<const eeg::Epoch> epochs, const ExperimentOptions& o) {
  if (epochs.empty()) throw std::invalid_argument("experiment needs at least one epoch");
  if (o.folds < 2) throw std::invalid_argument("experiment needs folds >= 2");
  o.hp.validate();
}

}  // namespace

ExperimentResult run_identification_experiment(std::span<const eeg::Epoch> epochs, const ExperimentOptions& o) {
  check_input(epochs, o);
  const auto spec = spec_for(epochs, Task::identification);
  const auto subjects = subjects_of(epochs);
  const std::size_t k = spec.n_outputs;

  // Confusion per paradigm; the overall matrix is their sum.
  std::map<eeg::Paradigm, ConfusionMatrix> by_paradigm;
  ExperimentResult result;
  result.report.confusion = make_confusion(k);

  auto run_pool = [&](const EpochPtrs& pool, std::uint64_t group, const std::string& name) {
    std::vector<std::size_t> strata;
    for (const auto* e : pool) strata.push_back(target_of(*e, Task::identification));
    const std::uint64_t group_key = derive_key(o.hp.seed, {0x1D, group});
    const auto plan = kfold(strata, o.folds, group_key, o.inner_val_fraction);
    for (std::size_t f = 0; f < plan.folds.size(); ++f) {
      const auto& fold = plan.folds[f];
      const std::uint64_t run_key = derive_key(group_key, {f});
      Hyperparams hp = o.hp;
      hp.seed = run_key;
      auto model = decoder::build(spec, Task::identification, derive_key(run_key, {0x1417}));
      const auto tr = pick(pool, fold.train);
      const auto va = pick(pool, fold.val);
      const auto te = pick(pool, fold.test);
      const auto fit = train(model, tr, va, hp);
      const auto logits = model.logits_batch(te);
      auto fold_cm = make_confusion(k);
      for (std::size_t i = 0; i < te.size(); ++i) {
        const std::size_t truth = target_of(*te[i], Task::identification);
        const std::size_t guess = decoder::prediction_from_logits(logits[i]).label;
        ++fold_cm[truth][guess];
        ++by_paradigm.try_emplace(te[i]->paradigm, make_confusion(k)).first->second[truth][guess];
      }
      const double acc = accuracy_of(fold_cm);
      std::ostringstream os;
      os << name << " fold " << f + 1 << ": train " << tr.size() << " val " << va.size() << " test " << te.size()
         << ", best epoch " << fit.best_epoch << ", test accuracy " << acc;
      say(o, os.str());
      result.report.per_fold_accuracy.push_back(acc);
      accumulate(result.report.confusion, fold_cm);
    }
  };

  EpochPtrs all;
  for (const auto& e : epochs) all.push_back(&e);
  if (o.per_paradigm) {
    for (auto p : eeg::kAllParadigms) {
      EpochPtrs pool;
      for (const auto* e : all)
        if (e->paradigm == p) pool.push_back(e);
      if (pool.empty()) continue;
      run_pool(pool, 1 + eeg::ordinal(p), "identification " + std::string(eeg::to_string(p)));
    }
  } else {
    run_pool(all, 0, "identification");
  }
  result.report.accuracy = accuracy_of(result.report.confusion);

  auto& table = result.table;
  table = empty_table("User identification: per-subject recall", subjects, o, Task::identification);
  for (int s : subjects) {
    const auto cls = static_cast<std::size_t>(s - 1);
    std::vector<double> row;
    for (auto p : eeg::kAllParadigms) {
      auto it = by_paradigm.find(p);
      if (it == by_paradigm.end()) {
        row.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      EvalReport r;
      r.confusion = it->second;
      row.push_back(r.recall(cls));
    }
    row.push_back(result.report.recall(cls));
    table.cells.push_back(std::move(row));
  }
  fill_mean_row(table);
  return result;
}

ExperimentResult run_intention_experiment(std::span<const eeg::Epoch> epochs, const ExperimentOptions& o) {
  check_input(epochs, o);
  const auto spec = spec_for(epochs, Task::intention);
  const auto subjects = subjects_of(epochs);
  const std::size_t k = spec.n_outputs;

  ExperimentResult result;
  result.report.confusion = make_confusion(k);
  // (subject, paradigm) -> confusion of held-out predictions.
  std::map<std::pair<int, eeg::Paradigm>, ConfusionMatrix> cells;

  auto cell_pool = [&](int s, eeg::Paradigm p) {
    EpochPtrs pool;
    for (const auto& e : epochs)
      if (e.subject.index() == s && e.paradigm == p) pool.push_back(&e);
    return pool;
  };

  for (auto p : eeg::kAllParadigms) {
    if (o.split == IntentSplit::per_subject_cv) {
      for (int s : subjects) {
        const auto pool = cell_pool(s, p);
        if (pool.empty()) continue;
        std::vector<std::size_t> strata;
        for (const auto* e : pool) strata.push_back(target_of(*e, Task::intention));
        const std::uint64_t group_key =
            derive_key(o.hp.seed, {0x17, static_cast<std::uint64_t>(s), eeg::ordinal(p)});
        const auto plan = kfold(strata, o.folds, group_key, o.inner_val_fraction);
        auto& cm = cells.try_emplace({s, p}, make_confusion(k)).first->second;
        for (std::size_t f = 0; f < plan.folds.size(); ++f) {
          const auto& fold = plan.folds[f];
          const auto rep = fit_and_score(spec, Task::intention, pick(pool, fold.train), pick(pool, fold.val),
                                         pick(pool, fold.test), o, derive_key(group_key, {f}),
                                         "intention S" + std::to_string(s) + " " +
                                             std::string(eeg::to_string(p)) + " fold " + std::to_string(f + 1));
          result.report.per_fold_accuracy.push_back(rep.accuracy);
          accumulate(cm, rep.confusion);
          accumulate(result.report.confusion, rep.confusion);
        }
      }
    } else {
      if (subjects.size() < 3) throw std::invalid_argument("cross-subject split needs at least 3 subjects");
      for (std::size_t i = 0; i < subjects.size(); ++i) {
        const int test_s = subjects[i];
        const int val_s = subjects[(i + 1) % subjects.size()];
        EpochPtrs tr, va, te;
        for (const auto& e : epochs) {
          if (e.paradigm != p) continue;
          if (e.subject.index() == test_s) {
            te.push_back(&e);
          } else if (e.subject.index() == val_s) {
            va.push_back(&e);
          } else {
            tr.push_back(&e);
          }
        }
        if (te.empty() || tr.empty()) continue;
        const std::uint64_t run_key =
            derive_key(o.hp.seed, {0x27, static_cast<std::uint64_t>(test_s), eeg::ordinal(p)});
        const auto rep = fit_and_score(spec, Task::intention, tr, va, te, o, run_key,
                                       "intention cross-subject test S" + std::to_string(test_s) + " " +
                                           std::string(eeg::to_string(p)));
        result.report.per_fold_accuracy.push_back(rep.accuracy);
        cells.try_emplace({test_s, p}, rep.confusion);
        accumulate(result.report.confusion, rep.confusion);
      }
    }
  }
  result.report.accuracy = accuracy_of(result.report.confusion);

  auto& table = result.table;
  table = empty_table("Intention classification: accuracy", subjects, o, Task::intention);
  for (int s : subjects) {
    std::vector<double> row;
    auto pooled = make_confusion(k);
    bool any = false;
    for (auto p : eeg::kAllParadigms) {
      auto it = cells.find({s, p});
      if (it == cells.end()) {
        row.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      row.push_back(accuracy_of(it->second));
      accumulate(pooled, it->second);
      any = true;
    }
    row.push_back(any ? accuracy_of(pooled) : std::numeric_limits<double>::quiet_NaN());
    table.cells.push_back(std::move(row));
  }
  fill_mean_row(table);
  return result;
}

ExperimentResult run_identification_experiment(const eeg::DatasetManifest& manifest, const ExperimentOptions& o) {
  const auto epochs = eeg::load_epochs(manifest);
  return run_identification_experiment(std::span<const eeg::Epoch>(epochs), o);
}

ExperimentResult run_intention_experiment(const eeg::DatasetManifest& manifest, const ExperimentOptions& o) {
  const auto epochs = eeg::load_epochs(manifest);
  return run_intention_experiment(std::span<const eeg::Epoch>(epochs), o);
}

}  // namespace pbci::train
