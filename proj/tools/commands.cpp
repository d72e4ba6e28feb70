#include "commands.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "pbci/decoder/model.hpp"
#include "pbci/dispatch/dispatcher.hpp"
#include "pbci/eeg/epoch_io.hpp"
#include "pbci/eeg/manifest.hpp"
#include "pbci/signal/filtering.hpp"
#include "pbci/synth/generator.hpp"
#include "pbci/train/split.hpp"
#include "pbci/train/trainer.hpp"

namespace pbci::cli {
namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void emit_table(const train::ResultTable& table, const std::filesystem::path& prefix) {
  std::cout << table.to_text();
  if (prefix.empty()) return;
  auto txt = prefix, csv = prefix;
  txt += ".txt";
  csv += ".csv";
  write_text(txt, table.to_text());
  write_text(csv, table.to_csv());
  std::cerr << "wrote " << txt.string() << " and " << csv.string() << "\n";
}

// One model on a seeded 70:10:20 split of every record, for deployment.
void train_final_model(const std::vector<eeg::Epoch>& epochs, decoder::Task task, const TrainArgs& a) {
  const auto& hp = a.options.hp;
  const auto plan = train::split_identification(epochs.size(), hp.seed);
  std::vector<const eeg::Epoch*> tr, va, te;
  for (auto i : plan.train) tr.push_back(&epochs[i]);
  for (auto i : plan.val) va.push_back(&epochs[i]);
  for (auto i : plan.test) te.push_back(&epochs[i]);

  auto spec = decoder::ModelSpec::for_task(task);
  spec.n_channels = epochs.front().channels();
  spec.n_samples = epochs.front().samples();
  auto model = decoder::build(spec, task, derive_key(hp.seed, {0xF1A1}));
  const auto result = train::train(model, tr, va, hp, [&](const train::EpochStats& s) {
    if (a.verbose) {
      std::fprintf(stderr, "final model epoch %zu: train loss %.4f, val loss %.4f, val accuracy %.3f\n", s.epoch,
                   s.train_loss, s.val_loss, s.val_accuracy);
    }
  });
  const auto report = train::evaluate(model, te);
  model.save(a.save_model);
  std::fprintf(stderr, "saved %s model to %s (best epoch %zu, held-out accuracy %.4f on %zu records)\n",
               std::string(decoder::to_string(task)).c_str(), a.save_model.string().c_str(), result.best_epoch,
               report.accuracy, te.size());
}

train::ExperimentOptions with_logging(const TrainArgs& a) {
  auto o = a.options;
  if (a.verbose) o.log = [](const std::string& line) { std::cerr << line << "\n"; };
  return o;
}

}  // namespace

int run_synth(const SynthArgs& a) {
  auto cfg = synth::preset(a.preset);
  cfg.seed = a.seed;
  if (a.subjects) cfg.n_subjects = *a.subjects;
  if (a.trials) cfg.n_trials_per_label = *a.trials;
  if (a.snr_db) cfg.snr_db = *a.snr_db;
  if (a.noise_only) cfg.snr_db = -std::numeric_limits<double>::infinity();
  const auto manifest = synth::generate_dataset(cfg, a.out);
  std::cout << "wrote " << manifest.records.size() << " epochs to " << a.out.string() << " (config " << cfg.hash()
            << ")\n";
  return 0;
}

int run_prep(const PrepArgs& a) {
  signal::PrepConfig cfg;
  cfg.low_hz = a.low;
  cfg.high_hz = a.high;
  cfg.order = a.order;
  cfg.factor = a.factor;
  cfg.causal = a.causal;

  const auto in = eeg::read_manifest(a.in);
  const auto out_dir = a.out.has_parent_path() ? a.out.parent_path() : std::filesystem::path(".");
  eeg::DatasetManifest out = in;
  out.base_dir = out_dir;
  for (auto& r : out.records) {
    if (r.path.is_absolute()) r.path = r.path.filename();
    const auto src = in.resolve(r);
    const auto dst = out_dir / r.path;
    std::filesystem::create_directories(dst.parent_path());
    const auto epoch = eeg::read_epoch(src, in.sample_rate, r.trial_id);
    eeg::write_epoch(signal::preprocess(epoch, cfg), dst);
  }
  std::ostringstream note;
  note << "prep low_hz=" << cfg.low_hz << " high_hz=" << cfg.high_hz << " order=" << cfg.order
       << " factor=" << format_double(cfg.factor) << " mode=" << (cfg.causal ? "causal" : "filtfilt")
       << " source=" << a.in.string();
  out.provenance.push_back(note.str());
  eeg::write_manifest(out, a.out);
  std::cout << "filtered " << out.records.size() << " epochs into " << a.out.string() << "\n";
  return 0;
}

int run_validate(const ValidateArgs& a) {
  eeg::ValidationOptions o;
  o.expected_per_cell = a.per_cell;
  o.n_subjects = a.subjects;
  o.parse_files = a.parse_files;
  const auto report = eeg::validate_dataset(eeg::read_manifest(a.manifest), o);
  std::cout << report.summary();
  return report.ok() ? 0 : 1;
}

int run_train_id(const TrainArgs& a) {
  const auto manifest = eeg::read_manifest(a.manifest);
  const auto epochs = eeg::load_epochs(manifest);
  const auto r = train::run_identification_experiment(std::span<const eeg::Epoch>(epochs), with_logging(a));
  emit_table(r.table, a.out);
  if (!a.save_model.empty()) train_final_model(epochs, decoder::Task::identification, a);
  return 0;
}

int run_train_intent(const TrainArgs& a) {
  auto o = with_logging(a);
  if (a.split == "per-subject") {
    o.split = train::IntentSplit::per_subject_cv;
  } else if (a.split == "cross-subject") {
    o.split = train::IntentSplit::cross_subject;
  } else {
    throw std::invalid_argument("unknown split '" + a.split + "'");
  }
  const auto manifest = eeg::read_manifest(a.manifest);
  const auto epochs = eeg::load_epochs(manifest);
  const auto r = train::run_intention_experiment(std::span<const eeg::Epoch>(epochs), o);
  emit_table(r.table, a.out);
  if (!a.save_model.empty()) train_final_model(epochs, decoder::Task::intention, a);
  return 0;
}

int run_report(const ReportArgs& a) {
  std::cout << train::ResultTable::from_csv(read_text(a.csv)).to_text(a.precision);
  return 0;
}

int run_dispatch(const DispatchArgs& a) {
  const auto f = decoder::TrainedModel::load(a.model_f);
  const auto g = decoder::TrainedModel::load(a.model_g);
  const auto store = dispatch::PreferenceStore::load(a.store);
  const auto registry = dispatch::ApiRegistry::load(a.registry);

  if (!a.epoch.empty()) {
    const auto epoch = eeg::read_epoch(a.epoch);
    std::cout << dispatch::dispatch(f, g, store, registry, epoch, a.tau).to_record();
    return 0;
  }
  const auto manifest = eeg::read_manifest(a.manifest);
  for (const auto& r : manifest.records) {
    const auto epoch = eeg::read_epoch(manifest.resolve(r), manifest.sample_rate, r.trial_id);
    std::cout << "epoch=" << r.path.generic_string() << " "
              << dispatch::dispatch(f, g, store, registry, epoch, a.tau).to_line() << "\n";
  }
  return 0;
}

}  // namespace pbci::cli
