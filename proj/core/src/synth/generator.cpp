#include "pbci/synth/generator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "pbci/common/random.hpp"
#include "pbci/eeg/epoch_io.hpp"
#include "pbci/synth/spectrum.hpp"

namespace pbci::synth {
namespace {

// Stream tags.
constexpr std::uint64_t kClassTag = 1;
constexpr std::uint64_t kSubjectTag = 2;
constexpr std::uint64_t kEpochTag = 3;

// RMS of a Hann-enveloped unit sine: sqrt(3/8) * sqrt(1/2).
const double kBurstRmsPerAmplitude = std::sqrt(3.0 / 8.0) / std::numbers::sqrt2;

}  // namespace

void SynthConfig::validate() const {
  if (n_subjects < 1 || n_subjects > 255) throw std::invalid_argument("n_subjects must be in 1..255");
  if (n_trials_per_label < 1) throw std::invalid_argument("n_trials_per_label must be positive");
  if (paradigms.empty()) throw std::invalid_argument("at least one paradigm required");
  if (n_labels < 1 || n_labels > 4) throw std::invalid_argument("n_labels must be in 1..4");
  if (!(fs > 0.0)) throw std::invalid_argument("fs must be positive");
  if (n_channels == 0 || n_samples == 0) throw std::invalid_argument("empty epoch geometry");
  if (n_sources == 0) throw std::invalid_argument("n_sources must be positive");
  if (burst_channels == 0 || burst_channels > n_channels) {
    throw std::invalid_argument("burst_channels must be in 1..n_channels");
  }
  if (std::isnan(snr_db) || snr_db == std::numeric_limits<double>::infinity()) {
    throw std::invalid_argument("snr_db must be finite or -inf");
  }
  if (!(subject_signature_strength >= 0.0)) throw std::invalid_argument("negative signature strength");
}

bool SynthConfig::noise_only() const noexcept { return std::isinf(snr_db) && snr_db < 0.0; }

std::size_t SynthConfig::epoch_count() const noexcept {
  return static_cast<std::size_t>(n_subjects) * paradigms.size() * static_cast<std::size_t>(n_labels) *
         static_cast<std::size_t>(n_trials_per_label);
}

std::string SynthConfig::hash() const {
  std::uint64_t h = 0x243F6A8885A308D3ULL;
  auto fold = [&h](std::uint64_t v) { h = mix64(h ^ (v + 0x9E3779B97F4A7C15ULL)); };
  fold(static_cast<std::uint64_t>(n_subjects));
  fold(static_cast<std::uint64_t>(n_trials_per_label));
  for (auto p : paradigms) fold(static_cast<std::uint64_t>(p));
  fold(static_cast<std::uint64_t>(n_labels));
  fold(std::bit_cast<std::uint64_t>(fs));
  fold(n_channels);
  fold(n_samples);
  fold(std::bit_cast<std::uint64_t>(snr_db));
  fold(std::bit_cast<std::uint64_t>(subject_signature_strength));
  fold(seed);
  fold(n_sources);
  fold(burst_channels);
  fold(std::bit_cast<std::uint64_t>(noise_scale_uv));
  fold(std::bit_cast<std::uint64_t>(white_fraction));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

SynthConfig preset(std::string_view name) {
  SynthConfig c;
  if (name == "easy") {
    c.snr_db = 6.0;
    c.subject_signature_strength = 1.0;
  } else if (name == "hard") {
    c.snr_db = -6.0;
    c.subject_signature_strength = 0.25;
  } else {
    throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
  }
  return c;
}

const ClassSignature& DatasetSignatures::find(eeg::Paradigm p, eeg::ImageryLabel l) const {
  for (const auto& c : classes) {
    if (c.paradigm == p && c.label == l) return c;
  }
  throw std::out_of_range("no class signature for paradigm/label");
}

DatasetSignatures draw_signatures(const SynthConfig& config) {
  config.validate();
  const CounterRng root(config.seed);
  DatasetSignatures sig;

  const std::size_t C = config.n_channels;
  const std::size_t K = config.n_sources;
  const double shared_gain = std::sqrt(static_cast<double>(C) / static_cast<double>(K));
  const double white_rms = config.white_fraction * config.noise_scale_uv;
  const double strength = config.subject_signature_strength;

  for (int s = 1; s <= config.n_subjects; ++s) {
    CounterRng rng = root.substream({kSubjectTag, static_cast<std::uint64_t>(s)});
    SubjectSignature sub;
    sub.mixing.resize(C * K);
    for (double& m : sub.mixing) m = rng.gaussian();
    for (std::size_t k = 0; k < K; ++k) {
      double norm = 0.0;
      for (std::size_t c = 0; c < C; ++c) norm += sub.mixing[c * K + k] * sub.mixing[c * K + k];
      norm = std::sqrt(norm);
      for (std::size_t c = 0; c < C; ++c) sub.mixing[c * K + k] /= norm;
    }
    sub.exponent.resize(C);
    sub.scale.resize(C);
    sub.noise_rms.resize(C);
    for (std::size_t c = 0; c < C; ++c) {
      sub.exponent[c] = 1.0 + 0.5 * strength * rng.uniform(-1.0, 1.0);
      sub.scale[c] = config.noise_scale_uv * std::exp(0.4 * strength * rng.gaussian());
      double shared = 0.0;
      for (std::size_t k = 0; k < K; ++k) shared += sub.mixing[c * K + k] * sub.mixing[c * K + k];
      const double var = sub.scale[c] * sub.scale[c] * (1.0 + shared_gain * shared_gain * shared) +
                         white_rms * white_rms;
      sub.noise_rms[c] = std::sqrt(var);
    }
    sig.subjects.push_back(std::move(sub));
  }

  for (auto p : config.paradigms) {
    CounterRng rng = root.substream({kClassTag, static_cast<std::uint64_t>(p)});
    std::vector<int> freqs(19);
    std::iota(freqs.begin(), freqs.end(), 9);  // 9..27
    rng.shuffle(freqs.begin(), freqs.end());
    std::vector<std::size_t> channels(C);
    std::iota(channels.begin(), channels.end(), std::size_t{0});
    rng.shuffle(channels.begin(), channels.end());
    const bool disjoint = static_cast<std::size_t>(config.n_labels) * config.burst_channels <= C;

    for (int l = 0; l < config.n_labels; ++l) {
      ClassSignature cs;
      cs.paradigm = p;
      cs.label = eeg::label_from_ordinal(static_cast<std::size_t>(l));
      cs.carrier_hz = freqs[static_cast<std::size_t>(l)] + rng.uniform();
      if (!disjoint) rng.shuffle(channels.begin(), channels.end());
      const std::size_t first = disjoint ? static_cast<std::size_t>(l) * config.burst_channels : 0;
      cs.channels.assign(channels.begin() + static_cast<std::ptrdiff_t>(first),
                         channels.begin() + static_cast<std::ptrdiff_t>(first + config.burst_channels));
      std::sort(cs.channels.begin(), cs.channels.end());
      cs.depth = rng.uniform(0.8, 1.0);
      sig.classes.push_back(std::move(cs));
    }
  }
  return sig;
}

eeg::Epoch generate_epoch(const SynthConfig& config, const DatasetSignatures& signatures, int subject,
                          eeg::Paradigm paradigm, eeg::ImageryLabel label, int trial) {
  const std::size_t C = config.n_channels;
  const std::size_t T = config.n_samples;
  const std::size_t K = config.n_sources;
  const auto& sub = signatures.subjects.at(static_cast<std::size_t>(subject - 1));
  const double shared_gain = std::sqrt(static_cast<double>(C) / static_cast<double>(K));
  const double white_rms = config.white_fraction * config.noise_scale_uv;

  const CounterRng root(config.seed);
  CounterRng rng = root.substream({kEpochTag, static_cast<std::uint64_t>(subject),
                                   static_cast<std::uint64_t>(paradigm), static_cast<std::uint64_t>(label),
                                   static_cast<std::uint64_t>(trial)});

  std::vector<std::vector<double>> sources;
  sources.reserve(K);
  for (std::size_t k = 0; k < K; ++k) sources.push_back(power_law_noise(T, 1.0, rng));

  eeg::Epoch e;
  e.data = eeg::SampleMatrix(C, T);
  e.sample_rate = config.fs;
  e.subject = eeg::SubjectId(subject);
  e.paradigm = paradigm;
  e.label = label;
  e.trial_id = static_cast<int>(eeg::ordinal(label)) * config.n_trials_per_label + trial;

  std::vector<double> row(T);
  for (std::size_t c = 0; c < C; ++c) {
    const auto own = power_law_noise(T, sub.exponent[c], rng);
    for (std::size_t t = 0; t < T; ++t) {
      double shared = 0.0;
      for (std::size_t k = 0; k < K; ++k) shared += sub.mixing[c * K + k] * sources[k][t];
      row[t] = sub.scale[c] * (own[t] + shared_gain * shared);
    }
    for (std::size_t t = 0; t < T; ++t) row[t] += white_rms * rng.gaussian();
    auto dst = e.data.channel(c);
    for (std::size_t t = 0; t < T; ++t) dst[t] = static_cast<float>(row[t]);
  }

  if (!config.noise_only()) {
    const auto& cls = signatures.find(paradigm, label);
    // Hann-enveloped burst over the middle two thirds of the epoch.
    const std::size_t begin = T / 6;
    const std::size_t end = T - T / 6;
    const std::size_t len = end - begin;
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double freq = cls.carrier_hz + rng.uniform(-0.25, 0.25);
    const double snr = std::pow(10.0, config.snr_db / 20.0);
    for (std::size_t c : cls.channels) {
      const double amplitude = cls.depth * snr * sub.noise_rms[c] / kBurstRmsPerAmplitude;
      auto dst = e.data.channel(c);
      for (std::size_t i = 0; i < len; ++i) {
        const double env = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                                 static_cast<double>(len)));
        const double t = static_cast<double>(begin + i) / config.fs;
        dst[begin + i] += static_cast<float>(amplitude * env *
                                             std::sin(2.0 * std::numbers::pi * freq * t + phase));
      }
    }
  }
  return e;
}

std::vector<eeg::Epoch> generate_epochs(const SynthConfig& config) {
  const auto signatures = draw_signatures(config);
  std::vector<eeg::Epoch> out;
  out.reserve(config.epoch_count());
  for (int s = 1; s <= config.n_subjects; ++s) {
    for (auto p : config.paradigms) {
      for (int l = 0; l < config.n_labels; ++l) {
        for (int t = 0; t < config.n_trials_per_label; ++t) {
          out.push_back(generate_epoch(config, signatures, s, p,
                                       eeg::label_from_ordinal(static_cast<std::size_t>(l)), t));
        }
      }
    }
  }
  return out;
}

eeg::DatasetManifest generate_dataset(const SynthConfig& config, const std::filesystem::path& out_dir) {
  const auto signatures = draw_signatures(config);
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  eeg::DatasetManifest manifest;
  manifest.base_dir = out_dir;
  manifest.sample_rate = config.fs;
  if (config.n_channels != eeg::kCanonicalChannels) {
    std::vector<std::string> names;
    for (std::size_t c = 0; c < config.n_channels; ++c) names.push_back("Ch" + std::to_string(c + 1));
    manifest.montage = eeg::Montage(std::move(names));
  }

  {
    std::ostringstream p;
    p << std::setprecision(17) << "synth config_hash=" << config.hash() << " seed=" << config.seed
      << " snr_db=" << config.snr_db << " subject_signature_strength=" << config.subject_signature_strength
      << " n_subjects=" << config.n_subjects << " n_trials_per_label=" << config.n_trials_per_label
      << " n_channels=" << config.n_channels << " n_samples=" << config.n_samples << " fs=" << config.fs
      << " n_sources=" << config.n_sources << " burst_channels=" << config.burst_channels
      << " noise_scale_uv=" << config.noise_scale_uv << " white_fraction=" << config.white_fraction;
    manifest.provenance.push_back(p.str());
  }
  for (const auto& cls : signatures.classes) {
    std::ostringstream p;
    p << std::setprecision(17) << "class " << eeg::to_string(cls.paradigm) << ' ' << eeg::to_string(cls.label)
      << " carrier_hz=" << cls.carrier_hz << " depth=" << cls.depth << " channels=";
    for (std::size_t i = 0; i < cls.channels.size(); ++i) {
      if (i) p << ',';
      p << manifest.montage.names()[cls.channels[i]];
    }
    manifest.provenance.push_back(p.str());
  }

  for (int s = 1; s <= config.n_subjects; ++s) {
    for (auto p : config.paradigms) {
      char dir[32];
      std::snprintf(dir, sizeof dir, "S%02d/%s", s, std::string(eeg::to_string(p)).c_str());
      fs::create_directories(out_dir / dir);
      for (int l = 0; l < config.n_labels; ++l) {
        const auto label = eeg::label_from_ordinal(static_cast<std::size_t>(l));
        for (int t = 0; t < config.n_trials_per_label; ++t) {
          const eeg::Epoch e = generate_epoch(config, signatures, s, p, label, t);
          char name[64];
          std::snprintf(name, sizeof name, "%s/%s_%03d.eegd", dir, std::string(eeg::to_string(label)).c_str(), t);
          eeg::write_epoch(e, out_dir / name);
          manifest.records.push_back({name, e.subject, p, label, e.trial_id});
        }
      }
    }
  }
  eeg::write_manifest(manifest, out_dir / "manifest.tsv");
  return manifest;
}

}  // namespace pbci::synth
