#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>

#include "pbci/eeg/epoch_io.hpp"
#include "pbci/eeg/manifest.hpp"
#include "pbci/synth/generator.hpp"
#include "pbci/synth/spectrum.hpp"
#include "test_support.hpp"

namespace {

using namespace pbci::synth;
using pbci::CounterRng;
using pbci::eeg::ImageryLabel;
using pbci::eeg::Paradigm;

SynthConfig small_config(double snr_db = 6.0) {
  auto c = preset("easy");
  c.snr_db = snr_db;
  c.n_subjects = 2;
  c.n_trials_per_label = 3;
  c.seed = 7;
  return c;
}

TEST(Preset, KnownNames) {
  EXPECT_EQ(preset("easy").snr_db, 6.0);
  EXPECT_EQ(preset("hard").snr_db, -6.0);
  EXPECT_GT(preset("easy").subject_signature_strength, preset("hard").subject_signature_strength);
  try {
    (void)preset("medium");
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("unknown preset"), std::string::npos);
  }
}

TEST(Spectrum, FftMatchesNaiveDft) {
  CounterRng rng(4);
  std::vector<std::complex<double>> x(64);
  for (auto& v : x) v = {rng.gaussian(), rng.gaussian()};
  auto y = x;
  fft_inplace(y, false);
  for (std::size_t k = 0; k < x.size(); ++k) {
    std::complex<double> s = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) {
      s += x[n] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * n) / 64.0);
    }
    EXPECT_LT(std::abs(s - y[k]), 1e-10) << k;
  }
  fft_inplace(y, true);
  for (std::size_t n = 0; n < x.size(); ++n) EXPECT_LT(std::abs(y[n] / 64.0 - x[n]), 1e-12);
  EXPECT_EQ(next_pow2(750), 1024u);
  EXPECT_EQ(next_pow2(1024), 1024u);
}

TEST(Spectrum, PowerLawNoiseHasUnitRmsAndSlope) {
  for (double exponent : {0.5, 1.0, 1.5}) {
    // Average periodograms of many draws and fit log power against log f.
    const std::size_t n = 1024;
    std::vector<double> power(n / 2, 0.0);
    CounterRng rng(21);
    for (int rep = 0; rep < 60; ++rep) {
      const auto x = power_law_noise(n, exponent, rng);
      double ss = 0.0;
      for (double v : x) ss += v * v;
      ASSERT_NEAR(std::sqrt(ss / static_cast<double>(n)), 1.0, 1e-12);
      std::vector<std::complex<double>> c(x.begin(), x.end());
      fft_inplace(c, false);
      for (std::size_t k = 1; k < n / 2; ++k) power[k] += std::norm(c[k]);
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (std::size_t k = 4; k < n / 2; ++k) {
      const double lx = std::log(static_cast<double>(k));
      const double ly = std::log(power[k]);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
      ++m;
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    EXPECT_NEAR(slope, -exponent, 0.1) << exponent;
  }
}

TEST(Generator, CountsGeometryAndBalance) {
  const auto c = small_config();
  const auto epochs = generate_epochs(c);
  ASSERT_EQ(epochs.size(), c.epoch_count());
  EXPECT_EQ(c.epoch_count(), 2u * 3u * 4u * 3u);
  std::map<std::tuple<int, Paradigm, ImageryLabel>, int> cells;
  std::set<std::tuple<int, Paradigm, int>> trial_ids;
  for (const auto& e : epochs) {
    EXPECT_EQ(e.channels(), 32u);
    EXPECT_EQ(e.samples(), 750u);
    EXPECT_TRUE(e.data.all_finite());
    ++cells[{e.subject.index(), e.paradigm, e.label}];
    EXPECT_TRUE(trial_ids.insert({e.subject.index(), e.paradigm, e.trial_id}).second);
  }
  for (const auto& [k, n] : cells) EXPECT_EQ(n, 3);
  EXPECT_EQ(SynthConfig{}.epoch_count(), 4800u);
}

TEST(Generator, DeterministicAndSeedSensitive) {
  auto c = small_config();
  c.n_subjects = 1;
  EXPECT_EQ(generate_epochs(c), generate_epochs(c));
  auto d = c;
  d.seed = 8;
  EXPECT_NE(generate_epochs(c), generate_epochs(d));
  EXPECT_NE(c.hash(), d.hash());
  EXPECT_EQ(c.hash().size(), 16u);
}

TEST(Generator, SignaturesRespectInvariants) {
  const auto c = small_config();
  const auto sig = draw_signatures(c);
  ASSERT_EQ(sig.subjects.size(), 2u);
  for (const auto& s : sig.subjects) {
    for (std::size_t k = 0; k < c.n_sources; ++k) {
      double norm = 0.0;
      for (std::size_t ch = 0; ch < c.n_channels; ++ch) norm += std::pow(s.mixing[ch * c.n_sources + k], 2);
      EXPECT_NEAR(norm, 1.0, 1e-12);
    }
  }
  for (auto p : c.paradigms) {
    std::set<double> freqs;
    std::set<std::size_t> used;
    for (auto l : pbci::eeg::kAllLabels) {
      const auto& cs = sig.find(p, l);
      EXPECT_GE(cs.carrier_hz, 9.0);
      EXPECT_LE(cs.carrier_hz, 28.0);
      EXPECT_TRUE(freqs.insert(std::floor(cs.carrier_hz)).second);
      for (auto ch : cs.channels) EXPECT_TRUE(used.insert(ch).second);
    }
  }
}

TEST(Generator, BurstIsConfinedToClassChannelsAndMiddleWindow) {
  const auto with = small_config(6.0);
  auto without = with;
  without.snr_db = -std::numeric_limits<double>::infinity();
  ASSERT_TRUE(without.noise_only());
  const auto sig = draw_signatures(with);
  const auto a = generate_epoch(with, sig, 1, Paradigm::SI, ImageryLabel::star, 0);
  const auto b = generate_epoch(without, draw_signatures(without), 1, Paradigm::SI, ImageryLabel::star, 0);
  const auto& cls = sig.find(Paradigm::SI, ImageryLabel::star);
  const std::set<std::size_t> burst(cls.channels.begin(), cls.channels.end());
  for (std::size_t c = 0; c < 32; ++c) {
    for (std::size_t t = 0; t < 750; ++t) {
      const float d = a.data(c, t) - b.data(c, t);
      if (!burst.contains(c) || t < 125 || t >= 625) {
        ASSERT_EQ(d, 0.0f) << c << "," << t;
      }
    }
  }
}

double carrier_power(const pbci::eeg::Epoch& e, const ClassSignature& cls, double fs) {
  // Goertzel-style single-bin power over the burst window, averaged over the
  // class channels.
  double total = 0.0;
  for (std::size_t c : cls.channels) {
    std::complex<double> acc = 0.0;
    for (std::size_t t = 125; t < 625; ++t) {
      acc += static_cast<double>(e.data(c, t)) *
             std::polar(1.0, -2.0 * std::numbers::pi * cls.carrier_hz * static_cast<double>(t) / fs);
    }
    total += std::norm(acc);
  }
  return total / static_cast<double>(cls.channels.size());
}

TEST(Generator, SignalMarginGrowsWithSnr) {
  double previous = -1e300;
  for (double snr : {-6.0, 0.0, 6.0}) {
    auto c = small_config(snr);
    c.n_subjects = 1;
    c.n_trials_per_label = 8;
    const auto sig = draw_signatures(c);
    const auto epochs = generate_epochs(c);
    const auto& cls = sig.find(Paradigm::MI, ImageryLabel::apple);
    double own = 0.0, other = 0.0;
    int n_own = 0, n_other = 0;
    for (const auto& e : epochs) {
      if (e.paradigm != Paradigm::MI) continue;
      const double pw = carrier_power(e, cls, c.fs);
      if (e.label == ImageryLabel::apple) {
        own += pw;
        ++n_own;
      } else {
        other += pw;
        ++n_other;
      }
    }
    const double margin = own / n_own - other / n_other;
    EXPECT_GT(margin, 0.0) << snr;
    EXPECT_GT(margin, previous) << snr;
    previous = margin;
  }
}

TEST(Generator, DatasetOnDiskIsValidAndReproducible) {
  pbci::testing::TempDir a("synth"), b("synth");
  const auto c = small_config();
  const auto m1 = generate_dataset(c, a.path());
  const auto m2 = generate_dataset(c, b.path());
  ASSERT_EQ(m1.records.size(), c.epoch_count());
  pbci::eeg::ValidationOptions opt;
  opt.expected_per_cell = 3;
  opt.n_subjects = 2;
  const auto report = pbci::eeg::validate_dataset(pbci::eeg::read_manifest(a / "manifest.tsv"), opt);
  EXPECT_TRUE(report.ok()) << report.summary();

  bool has_hash = false;
  for (const auto& p : m1.provenance) has_hash |= p.find(c.hash()) != std::string::npos;
  EXPECT_TRUE(has_hash);

  for (std::size_t i = 0; i < m1.records.size(); i += 7) {
    std::ifstream fa(m1.resolve(m1.records[i]), std::ios::binary), fb(m2.resolve(m2.records[i]), std::ios::binary);
    const std::string sa((std::istreambuf_iterator<char>(fa)), {}), sb((std::istreambuf_iterator<char>(fb)), {});
    EXPECT_EQ(sa, sb);
    EXPECT_EQ(sa.size(), pbci::eeg::eegd_file_size(32, 750));
  }
  const auto loaded = pbci::eeg::load_epochs(m1);
  const auto direct = generate_epochs(c);
  ASSERT_EQ(loaded.size(), direct.size());
  for (std::size_t i = 0; i < loaded.size(); ++i) EXPECT_EQ(loaded[i].data, direct[i].data);
}

TEST(SynthConfig, ValidationRejectsBadValues) {
  auto c = small_config();
  c.n_subjects = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = small_config();
  c.snr_db = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = small_config();
  c.n_labels = 5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

}  // namespace
