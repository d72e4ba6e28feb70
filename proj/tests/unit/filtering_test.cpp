#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "pbci/signal/filtering.hpp"
#include "test_support.hpp"

namespace {

using namespace pbci::signal;
using pbci::eeg::Epoch;
using pbci::eeg::SampleMatrix;

constexpr double kPi = std::numbers::pi;

Epoch epoch_from(const std::vector<std::vector<double>>& rows) {
  Epoch e;
  e.data = SampleMatrix(rows.size(), rows.front().size());
  for (std::size_t c = 0; c < rows.size(); ++c)
    for (std::size_t t = 0; t < rows[c].size(); ++t) e.data(c, t) = static_cast<float>(rows[c][t]);
  return e;
}

std::vector<double> sine(double f, std::size_t n, double fs = 250.0, double amp = 1.0, double phase = 0.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::sin(2 * kPi * f * static_cast<double>(i) / fs + phase);
  return x;
}

TEST(Filtfilt, MatchesScipySosfiltfilt) {
  // scipy.signal.sosfiltfilt(butter(4,[8,30],'band',fs=250,output='sos'), x,
  // padtype='odd', padlen=27), scipy 1.15.3.
  std::vector<double> x(200);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double n = static_cast<double>(i);
    x[i] = std::sin(2 * kPi * 12 * n / 250) + 0.5 * std::sin(2 * kPi * 40 * n / 250) +
           0.3 * std::cos(0.07 * std::pow(n, 1.3)) + 0.2;
  }
  const auto c = design_bandpass(8, 30, 4, 250);
  ASSERT_EQ(default_pad_length(c), 27u);
  const auto y = filtfilt(c, x, 27);
  const std::pair<std::size_t, double> ref[] = {
      {0, 0.06065264679774052},  {1, 0.41746549146352285}, {17, -1.1259969826755114},
      {50, 0.7008218399396356},  {99, -1.227526921946126}, {150, 0.6314457382300455},
      {198, 0.46344180894536435}, {199, 0.18316267987671386},
  };
  ASSERT_EQ(y.size(), x.size());
  for (const auto& [i, v] : ref) EXPECT_NEAR(y[i], v, 1e-9) << "sample " << i;
}

TEST(Filtfilt, PassbandSineKeepsAmplitude) {
  const auto c = design_bandpass(8, 30, 4, 250);
  const auto x = sine(15, 750);
  const auto y = filtfilt(c, x, 27);
  const double gain = std::pow(c.magnitude(15, 250), 2);
  double worst = 0.0;
  for (std::size_t i = 125; i < 625; ++i) worst = std::max(worst, std::abs(y[i] - gain * x[i]));
  EXPECT_LT(worst, 0.02);
}

TEST(Filtfilt, RemovesDc) {
  const auto c = design_bandpass(8, 30, 4, 250);
  const std::vector<double> x(750, 3.0);
  const auto y = filtfilt(c, x, 27);
  for (std::size_t i = 125; i < 625; ++i) EXPECT_LT(std::abs(y[i]), 0.01 * 3.0);
}

TEST(Filtfilt, ZeroInZeroOut) {
  const auto c = design_bandpass(8, 30, 4, 250);
  const auto y = filtfilt(epoch_from({std::vector<double>(750, 0.0), std::vector<double>(750, 0.0)}), c);
  for (float v : y.data.values()) EXPECT_EQ(v, 0.0f);
}

int peak_lag(const std::vector<double>& a, const std::vector<double>& b, int max_lag) {
  int best = 0;
  double best_v = -1e300;
  for (int lag = -max_lag; lag <= max_lag; ++lag) {
    double s = 0.0;
    for (int i = 100; i < static_cast<int>(a.size()) - 100; ++i) s += a[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(i + lag)];
    if (s > best_v) {
      best_v = s;
      best = lag;
    }
  }
  return best;
}

TEST(Filtfilt, ZeroLagOnBandLimitedInput) {
  const auto c = design_bandpass(8, 30, 4, 250);
  std::vector<double> x(750, 0.0);
  for (double f : {10.0, 13.0, 17.5, 22.0, 26.0}) {
    const auto s = sine(f, 750, 250, 1.0, f);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += s[i];
  }
  EXPECT_EQ(peak_lag(x, filtfilt(c, x, 27), 20), 0);
  // A single causal pass does delay the signal.
  std::vector<double> causal = x;
  apply_cascade(c, causal);
  EXPECT_GT(peak_lag(x, causal, 20), 0);
}

TEST(Filtfilt, IsLinear) {
  const auto c = design_bandpass(8, 30, 4, 250);
  pbci::CounterRng rng(3);
  std::vector<double> x(400), y(400), mix(400);
  for (std::size_t i = 0; i < 400; ++i) {
    x[i] = rng.gaussian();
    y[i] = rng.gaussian();
    mix[i] = 2.5 * x[i] - 0.75 * y[i];
  }
  const auto fx = filtfilt(c, x, 27);
  const auto fy = filtfilt(c, y, 27);
  const auto fm = filtfilt(c, mix, 27);
  double scale = 0.0;
  for (double v : fm) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < 400; ++i) EXPECT_NEAR(fm[i], 2.5 * fx[i] - 0.75 * fy[i], 1e-6 * scale);
}

TEST(Filtfilt, ShortEpochIsRejected) {
  const auto c = design_bandpass(8, 30, 4, 250);
  try {
    (void)filtfilt(epoch_from({std::vector<double>(81, 1.0)}), c);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("epoch too short for padding"), std::string::npos);
  }
  EXPECT_NO_THROW((void)filtfilt(epoch_from({std::vector<double>(82, 1.0)}), c));
}

TEST(Filtfilt, ChannelsAreIndependent) {
  const auto c = design_bandpass(8, 30, 4, 250);
  const auto a = sine(12, 300);
  const auto b = sine(20, 300, 250, 2.0);
  const auto both = filtfilt(epoch_from({a, b}), c);
  const auto only_b = filtfilt(epoch_from({b}), c);
  for (std::size_t t = 0; t < 300; ++t) EXPECT_EQ(both.data(1, t), only_b.data(0, t));
}

TEST(Rescale, Examples) {
  Epoch e = epoch_from({std::vector<double>(10, 2e-6)});
  e.subject = pbci::eeg::SubjectId(5);
  const auto r = rescale(e);
  for (float v : r.data.values()) EXPECT_FLOAT_EQ(v, 2.0f);
  EXPECT_EQ(r.subject, e.subject);
  EXPECT_EQ(rescale(e, 1.0), e);

  pbci::CounterRng rng(8);
  const auto g = pbci::testing::random_epoch(rng, 3, 50, 1, pbci::eeg::Paradigm::MI, pbci::eeg::ImageryLabel::apple, 1e-5);
  const auto back = rescale(rescale(g, 1e6), 1e-6);
  for (std::size_t i = 0; i < g.data.values().size(); ++i) {
    const float a = g.data.values()[i];
    const float b = back.data.values()[i];
    EXPECT_LE(std::abs(a - b), std::abs(std::nextafter(a, 2 * a) - a)) << i;
  }
}

TEST(Rescale, CommutesWithFiltering) {
  const auto c = design_bandpass(8, 30, 4, 250);
  pbci::CounterRng rng(12);
  const auto e = pbci::testing::random_epoch(rng, 2, 300, 1, pbci::eeg::Paradigm::MI, pbci::eeg::ImageryLabel::apple, 1e-5);
  const auto a = rescale(filtfilt(e, c), 1e6);
  const auto b = filtfilt(rescale(e, 1e6), c);
  double scale = 0.0;
  for (float v : a.data.values()) scale = std::max(scale, static_cast<double>(std::abs(v)));
  for (std::size_t i = 0; i < a.data.values().size(); ++i) {
    EXPECT_NEAR(a.data.values()[i], b.data.values()[i], 1e-6 * scale);
  }
}

TEST(Preprocess, FiltersThenRescales) {
  const auto c = design_bandpass(8, 30, 4, 250);
  pbci::CounterRng rng(2);
  const auto e = pbci::testing::random_epoch(rng, 2, 300);
  PrepConfig cfg;
  cfg.factor = 10.0;
  EXPECT_EQ(preprocess(e, cfg), rescale(filtfilt(e, c), 10.0));
  cfg.causal = true;
  EXPECT_EQ(preprocess(e, cfg), rescale(filter_causal(e, c), 10.0));
  EXPECT_EQ(preprocess(std::vector<Epoch>{e, e}, cfg).size(), 2u);
}

TEST(ImageryWindow, CanonicalTimeline) {
  const auto w = imagery_window(TrialTimeline{}, 250);
  EXPECT_EQ(w.begin, 1000u);
  EXPECT_EQ(w.end, 1750u);
  SampleMatrix raw(2, 2250);
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t t = 0; t < 2250; ++t) raw(c, t) = static_cast<float>(c * 10000 + t);
  const auto e = extract_imagery_window(raw, TrialTimeline{}, 250);
  ASSERT_EQ(e.samples(), 750u);
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t t = 0; t < 750; ++t) EXPECT_EQ(e.data(c, t), raw(c, 1000 + t));
}

TEST(ImageryWindow, ShortTrialIsRejected) {
  try {
    (void)extract_imagery_window(SampleMatrix(2, 1500), TrialTimeline{}, 250);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("trial too short"), std::string::npos);
  }
}

}  // namespace
