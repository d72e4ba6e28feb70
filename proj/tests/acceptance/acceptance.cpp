// Acceptance checks. Prints one "PASS ACn ..." or "FAIL ACn ..." line per
// criterion; `--criterion n` runs a single one.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "pbci/decoder/model.hpp"
#include "pbci/decoder/shallow_convnet.hpp"
#include "pbci/dispatch/dispatcher.hpp"
#include "pbci/eeg/epoch_io.hpp"
#include "pbci/nn/adam.hpp"
#include "pbci/nn/checkpoint.hpp"
#include "pbci/nn/ops.hpp"
#include "pbci/signal/bandpass.hpp"
#include "pbci/signal/filtering.hpp"
#include "pbci/synth/generator.hpp"
#include "pbci/train/experiments.hpp"
#include "pbci/train/split.hpp"
#include "pbci/train/trainer.hpp"
#include "test_support.hpp"

namespace {

using namespace pbci;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<const eeg::Epoch*> pointers(const std::vector<eeg::Epoch>& v) {
  std::vector<const eeg::Epoch*> p;
  for (const auto& e : v) p.push_back(&e);
  return p;
}

// Full default filter bank on 4 x 100 inputs, two outputs, batch 4, every
// parameter element checked in binary64.
Outcome ac1() {
  const auto t0 = Clock::now();
  decoder::ModelSpec spec;
  spec.n_channels = 4;
  spec.n_samples = 100;
  spec.n_outputs = 2;
  decoder::ShallowConvNet<double> net(spec, 2024);
  CounterRng rng(31);
  nn::Tensor<double> x({4, 4, 100});
  for (double& v : x.values()) v = 5.0 * rng.gaussian();
  const std::size_t targets[] = {0, 1, 1, 0};
  const auto r = testing::gradient_check(net.parameters(), [&](nn::Tape<double>& t) {
    return nn::softmax_cross_entropy(t, net.forward(t, x, nn::Mode::train, CounterRng(9)), targets);
  }, 1e-3);
  const double secs = seconds_since(t0);
  // Relative error per parameter tensor; the element-wise maximum is
  // reported as well.
  return {r.max_tensor_rel_error < 1e-4 && secs < 60.0 && r.checked == net.parameter_count(),
          fmt("max rel error %.3g (%s) over %zu tensors, %zu elements; element-wise max %.3g at %s; %.1f s",
              r.max_tensor_rel_error, r.worst_tensor.c_str(), r.tensor_rel_errors.size(), r.checked,
              r.max_rel_error, r.worst.c_str(), secs)};
}

Outcome ac2() {
  struct Case {
    double p0;
    std::vector<double> grads;
    double lr, wd;
  };
  const std::vector<Case> cases = {
      {1.0, {0.0, 0.0, 0.0}, 1e-3, 1e-3},
      {0.5, {0.3, -1.2, 0.05}, 1e-3, 1e-3},
      {-2.0, {4.0, 4.0, -0.5}, 1e-2, 0.0},
  };
  double worst = 0.0;
  for (const auto& c : cases) {
    double p = c.p0, m = 0.0, v = 0.0;
    nn::AdamConfig cfg;
    cfg.lr = c.lr;
    cfg.weight_decay = c.wd;
    nn::Parameter<double> param("p", nn::Tensor<double>({1}, c.p0));
    nn::Adam<double> opt({&param}, cfg);
    for (std::size_t i = 0; i < c.grads.size(); ++i) {
      const double t = static_cast<double>(i + 1);
      const double g = c.grads[i] + c.wd * p;
      m = 0.9 * m + 0.1 * g;
      v = 0.999 * v + 0.001 * g * g;
      p -= c.lr * (m / (1.0 - std::pow(0.9, t))) / (std::sqrt(v / (1.0 - std::pow(0.999, t))) + 1e-8);
      param.grad[0] = c.grads[i];
      opt.step();
      worst = std::max(worst, std::abs(param.value[0] - p));
    }
  }
  // High-precision reference for the first case.
  const double ref = 0.99700012606292355859;
  nn::Parameter<double> param("p", nn::Tensor<double>({1}, 1.0));
  nn::Adam<double> opt({&param});
  for (int i = 0; i < 3; ++i) opt.step();
  worst = std::max(worst, std::abs(param.value[0] - ref));
  return {worst <= 1e-12, fmt("max |diff| %.3g", worst)};
}

// Lag of the peak cross-correlation between x and y within +-max_lag.
long peak_lag(const std::vector<double>& x, const std::vector<double>& y, long max_lag) {
  long best = 0;
  double best_v = -std::numeric_limits<double>::infinity();
  const long n = static_cast<long>(x.size());
  for (long lag = -max_lag; lag <= max_lag; ++lag) {
    double s = 0.0;
    for (long i = 0; i < n; ++i) {
      const long j = i + lag;
      if (j >= 0 && j < n) s += x[i] * y[j];
    }
    if (s > best_v) {
      best_v = s;
      best = lag;
    }
  }
  return best;
}

Outcome ac3() {
  const double fs = 250.0;
  const auto bp = signal::design_bandpass(8.0, 30.0, 4, fs);
  const double h15 = bp.magnitude(15.0, fs), h1 = bp.magnitude(1.0, fs), h60 = bp.magnitude(60.0, fs);
  bool ok = h15 >= 0.99 && h15 <= 1.01 && h1 < 0.1 && h60 < 0.1;

  // Band-limited input: a sum of in-band tones with random phases.
  CounterRng rng(3);
  std::vector<double> x(1000, 0.0);
  for (double f : {11.0, 14.5, 19.0, 23.5, 27.0}) {
    const double phase = 2 * std::numbers::pi * rng.uniform();
    for (std::size_t n = 0; n < x.size(); ++n) x[n] += std::sin(2 * std::numbers::pi * f * n / fs + phase);
  }
  const auto y = signal::filtfilt(bp, x, signal::default_pad_length(bp));
  const long lag = peak_lag(x, y, 50);
  auto causal = x;
  signal::apply_cascade(bp, causal);
  const long causal_lag = peak_lag(x, causal, 50);
  ok = ok && lag == 0;
  return {ok, fmt("|H(15)|=%.6f |H(1)|=%.3g |H(60)|=%.3g, filtfilt lag %ld (single pass %ld)", h15, h1, h60, lag,
                  causal_lag)};
}

Outcome ac4() {
  using decoder::Task;
  std::ostringstream os;
  bool ok = true;
  for (auto [task, want] : {std::pair{Task::intention, std::size_t{59364}}, std::pair{Task::identification, std::size_t{66408}}}) {
    decoder::TrainedModel m(decoder::ModelSpec::for_task(task), task, 1);
    CounterRng rng(2);
    const auto e = testing::random_epoch(rng, 32, 750);
    const std::vector<const eeg::Epoch*> one = {&e};
    nn::Tape<float> tape;
    (void)m.network().forward(tape, decoder::make_batch<float>(one), nn::Mode::eval, CounterRng(0));
    std::size_t counted = 0;
    for (auto* p : m.network().parameters()) counted += p->value.size();
    const auto& tr = m.network().last_trace();
    if (tr.temporal.empty() || tr.pooled.empty() || tr.flattened.empty()) return {false, "no forward trace"};
    const std::size_t temporal = tr.temporal.back();
    const std::size_t pooled = tr.pooled.back();
    ok = ok && counted == want && m.spec().parameter_count() == want && temporal == 726 && pooled == 44 &&
         tr.flattened.back() == 40 * 44;
    os << to_string(task) << ": " << counted << " parameters, widths " << temporal << "/" << pooled << "; ";
  }
  return {ok, os.str()};
}

Outcome ac5() {
  nn::Tensor<double> z({6, 4}, 0.0);
  const std::size_t targets[] = {0, 1, 2, 3, 1, 2};
  const auto r = nn::softmax_cross_entropy(z, targets);
  nn::Tape<double> tape;
  const auto loss = nn::softmax_cross_entropy(tape, tape.constant(z), targets);
  const double taped = tape.value(loss)[0];
  const double d = std::max(std::abs(r.loss - std::log(4.0)), std::abs(taped - std::log(4.0)));
  return {d <= 1e-6, fmt("loss %.9f (ln 4 = %.9f)", r.loss, std::log(4.0))};
}

bool disjoint_cover(const std::vector<const std::vector<std::size_t>*>& parts, std::size_t n) {
  std::vector<int> seen(n, 0);
  for (auto* p : parts)
    for (auto i : *p) {
      if (i >= n || seen[i]++) return false;
    }
  return std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; });
}

Outcome ac6() {
  const std::size_t n = 4800;
  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = i % 4;
  bool sizes = true, split_ok = true, fold_ok = true;
  std::size_t worst_spread = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto s = train::split_identification(n, seed);
    sizes = sizes && s.train.size() == 3360 && s.val.size() == 480 && s.test.size() == 960;
    split_ok = split_ok && disjoint_cover({&s.train, &s.val, &s.test}, n);

    // 5-fold plan over a smaller uneven label set.
    const std::size_t m = 200 + seed;
    std::vector<std::size_t> l(m);
    CounterRng rng(seed);
    for (auto& v : l) v = rng.below(4);
    std::map<std::size_t, std::size_t> per_label;
    for (auto v : l) ++per_label[v];
    if (std::any_of(per_label.begin(), per_label.end(), [](auto& kv) { return kv.second < 5; })) continue;
    const auto plan = train::kfold(l, 5, seed);
    std::vector<const std::vector<std::size_t>*> tests;
    for (const auto& f : plan.folds) {
      fold_ok = fold_ok && disjoint_cover({&f.train, &f.val, &f.test}, m);
      tests.push_back(&f.test);
    }
    fold_ok = fold_ok && disjoint_cover(tests, m);
    for (const auto& [label, count] : per_label) {
      std::size_t lo = m, hi = 0;
      for (const auto& f : plan.folds) {
        std::size_t c = 0;
        for (auto i : f.test) c += l[i] == label;
        lo = std::min(lo, c);
        hi = std::max(hi, c);
      }
      worst_spread = std::max(worst_spread, hi - lo);
    }
  }
  const bool ok = sizes && split_ok && fold_ok && worst_spread <= 1;
  return {ok, fmt("4800 -> 3360/480/960 %s, splits %s, folds %s, worst per-label fold spread %zu",
                  sizes ? "yes" : "no", split_ok ? "ok" : "broken", fold_ok ? "ok" : "broken", worst_spread)};
}

Outcome ac7() {
  auto cfg = synth::preset("easy");
  cfg.seed = 7;
  cfg.n_subjects = 2;
  cfg.n_trials_per_label = 4;
  cfg.paradigms = {eeg::Paradigm::MI};
  signal::PrepConfig pc;
  pc.factor = 1.0;
  const auto data = signal::preprocess(synth::generate_epochs(cfg), pc);
  const auto plan = train::split_identification(data.size(), 5);
  std::vector<const eeg::Epoch*> tr, va;
  for (auto i : plan.train) tr.push_back(&data[i]);
  for (auto i : plan.val) va.push_back(&data[i]);

  train::Hyperparams hp;
  hp.epochs = 3;
  hp.batch_size = 8;
  hp.seed = 99;
  auto run = [&] {
    auto m = decoder::build(decoder::ModelSpec::for_task(decoder::Task::identification), decoder::Task::identification, 17);
    const auto r = train::train(m, tr, va, hp);
    return std::pair{r.history, nn::encode_checkpoint(m.network().state_dict())};
  };
  const auto [ha, ca] = run();
  const auto [hb, cb] = run();
  bool same = ha.size() == hb.size();
  for (std::size_t i = 0; same && i < ha.size(); ++i) {
    same = std::memcmp(&ha[i].train_loss, &hb[i].train_loss, sizeof(double)) == 0 &&
           std::memcmp(&ha[i].val_loss, &hb[i].val_loss, sizeof(double)) == 0 &&
           ha[i].val_accuracy == hb[i].val_accuracy;
  }
  same = same && ca == cb;
  return {same, fmt("%zu epochs, checkpoint %zu bytes, %s", ha.size(), ca.size(), same ? "bit-identical" : "differ")};
}

std::vector<eeg::Epoch> gate_data(bool noise_only) {
  auto cfg = synth::preset("easy");
  cfg.seed = 42;
  cfg.n_trials_per_label = 10;
  if (noise_only) cfg.snr_db = -std::numeric_limits<double>::infinity();
  signal::PrepConfig pc;
  pc.factor = 1.0;  // synthetic data is already in microvolts
  return signal::preprocess(synth::generate_epochs(cfg), pc);
}

train::ExperimentOptions gate_options() {
  train::ExperimentOptions o;
  o.hp.epochs = 20;
  o.hp.seed = 42;
  return o;
}

Outcome ac8() {
  const auto t0 = Clock::now();
  const auto data = gate_data(false);
  const auto r = train::run_identification_experiment(std::span<const eeg::Epoch>(data), gate_options());
  const double secs = seconds_since(t0);
  const double mean = r.table.grand_mean();
  std::fputs(r.table.to_text().c_str(), stderr);
  return {mean >= 0.95 && secs < 1800.0, fmt("grand mean subject recall %.4f, %.0f s", mean, secs)};
}

Outcome ac9() {
  const auto t0 = Clock::now();
  const auto data = gate_data(false);
  const auto r = train::run_intention_experiment(std::span<const eeg::Epoch>(data), gate_options());
  std::fputs(r.table.to_text().c_str(), stderr);
  const auto noise = gate_data(true);
  const auto c = train::run_intention_experiment(std::span<const eeg::Epoch>(noise), gate_options());
  std::fputs(c.table.to_text().c_str(), stderr);
  const double mean = r.table.grand_mean(), chance = c.table.grand_mean();
  const bool ok = mean >= 0.80 && std::abs(chance - 0.25) <= 0.08;
  return {ok, fmt("mean accuracy %.4f, noise-only %.4f, %.0f s", mean, chance, seconds_since(t0))};
}

Outcome ac10() {
  using dispatch::ApiRegistry;
  using dispatch::Parameters;
  using dispatch::PreferenceStore;
  ApiRegistry reg;
  reg.set(eeg::ImageryLabel::apple, {"order_fruit", {{"delivery", "morning"}, {"qty", "1"}}});
  reg.set(eeg::ImageryLabel::star, {"play_music", {{"genre", "pop"}, {"volume", "5"}}});
  reg.set(eeg::ImageryLabel::clover, {"open_garden_log", {}});
  reg.set(eeg::ImageryLabel::snowman, {"set_thermostat", {{"celsius", "21"}}});
  PreferenceStore store;
  for (int s = 1; s <= 8; ++s) {
    if (s % 2 == 0) store.set(eeg::SubjectId(s), "delivery", "evening-" + std::to_string(s));
    if (s % 3 == 0) store.set(eeg::SubjectId(s), "genre", "jazz");
    if (s == 5) store.set(eeg::SubjectId(s), "unrelated", "x");
  }
  CounterRng rng(1);
  const auto epoch = testing::random_epoch(rng, 2, 4);
  auto expected = [&](int s, eeg::ImageryLabel l) {
    Parameters p = reg.at(l).defaults;
    const auto& mine = store.of(eeg::SubjectId(s));
    for (auto& [k, v] : p)
      if (auto it = mine.find(k); it != mine.end()) v = it->second;
    return p;
  };

  std::size_t combos = 0, mismatches = 0, abstain_checks = 0, abstain_errors = 0;
  const double margins[] = {0.0, 0.5, 1.5, 3.0, 8.0};
  const double taus[] = {0.0, 0.2, 0.5, 0.8, 0.99, 1.0};
  for (int s = 1; s <= 8; ++s) {
    for (auto l : eeg::kAllLabels) {
      ++combos;
      const testing::FixedLogits f(decoder::Task::identification, testing::peaked(8, s - 1, 8.0));
      const testing::FixedLogits g(decoder::Task::intention, testing::peaked(4, eeg::ordinal(l), 8.0));
      const auto a = dispatch::dispatch(f, g, store, reg, epoch, 0.5);
      const Parameters expect = expected(s, l);
      if (a.abstained || a.subject != eeg::SubjectId(s) || a.intent != l || a.action_name != reg.at(l).action_name ||
          a.parameters != expect) {
        ++mismatches;
      }
      for (double mf : margins) {
        for (double mg : margins) {
          const double cf = std::exp(mf) / (std::exp(mf) + 7.0);
          const double cg = std::exp(mg) / (std::exp(mg) + 3.0);
          const testing::FixedLogits f2(decoder::Task::identification, testing::peaked(8, s - 1, mf));
          const testing::FixedLogits g2(decoder::Task::intention, testing::peaked(4, eeg::ordinal(l), mg));
          for (double tau : taus) {
            ++abstain_checks;
            const auto b = dispatch::dispatch(f2, g2, store, reg, epoch, tau);
            const double lo = std::min(cf, cg);
            // Skip values within rounding of the threshold.
            if (std::abs(lo - tau) < 1e-12) continue;
            if (b.abstained != (lo < tau)) ++abstain_errors;
            // A zero margin is a tie, resolved to the lowest index.
            const int ws = mf > 0.0 ? s : 1;
            const auto wl = mg > 0.0 ? l : eeg::ImageryLabel::apple;
            if (!b.abstained && (b.subject != eeg::SubjectId(ws) || b.intent != wl || b.parameters != expected(ws, wl)))
              ++abstain_errors;
          }
        }
      }
    }
  }
  return {combos == 32 && mismatches == 0 && abstain_errors == 0,
          fmt("%zu combinations, %zu mismatches; %zu threshold cases, %zu wrong", combos, mismatches, abstain_checks,
              abstain_errors)};
}

Outcome ac11() {
  testing::TempDir dir("accept_io");
  CounterRng rng(11);
  std::size_t identical = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t c = 1 + rng.below(32), t = 1 + rng.below(800);
    auto e = testing::random_epoch(rng, c, t, 1 + static_cast<int>(rng.below(8)),
                                   eeg::paradigm_from_ordinal(rng.below(3)), eeg::label_from_ordinal(rng.below(4)),
                                   std::pow(10.0, 6.0 * rng.uniform() - 3.0));
    const auto path = dir / ("e" + std::to_string(i % 50) + ".eegd");
    eeg::write_epoch(e, path);
    const auto back = eeg::read_epoch(path);
    const auto a = e.data.values();
    const auto b = back.data.values();
    if (back.subject == e.subject && back.paradigm == e.paradigm && back.label == e.label && a.size() == b.size() &&
        std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0) {
      ++identical;
    }
  }
  CounterRng r2(12);
  const auto bytes = eeg::encode_epoch(testing::random_epoch(r2, 4, 50));
  std::size_t rejected = 0, tried = 0;
  for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{15}, std::size_t{16}, bytes.size() - 1}) {
    ++tried;
    try {
      (void)eeg::decode_epoch(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + cut));
    } catch (const std::runtime_error&) {
      ++rejected;
    }
  }
  for (std::size_t pos = 0; pos < 4; ++pos) {
    ++tried;
    auto bad = bytes;
    bad[pos] ^= 0x20;
    try {
      (void)eeg::decode_epoch(bad);
    } catch (const std::runtime_error&) {
      ++rejected;
    }
  }
  return {identical == 1000 && rejected == tried,
          fmt("%zu/1000 bit-identical, %zu/%zu damaged images rejected", identical, rejected, tried)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria = {ac1, ac2, ac3, ac4, ac5, ac6, ac7, ac8, ac9, ac10, ac11};
  std::vector<std::size_t> which;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      const long n = std::strtol(argv[++i], nullptr, 10);
      if (n < 1 || n > static_cast<long>(criteria.size())) {
        std::fprintf(stderr, "no criterion %ld\n", n);
        return 2;
      }
      which.push_back(static_cast<std::size_t>(n));
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]...\n", argv[0]);
      return 2;
    }
  }
  if (which.empty()) {
    which.resize(criteria.size());
    std::iota(which.begin(), which.end(), std::size_t{1});
  }
  int failed = 0;
  for (auto n : which) {
    Outcome o;
    try {
      o = criteria[n - 1]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s AC%zu %s\n", o.pass ? "PASS" : "FAIL", n, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
