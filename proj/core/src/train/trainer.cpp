#include "pbci/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "pbci/common/random.hpp"
#include "pbci/nn/ops.hpp"
#include "pbci/nn/tape.hpp"

namespace pbci::train {

void Hyperparams::validate() const {
  if (!(lr > 0.0)) throw std::invalid_argument("lr must be positive");
  if (!(weight_decay >= 0.0)) throw std::invalid_argument("weight_decay must be non-negative");
  if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("betas must lie in [0, 1)");
  }
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (epochs == 0) throw std::invalid_argument("epochs must be >= 1");
}

nn::AdamConfig Hyperparams::adam() const {
  nn::AdamConfig c;
  c.lr = lr;
  c.beta1 = beta1;
  c.beta2 = beta2;
  c.eps = eps;
  c.weight_decay = weight_decay;
  c.decoupled_weight_decay = decoupled_weight_decay;
  return c;
}

std::vector<std::string> Hyperparams::describe() const {
  auto fmt = [](const char* key, auto v) {
    std::ostringstream os;
    os << key << "=" << v;
    return os.str();
  };
  return {fmt("lr", lr),
          fmt("weight_decay", weight_decay),
          fmt("weight_decay_mode", decoupled_weight_decay ? "decoupled" : "l2"),
          fmt("batch_size", batch_size),
          fmt("beta1", beta1),
          fmt("beta2", beta2),
          fmt("eps", eps),
          fmt("epochs", epochs),
          fmt("seed", seed)};
}

LossAccuracy loss_and_accuracy(const decoder::EpochClassifier& model, std::span<const eeg::Epoch* const> epochs) {
  LossAccuracy out;
  if (epochs.empty()) return out;
  const auto logits = model.logits_batch(epochs);
  double loss = 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < epochs.size(); ++i) {
    const std::size_t t = target_of(*epochs[i], model.task());
    const auto& z = logits[i];
    const double zmax = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (double v : z) s += std::exp(v - zmax);
    loss += std::log(s) + zmax - z.at(t);
    if (decoder::prediction_from_logits(z).label == t) ++correct;
  }
  out.loss = loss / static_cast<double>(epochs.size());
  out.accuracy = static_cast<double>(correct) / static_cast<double>(epochs.size());
  return out;
}

TrainResult train(decoder::TrainedModel& model, std::span<const eeg::Epoch* const> train_set,
                  std::span<const eeg::Epoch* const> val_set, const Hyperparams& hp, const EpochCallback& on_epoch) {
  hp.validate();
  if (train_set.empty()) throw std::invalid_argument("empty train set");
  const auto& spec = model.spec();
  for (auto set : {train_set, val_set}) {
    for (const eeg::Epoch* e : set) {
      if (e->channels() != spec.n_channels || e->samples() != spec.n_samples) {
        throw std::invalid_argument("geometry mismatch: model expects " + std::to_string(spec.n_channels) + "x" +
                                    std::to_string(spec.n_samples) + ", epoch is " +
                                    std::to_string(e->channels()) + "x" + std::to_string(e->samples()));
      }
      if (target_of(*e, model.task()) >= spec.n_outputs) {
        throw std::invalid_argument("class index outside model outputs");
      }
    }
  }

  auto& net = model.network();
  nn::Adam<float> adam(net.parameters(), hp.adam());
  const CounterRng root(derive_key(hp.seed, {0x7EA1}));

  std::vector<std::size_t> order(train_set.size());
  std::vector<const eeg::Epoch*> batch;
  std::vector<std::size_t> targets;

  TrainResult result;
  std::vector<nn::NamedTensor> best_state;
  double best_acc = -1.0;
  double best_loss = 0.0;
  std::uint64_t step = 0;

  for (std::size_t epoch = 1; epoch <= hp.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    CounterRng shuffle_rng = root.substream({0x5, epoch});
    shuffle_rng.shuffle(order.begin(), order.end());

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += hp.batch_size) {
      const std::size_t stop = std::min(order.size(), start + hp.batch_size);
      batch.clear();
      targets.clear();
      for (std::size_t i = start; i < stop; ++i) {
        batch.push_back(train_set[order[i]]);
        targets.push_back(target_of(*train_set[order[i]], model.task()));
      }
      nn::Tape<float> tape;
      const nn::Var logits =
          net.forward(tape, decoder::make_batch<float>(batch), nn::Mode::train, root.substream({0xD, ++step}));
      const nn::Var loss = nn::softmax_cross_entropy(tape, logits, targets);
      tape.backward(loss);
      adam.step();
      loss_sum += static_cast<double>(tape.value(loss).data()[0]) * static_cast<double>(batch.size());
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(order.size());
    const auto val = loss_and_accuracy(model, val_set);
    stats.val_loss = val.loss;
    stats.val_accuracy = val.accuracy;
    result.history.push_back(stats);
    if (on_epoch) on_epoch(stats);

    const bool better = val_set.empty() || best_acc < 0.0 || stats.val_accuracy > best_acc ||
                        (stats.val_accuracy == best_acc && stats.val_loss < best_loss);
    if (better) {
      best_acc = stats.val_accuracy;
      best_loss = stats.val_loss;
      result.best_epoch = epoch;
      best_state = net.state_dict();
    }
  }
  net.load_state_dict(best_state);
  return result;
}

}  // namespace pbci::train
