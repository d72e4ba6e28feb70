#include "pbci/decoder/model.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "pbci/nn/checkpoint.hpp"

namespace pbci::decoder {
namespace {

constexpr std::size_t kEvalChunk = 64;

nlohmann::json spec_to_json(const ModelSpec& s) {
  return {{"n_channels", s.n_channels},
          {"n_samples", s.n_samples},
          {"n_outputs", s.n_outputs},
          {"temporal_filters", s.temporal_filters},
          {"temporal_kernel", s.temporal_kernel},
          {"spatial_filters", s.spatial_filters},
          {"pool_kernel", s.pool_kernel},
          {"pool_stride", s.pool_stride},
          {"dropout_p", s.dropout_p},
          {"log_clamp", s.log_clamp},
          {"bn_momentum", s.bn_momentum},
          {"bn_eps", s.bn_eps}};
}

ModelSpec spec_from_json(const nlohmann::json& j) {
  ModelSpec s;
  s.n_channels = j.at("n_channels").get<std::size_t>();
  s.n_samples = j.at("n_samples").get<std::size_t>();
  s.n_outputs = j.at("n_outputs").get<std::size_t>();
  s.temporal_filters = j.at("temporal_filters").get<std::size_t>();
  s.temporal_kernel = j.at("temporal_kernel").get<std::size_t>();
  s.spatial_filters = j.at("spatial_filters").get<std::size_t>();
  s.pool_kernel = j.at("pool_kernel").get<std::size_t>();
  s.pool_stride = j.at("pool_stride").get<std::size_t>();
  s.dropout_p = j.at("dropout_p").get<double>();
  s.log_clamp = j.at("log_clamp").get<double>();
  s.bn_momentum = j.at("bn_momentum").get<double>();
  s.bn_eps = j.at("bn_eps").get<double>();
  return s;
}

}  // namespace

std::vector<std::vector<double>> EpochClassifier::logits_batch(std::span<const eeg::Epoch* const> epochs) const {
  std::vector<std::vector<double>> out;
  out.reserve(epochs.size());
  for (const eeg::Epoch* e : epochs) out.push_back(logits(*e));
  return out;
}

Prediction prediction_from_logits(std::span<const double> logits) {
  if (logits.empty()) throw std::invalid_argument("empty logits");
  Prediction p;
  p.confidence = nn::softmax(logits);
  // max_element returns the first maximum.
  p.label = static_cast<std::size_t>(std::max_element(logits.begin(), logits.end()) - logits.begin());
  return p;
}

Prediction predict(const EpochClassifier& model, const eeg::Epoch& epoch) {
  const auto l = model.logits(epoch);
  return prediction_from_logits(l);
}

TrainedModel::TrainedModel(ModelSpec spec, Task task, std::uint64_t seed) : task_(task), net_(spec, seed) {}

void TrainedModel::check_geometry(const eeg::Epoch& epoch) const {
  if (epoch.channels() != spec().n_channels || epoch.samples() != spec().n_samples) {
    throw std::invalid_argument("geometry mismatch: model expects " + std::to_string(spec().n_channels) + "x" +
                                std::to_string(spec().n_samples) + ", epoch is " +
                                std::to_string(epoch.channels()) + "x" + std::to_string(epoch.samples()));
  }
}

std::vector<double> TrainedModel::logits(const eeg::Epoch& epoch) const {
  const eeg::Epoch* one[] = {&epoch};
  return logits_batch(one).front();
}

std::vector<std::vector<double>> TrainedModel::logits_batch(std::span<const eeg::Epoch* const> epochs) const {
  for (const eeg::Epoch* e : epochs) check_geometry(*e);
  std::vector<std::vector<double>> out;
  out.reserve(epochs.size());
  const std::size_t k = n_outputs();
  for (std::size_t start = 0; start < epochs.size(); start += kEvalChunk) {
    const auto chunk = epochs.subspan(start, std::min(kEvalChunk, epochs.size() - start));
    const auto y = net_.predict_logits(make_batch<float>(chunk));
    for (std::size_t n = 0; n < chunk.size(); ++n) {
      out.emplace_back(y.data() + n * k, y.data() + (n + 1) * k);
    }
  }
  return out;
}

std::filesystem::path TrainedModel::sidecar_path(const std::filesystem::path& checkpoint) {
  auto p = checkpoint;
  p += ".json";
  return p;
}

void TrainedModel::save(const std::filesystem::path& path) const {
  nn::write_checkpoint(net_.state_dict(), path);
  const nlohmann::json sidecar = {
      {"format", "pbci-model"}, {"version", 1}, {"task", std::string(to_string(task_))}, {"spec", spec_to_json(spec())}};
  std::ofstream out(sidecar_path(path), std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + sidecar_path(path).string());
  out << sidecar.dump(2) << "\n";
}

TrainedModel TrainedModel::load(const std::filesystem::path& path) {
  std::ifstream in(sidecar_path(path));
  if (!in) throw std::runtime_error("missing model sidecar " + sidecar_path(path).string());
  const auto sidecar = nlohmann::json::parse(in);
  if (sidecar.value("format", "") != "pbci-model") throw std::runtime_error("not a pbci model sidecar");
  const auto task = parse_task(sidecar.at("task").get<std::string>());
  if (!task) throw std::runtime_error("unknown task in sidecar");
  TrainedModel model(spec_from_json(sidecar.at("spec")), *task, 0);
  model.net_.load_state_dict(nn::read_checkpoint(path));
  return model;
}

TrainedModel build(const ModelSpec& spec, Task task, std::uint64_t seed) {
  return TrainedModel(spec, task, seed);
}

}  // namespace pbci::decoder
