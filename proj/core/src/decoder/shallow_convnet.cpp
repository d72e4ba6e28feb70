#include "pbci/decoder/shallow_convnet.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pbci::decoder {

std::string_view to_string(Task task) noexcept {
  return task == Task::identification ? "identification" : "intention";
}

std::optional<Task> parse_task(std::string_view s) noexcept {
  if (s == "identification" || s == "id") return Task::identification;
  if (s == "intention" || s == "intent") return Task::intention;
  return std::nullopt;
}

ModelSpec ModelSpec::for_task(Task task) {
  ModelSpec s;
  s.n_outputs = task == Task::identification ? static_cast<std::size_t>(eeg::kCanonicalSubjects)
                                             : eeg::kAllLabels.size();
  return s;
}

void ModelSpec::validate() const {
  if (n_channels == 0 || n_samples == 0 || n_outputs == 0 || temporal_filters == 0 || temporal_kernel == 0 ||
      spatial_filters == 0 || pool_kernel == 0 || pool_stride == 0) {
    throw std::invalid_argument("model spec: all sizes must be positive");
  }
  if (n_samples <= temporal_kernel) {
    throw std::invalid_argument("model spec: n_samples must exceed temporal_kernel");
  }
  if (temporal_width() < pool_kernel) {
    throw std::invalid_argument("model spec: pooled width would be empty");
  }
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) throw std::invalid_argument("model spec: dropout_p in [0,1)");
  if (!(log_clamp > 0.0)) throw std::invalid_argument("model spec: log_clamp must be positive");
}

std::size_t ModelSpec::parameter_count() const noexcept {
  const std::size_t temporal = temporal_filters * temporal_kernel + temporal_filters;
  const std::size_t spatial = spatial_filters * temporal_filters * n_channels;
  const std::size_t bn = 2 * spatial_filters;
  const std::size_t dense = flatten_size() * n_outputs + n_outputs;
  return temporal + spatial + bn + dense;
}

namespace {

template <class T>
nn::Tensor<T> glorot_uniform(nn::Shape shape, std::size_t fan_in, std::size_t fan_out, CounterRng rng) {
  nn::Tensor<T> t(std::move(shape));
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (T& v : t.values()) v = static_cast<T>(rng.uniform(-limit, limit));
  return t;
}

}  // namespace

template <class T>
ShallowConvNet<T>::ShallowConvNet(ModelSpec spec, std::uint64_t seed)
    : spec_(spec), bn_state_(spec.spatial_filters) {
  spec_.validate();
  const CounterRng root(seed);
  const auto& s = spec_;
  params_[kTemporalWeight] = nn::Parameter<T>(
      "temporal.weight", glorot_uniform<T>({s.temporal_filters, 1, 1, s.temporal_kernel}, s.temporal_kernel,
                                           s.temporal_filters * s.temporal_kernel, root.substream({1})));
  params_[kTemporalBias] = nn::Parameter<T>("temporal.bias", nn::Tensor<T>({s.temporal_filters}));
  params_[kSpatialWeight] = nn::Parameter<T>(
      "spatial.weight",
      glorot_uniform<T>({s.spatial_filters, s.temporal_filters, s.n_channels, 1}, s.temporal_filters * s.n_channels,
                        s.spatial_filters * s.n_channels, root.substream({2})));
  params_[kBnGamma] = nn::Parameter<T>("bn.gamma", nn::Tensor<T>({s.spatial_filters}, T{1}));
  params_[kBnBeta] = nn::Parameter<T>("bn.beta", nn::Tensor<T>({s.spatial_filters}));
  params_[kDenseWeight] = nn::Parameter<T>(
      "classifier.weight",
      glorot_uniform<T>({s.n_outputs, s.flatten_size()}, s.flatten_size(), s.n_outputs, root.substream({3})));
  params_[kDenseBias] = nn::Parameter<T>("classifier.bias", nn::Tensor<T>({s.n_outputs}));
}

template <class T>
nn::Var ShallowConvNet<T>::run(nn::Tape<T>& tape, const nn::Tensor<T>& batch, nn::Mode mode,
                               CounterRng dropout_stream, const Binder& bind, nn::BatchNormState<T>& stats,
                               ForwardTrace& trace) const {
  const auto& s = spec_;
  if (batch.rank() != 3 || batch.dim(1) != s.n_channels || batch.dim(2) != s.n_samples) {
    throw std::invalid_argument("geometry mismatch: expected [N," + std::to_string(s.n_channels) + "," +
                                std::to_string(s.n_samples) + "], got " + nn::shape_string(batch.shape()));
  }
  const std::size_t n = batch.dim(0);
  if (n == 0) throw std::invalid_argument("empty batch");

  nn::Var x = tape.constant(batch.reshaped({n, 1, s.n_channels, s.n_samples}));
  if (fused_front_end_) {
    x = nn::factorized_conv(tape, x, bind(kTemporalWeight), bind(kTemporalBias), bind(kSpatialWeight));
    trace.temporal = {n, s.temporal_filters, s.n_channels, s.temporal_width()};
  } else {
    x = nn::conv2d(tape, x, bind(kTemporalWeight), bind(kTemporalBias));
    trace.temporal = tape.value(x).shape();
    x = nn::conv2d(tape, x, bind(kSpatialWeight), std::nullopt);
  }
  trace.spatial = tape.value(x).shape();
  x = nn::batchnorm(tape, x, bind(kBnGamma), bind(kBnBeta), stats, mode, s.bn_momentum, s.bn_eps);
  x = nn::square(tape, x);
  x = nn::avg_pool(tape, x, s.pool_kernel, s.pool_stride);
  trace.pooled = tape.value(x).shape();
  x = nn::log_clamped(tape, x, s.log_clamp);
  x = nn::dropout(tape, x, s.dropout_p, mode, dropout_stream);
  x = nn::reshape(tape, x, {n, s.flatten_size()});
  trace.flattened = tape.value(x).shape();
  x = nn::dense(tape, x, bind(kDenseWeight), bind(kDenseBias));
  trace.logits = tape.value(x).shape();
  return x;
}

template <class T>
nn::Var ShallowConvNet<T>::forward(nn::Tape<T>& tape, const nn::Tensor<T>& batch, nn::Mode mode,
                                   CounterRng dropout_stream) {
  const Binder bind = [&](std::size_t slot) { return tape.parameter(params_[slot]); };
  return run(tape, batch, mode, dropout_stream, bind, bn_state_, trace_);
}

template <class T>
nn::Tensor<T> ShallowConvNet<T>::predict_logits(const nn::Tensor<T>& batch) const {
  nn::Tape<T> tape;
  const Binder bind = [&](std::size_t slot) { return tape.constant(params_[slot].value); };
  auto stats = bn_state_;  // eval mode reads, never writes
  ForwardTrace trace;
  const nn::Var out = run(tape, batch, nn::Mode::eval, CounterRng(0), bind, stats, trace);
  return tape.value(out);
}

template <class T>
std::vector<nn::Parameter<T>*> ShallowConvNet<T>::parameters() {
  std::vector<nn::Parameter<T>*> out;
  for (auto& p : params_) out.push_back(&p);
  return out;
}

template <class T>
std::size_t ShallowConvNet<T>::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

template <class T>
std::vector<nn::NamedTensor> ShallowConvNet<T>::state_dict() const {
  std::vector<nn::NamedTensor> out;
  for (const auto& p : params_) out.push_back({p.name, p.value.template cast<float>()});
  out.push_back({"bn.running_mean", bn_state_.running_mean.template cast<float>()});
  out.push_back({"bn.running_var", bn_state_.running_var.template cast<float>()});
  return out;
}

template <class T>
void ShallowConvNet<T>::load_state_dict(const std::vector<nn::NamedTensor>& entries) {
  if (entries.size() != params_.size() + 2) {
    throw std::runtime_error("checkpoint holds " + std::to_string(entries.size()) + " entries, expected " +
                             std::to_string(params_.size() + 2));
  }
  auto assign = [](const nn::NamedTensor& e, const std::string& name, nn::Tensor<T>& dst) {
    if (e.name != name) throw std::runtime_error("checkpoint entry '" + e.name + "', expected '" + name + "'");
    if (e.tensor.shape() != dst.shape()) {
      throw std::runtime_error("checkpoint entry '" + name + "' has shape " + nn::shape_string(e.tensor.shape()) +
                               ", expected " + nn::shape_string(dst.shape()));
    }
    dst = e.tensor.template cast<T>();
  };
  for (std::size_t i = 0; i < params_.size(); ++i) {
    assign(entries[i], params_[i].name, params_[i].value);
    params_[i].zero_grad();
  }
  assign(entries[params_.size()], "bn.running_mean", bn_state_.running_mean);
  assign(entries[params_.size() + 1], "bn.running_var", bn_state_.running_var);
}

template <class T>
nn::Tensor<T> make_batch(std::span<const eeg::Epoch* const> epochs) {
  if (epochs.empty()) throw std::invalid_argument("empty batch");
  const std::size_t c = epochs.front()->channels();
  const std::size_t t = epochs.front()->samples();
  nn::Tensor<T> out({epochs.size(), c, t});
  T* dst = out.data();
  for (const eeg::Epoch* e : epochs) {
    if (e->channels() != c || e->samples() != t) throw std::invalid_argument("geometry mismatch within batch");
    for (float v : e->data.values()) *dst++ = static_cast<T>(v);
  }
  return out;
}

template class ShallowConvNet<float>;
template class ShallowConvNet<double>;
template nn::Tensor<float> make_batch<float>(std::span<const eeg::Epoch* const>);
template nn::Tensor<double> make_batch<double>(std::span<const eeg::Epoch* const>);

}  // namespace pbci::decoder
