#include "frmom/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "frmom/errors.hpp"

namespace frmom::objectives {

struct MlpModel::Pass {
  // activations[0] is the input; activations[l + 1] is the output of layer l
  // (post-nonlinearity for hidden layers, logits for the last one).
  std::vector<Vector> activations;
};

MlpModel::MlpModel(std::vector<std::size_t> widths, Activation activation)
    : widths_(std::move(widths)), activation_(activation) {
  if (widths_.size() < 2) throw DomainError("MlpModel: need at least input and output widths");
  if (std::any_of(widths_.begin(), widths_.end(), [](std::size_t w) { return w == 0; })) {
    throw DomainError("MlpModel: layer widths must be positive");
  }
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    offsets_.push_back(parameter_count_);
    parameter_count_ += widths_[l] * widths_[l + 1] + widths_[l + 1];
  }
}

Vector MlpModel::initial_parameters(Rng& rng) const {
  Vector w(parameter_count_);
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(widths_[l]));
    const std::size_t count = widths_[l] * widths_[l + 1] + widths_[l + 1];
    for (std::size_t k = 0; k < count; ++k) w[offsets_[l] + k] = rng.uniform(-bound, bound);
  }
  return w;
}

void MlpModel::check(std::span<const double> w, std::span<const double> x,
                     std::size_t label) const {
  if (w.size() != parameter_count_) {
    std::ostringstream os;
    os << "MlpModel: expected " << parameter_count_ << " parameters, got " << w.size();
    throw DimensionError(os.str());
  }
  if (x.size() != input_dim()) {
    std::ostringstream os;
    os << "MlpModel: expected input of size " << input_dim() << ", got " << x.size();
    throw DimensionError(os.str());
  }
  if (label >= num_classes()) throw DomainError("MlpModel: label out of range");
}

void MlpModel::forward(std::span<const double> w, std::span<const double> x, Pass& pass) const {
  const std::size_t layers = widths_.size() - 1;
  pass.activations.resize(layers + 1);
  pass.activations[0].assign(x.begin(), x.end());
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = widths_[l];
    const std::size_t out = widths_[l + 1];
    const double* weights = w.data() + offsets_[l];
    const double* bias = weights + in * out;
    const Vector& a = pass.activations[l];
    Vector& z = pass.activations[l + 1];
    z.assign(out, 0.0);
    for (std::size_t i = 0; i < out; ++i) {
      double sum = bias[i];
      const double* row = weights + i * in;
      for (std::size_t j = 0; j < in; ++j) sum += row[j] * a[j];
      z[i] = sum;
    }
    if (l + 1 < layers) {
      for (double& v : z) v = activation_ == Activation::tanh ? std::tanh(v) : std::max(0.0, v);
    }
  }
}

double MlpModel::backward(std::span<const double> w, Pass& pass, std::size_t label,
                          std::span<double> param_grad, std::span<double> input_grad) const {
  const std::size_t layers = widths_.size() - 1;
  const Vector& logits = pass.activations[layers];
  const double peak = *std::max_element(logits.begin(), logits.end());
  double sum_exp = 0.0;
  for (double z : logits) sum_exp += std::exp(z - peak);
  const double log_sum_exp = peak + std::log(sum_exp);
  const double loss = log_sum_exp - logits[label];

  Vector delta(logits.size());
  for (std::size_t k = 0; k < logits.size(); ++k) delta[k] = std::exp(logits[k] - log_sum_exp);
  delta[label] -= 1.0;

  for (std::size_t l = layers; l-- > 0;) {
    const std::size_t in = widths_[l];
    const std::size_t out = widths_[l + 1];
    const double* weights = w.data() + offsets_[l];
    const Vector& a = pass.activations[l];
    if (!param_grad.empty()) {
      double* gw = param_grad.data() + offsets_[l];
      double* gb = gw + in * out;
      for (std::size_t i = 0; i < out; ++i) {
        double* grow = gw + i * in;
        for (std::size_t j = 0; j < in; ++j) grow[j] += delta[i] * a[j];
        gb[i] += delta[i];
      }
    }
    if (l == 0 && input_grad.empty()) break;
    Vector prev(in, 0.0);
    for (std::size_t i = 0; i < out; ++i) {
      const double* row = weights + i * in;
      for (std::size_t j = 0; j < in; ++j) prev[j] += row[j] * delta[i];
    }
    if (l == 0) {
      std::copy(prev.begin(), prev.end(), input_grad.begin());
      break;
    }
    // a is the post-activation output of layer l - 1.
    for (std::size_t j = 0; j < in; ++j) {
      prev[j] *= activation_ == Activation::tanh ? 1.0 - a[j] * a[j] : (a[j] > 0.0 ? 1.0 : 0.0);
    }
    delta = std::move(prev);
  }
  return loss;
}

Vector MlpModel::logits(std::span<const double> w, std::span<const double> x) const {
  check(w, x, 0);
  Pass pass;
  forward(w, x, pass);
  return pass.activations.back();
}

std::size_t MlpModel::predict(std::span<const double> w, std::span<const double> x) const {
  const Vector z = logits(w, x);
  return static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
}

double MlpModel::sample_loss(std::span<const double> w, std::span<const double> x,
                             std::size_t label) const {
  check(w, x, label);
  Pass pass;
  forward(w, x, pass);
  const Vector& z = pass.activations.back();
  const double peak = *std::max_element(z.begin(), z.end());
  double sum_exp = 0.0;
  for (double v : z) sum_exp += std::exp(v - peak);
  return peak + std::log(sum_exp) - z[label];
}

LossAndGradient MlpModel::loss_and_gradient(std::span<const double> w, std::span<const double> x,
                                            std::size_t label) const {
  check(w, x, label);
  Pass pass;
  forward(w, x, pass);
  LossAndGradient out{0.0, Vector(parameter_count_, 0.0)};
  out.loss = backward(w, pass, label, out.gradient, {});
  return out;
}

LossAndGradient MlpModel::loss_and_input_gradient(std::span<const double> w,
                                                  std::span<const double> x,
                                                  std::size_t label) const {
  check(w, x, label);
  Pass pass;
  forward(w, x, pass);
  LossAndGradient out{0.0, Vector(input_dim(), 0.0)};
  out.loss = backward(w, pass, label, {}, out.gradient);
  return out;
}

LossAndGradient mlp_loss_and_gradient(const MlpModel& model, std::span<const double> w,
                                      const LabeledDataset& data,
                                      std::span<const std::size_t> batch) {
  if (w.size() != model.parameter_count()) {
    std::ostringstream os;
    os << "mlp_loss_and_gradient: expected " << model.parameter_count() << " parameters, got "
       << w.size();
    throw DimensionError(os.str());
  }
  if (batch.empty()) throw DomainError("mlp_loss_and_gradient: empty batch");
  LossAndGradient total{0.0, Vector(model.parameter_count(), 0.0)};
  for (std::size_t index : batch) {
    if (index >= data.size()) throw DomainError("mlp_loss_and_gradient: index out of range");
    const auto sample = model.loss_and_gradient(w, data.inputs[index], data.labels[index]);
    total.loss += sample.loss;
    linalg::axpy(1.0, sample.gradient, total.gradient);
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  total.loss *= inv;
  for (double& g : total.gradient) g *= inv;
  return total;
}

double mlp_dataset_loss(const MlpModel& model, std::span<const double> w,
                        const LabeledDataset& data) {
  double sum = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    sum += model.sample_loss(w, data.inputs[i], data.labels[i]);
  }
  return sum / static_cast<double>(data.size());
}

double classification_accuracy(const MlpModel& model, std::span<const double> w,
                               const LabeledDataset& data) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (model.predict(w, data.inputs[i]) == data.labels[i]) ++correct;
  }
  return data.size() == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(data.size());
}

MlpObjective::MlpObjective(std::shared_ptr<const MlpModel> model,
                           std::shared_ptr<const LabeledDataset> data)
    : model_(std::move(model)), data_(std::move(data)) {
  data_->validate();
  if (data_->size() == 0) throw DomainError("MlpObjective: empty dataset");
  if (data_->feature_dim() != model_->input_dim()) {
    throw DimensionError("MlpObjective: dataset features do not match the model input width");
  }
}

double MlpObjective::value_at(std::span<const double> w, std::size_t index) const {
  return model_->sample_loss(w, data_->inputs.at(index), data_->labels.at(index));
}

Vector MlpObjective::gradient_at(std::span<const double> w, std::size_t index) const {
  return model_->loss_and_gradient(w, data_->inputs.at(index), data_->labels.at(index)).gradient;
}

LossAndGradient MlpObjective::batch_value_and_gradient(std::span<const double> w,
                                                       std::span<const std::size_t> batch) const {
  return mlp_loss_and_gradient(*model_, w, *data_, batch);
}

}  // namespace frmom::objectives
