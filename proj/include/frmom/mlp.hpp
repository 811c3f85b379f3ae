#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "frmom/dataset.hpp"
#include "frmom/objectives.hpp"

namespace frmom::objectives {

/// A classifier whose loss can be differentiated with respect to its input.
class InputDifferentiableClassifier {
 public:
  virtual ~InputDifferentiableClassifier() = default;
  virtual std::size_t parameter_count() const = 0;
  virtual std::size_t predict(std::span<const double> w, std::span<const double> x) const = 0;
  /// Loss at (x, y) and its gradient with respect to x.
  virtual LossAndGradient loss_and_input_gradient(std::span<const double> w,
                                                  std::span<const double> x,
                                                  std::size_t label) const = 0;
};

enum class Activation { tanh, relu };

/// Fully connected network with softmax cross-entropy on the final layer.
///
/// Parameters are flattened layer by layer as W_l (out x in, row-major)
/// followed by b_l (out). Hidden layers apply `activation`; the last layer
/// emits logits.
class MlpModel final : public InputDifferentiableClassifier {
 public:
  MlpModel(std::vector<std::size_t> widths, Activation activation);

  const std::vector<std::size_t>& widths() const { return widths_; }
  Activation activation() const { return activation_; }
  std::size_t input_dim() const { return widths_.front(); }
  std::size_t num_classes() const { return widths_.back(); }
  std::size_t parameter_count() const override { return parameter_count_; }

  /// Uniform on [-1/sqrt(fan_in), 1/sqrt(fan_in)] for weights and biases.
  Vector initial_parameters(Rng& rng) const;

  Vector logits(std::span<const double> w, std::span<const double> x) const;
  std::size_t predict(std::span<const double> w, std::span<const double> x) const override;
  double sample_loss(std::span<const double> w, std::span<const double> x,
                     std::size_t label) const;

  /// Loss and gradient w.r.t. the parameters for one sample.
  LossAndGradient loss_and_gradient(std::span<const double> w, std::span<const double> x,
                                    std::size_t label) const;
  LossAndGradient loss_and_input_gradient(std::span<const double> w,
                                          std::span<const double> x,
                                          std::size_t label) const override;

 private:
  struct Pass;
  void forward(std::span<const double> w, std::span<const double> x, Pass& pass) const;
  double backward(std::span<const double> w, Pass& pass, std::size_t label,
                  std::span<double> param_grad, std::span<double> input_grad) const;
  void check(std::span<const double> w, std::span<const double> x, std::size_t label) const;

  std::vector<std::size_t> widths_;
  Activation activation_;
  std::size_t parameter_count_ = 0;
  std::vector<std::size_t> offsets_;  // start of W_l in the flat vector
};

/// Mean cross-entropy over `batch` and its exact gradient (manual backprop).
/// Throws DimensionError on a parameter-count mismatch, DomainError on a bad batch.
LossAndGradient mlp_loss_and_gradient(const MlpModel& model, std::span<const double> w,
                                      const LabeledDataset& data,
                                      std::span<const std::size_t> batch);

/// Mean cross-entropy over the whole dataset.
double mlp_dataset_loss(const MlpModel& model, std::span<const double> w,
                        const LabeledDataset& data);

/// Fraction of samples classified correctly.
double classification_accuracy(const MlpModel& model, std::span<const double> w,
                               const LabeledDataset& data);

/// The MLP training loss as a finite sum over the dataset.
class MlpObjective final : public FiniteSumObjective {
 public:
  MlpObjective(std::shared_ptr<const MlpModel> model, std::shared_ptr<const LabeledDataset> data);

  std::size_t dim() const override { return model_->parameter_count(); }
  std::size_t size() const override { return data_->size(); }
  double value_at(std::span<const double> w, std::size_t index) const override;
  Vector gradient_at(std::span<const double> w, std::size_t index) const override;
  LossAndGradient batch_value_and_gradient(std::span<const double> w,
                                           std::span<const std::size_t> batch) const override;

  const MlpModel& model() const { return *model_; }
  const LabeledDataset& data() const { return *data_; }

 private:
  std::shared_ptr<const MlpModel> model_;
  std::shared_ptr<const LabeledDataset> data_;
};

}  // namespace frmom::objectives
