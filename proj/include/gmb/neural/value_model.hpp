#pragma once

#include <cstdint>
#include <vector>

#include "gmb/core/error.hpp"
#include "gmb/core/random.hpp"
#include "gmb/neural/adam.hpp"
#include "gmb/neural/data.hpp"
#include "gmb/neural/dense_net.hpp"

namespace gmb::neural {

/// Binary-reward value model: (action one-hot, context) -> sigmoid(logit).
class ValueModel {
 public:
  ValueModel() = default;
  ValueModel(std::vector<std::size_t> slot_sizes, std::size_t context_dim, std::vector<Eigen::Index> hidden,
             double dropout, std::uint64_t seed)
      : slot_sizes_(std::move(slot_sizes)), context_dim_(context_dim) {
    std::size_t width = context_dim_;
    for (std::size_t s : slot_sizes_) width += s;
    net_ = DenseNet(static_cast<Eigen::Index>(width), hidden, 1, dropout, seed);
  }

  const std::vector<std::size_t>& slot_sizes() const noexcept { return slot_sizes_; }
  std::size_t context_dim() const noexcept { return context_dim_; }
  DenseNet& net() noexcept { return net_; }
  const DenseNet& net() const noexcept { return net_; }

  Matrix inputs(const Batch& batch) const { return vstack(batch.actions, batch.contexts); }

  /// Predicted success probabilities for every flat action of a single-slot
  /// model under one context. kSample draws one dropout mask per action.
  std::vector<double> predict_all(const std::vector<double>& context, DropoutMode mode, Rng& rng) const {
    if (slot_sizes_.size() != 1) throw Unsupported("predict_all requires a single-slot action space");
    const std::size_t k = slot_sizes_.front();
    Matrix x = Matrix::Zero(static_cast<Eigen::Index>(k + context_dim_), static_cast<Eigen::Index>(k));
    if (context.size() != context_dim_) throw ShapeError("value model context dimension mismatch");
    for (std::size_t a = 0; a < k; ++a) {
      x(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a)) = 1.0;
      for (std::size_t i = 0; i < context_dim_; ++i) {
        x(static_cast<Eigen::Index>(k + i), static_cast<Eigen::Index>(a)) = context[i];
      }
    }
    const Matrix logits = net_.infer(x, mode, rng);
    std::vector<double> out(k);
    for (std::size_t a = 0; a < k; ++a) out[a] = sigmoid(logits(0, static_cast<Eigen::Index>(a)));
    return out;
  }

  /// Mean binary cross-entropy of a batch; accumulates gradients.
  double bce_forward_backward(const Batch& batch, DropoutMode mode, Rng& rng) {
    const Matrix logits = net_.forward(inputs(batch), mode, rng);
    const double inv_batch = 1.0 / static_cast<double>(batch.size());
    Matrix dlogits(1, batch.size());
    double loss = 0.0;
    for (Eigen::Index j = 0; j < batch.size(); ++j) {
      const double l = logits(0, j);
      const double y = batch.rewards(0, j);
      loss += softplus(l) - y * l;
      dlogits(0, j) = (sigmoid(l) - y) * inv_batch;
    }
    net_.backward(dlogits);
    return loss * inv_batch;
  }

  double bce(const Batch& batch) const {
    const Matrix logits = net_.infer(inputs(batch));
    double loss = 0.0;
    for (Eigen::Index j = 0; j < batch.size(); ++j) {
      loss += softplus(logits(0, j)) - batch.rewards(0, j) * logits(0, j);
    }
    return loss / static_cast<double>(batch.size());
  }

 private:
  std::vector<std::size_t> slot_sizes_;
  std::size_t context_dim_ = 0;
  DenseNet net_;
};

struct ValueFitReport {
  double initial_loss = 0.0;
  double final_loss = 0.0;
};

/// Fits a fresh value model by binary cross-entropy with dropout active
/// during training.
inline ValueModel fit_value_model(const std::vector<Sample>& samples, const std::vector<std::size_t>& slot_sizes,
                                  std::size_t context_dim, const TrainConfig& config,
                                  const std::vector<Eigen::Index>& hidden = {64, 64},
                                  ValueFitReport* report = nullptr) {
  if (samples.empty()) throw NoData("cannot fit a value model on an empty dataset");
  config.validate();
  Rng rng(config.seed);
  ValueModel model(slot_sizes, context_dim, hidden, config.dropout, rng.split(0).seed());
  Rng batch_rng = rng.split(1);
  Rng dropout_rng = rng.split(2);
  std::vector<std::size_t> all(samples.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const Batch full = Batch::gather(slot_sizes, context_dim, samples, all);
  if (report) report->initial_loss = model.bce(full);

  Adam optimizer(config.learning_rate);
  const ParameterList params = model.net().parameters();
  std::vector<std::size_t> indices(config.batch_size);
  for (long step = 0; step < config.steps; ++step) {
    for (std::size_t& i : indices) i = batch_rng.uniform_index(samples.size());
    const Batch batch = Batch::gather(slot_sizes, context_dim, samples, indices);
    zero_grad(params);
    model.bce_forward_backward(batch, DropoutMode::kSample, dropout_rng);
    optimizer.step(params);
  }
  if (report) report->final_loss = model.bce(full);
  return model;
}

}  // namespace gmb::neural
