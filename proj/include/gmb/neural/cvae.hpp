#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "gmb/core/error.hpp"
#include "gmb/core/random.hpp"
#include "gmb/neural/adam.hpp"
#include "gmb/neural/data.hpp"
#include "gmb/neural/layers.hpp"

namespace gmb::neural {

/// Hidden stack with reward injection after every hidden layer:
/// h_{k+1} = inject(tanh(W_k h_k + b_k), r).
class InjectedTrunk {
 public:
  InjectedTrunk() = default;
  InjectedTrunk(Eigen::Index in, Eigen::Index width, std::size_t layers, InjectionMode mode, Rng& rng) {
    if (layers == 0) throw InvalidConfig("trunk needs at least one hidden layer");
    Eigen::Index fan_in = in;
    for (std::size_t i = 0; i < layers; ++i) {
      dense_.emplace_back(fan_in, width, rng);
      tanh_.emplace_back();
      inject_.emplace_back(width, rng, mode);
      fan_in = width;
    }
  }

  Eigen::Index in_width() const { return dense_.front().in_width(); }
  Eigen::Index out_width() const { return dense_.back().out_width(); }

  Matrix infer(const Matrix& x, const Matrix& r) const {
    Matrix h = x;
    for (std::size_t i = 0; i < dense_.size(); ++i) h = inject_[i].infer(Tanh::infer(dense_[i].infer(h)), r);
    return h;
  }

  Matrix forward(const Matrix& x, const Matrix& r) {
    Matrix h = x;
    for (std::size_t i = 0; i < dense_.size(); ++i) h = inject_[i].forward(tanh_[i].forward(dense_[i].forward(h)), r);
    return h;
  }

  Matrix backward(const Matrix& dy) {
    Matrix g = dy;
    for (std::size_t i = dense_.size(); i-- > 0;) g = dense_[i].backward(tanh_[i].backward(inject_[i].backward(g)));
    return g;
  }

  ParameterList parameters() {
    ParameterList params;
    for (std::size_t i = 0; i < dense_.size(); ++i) {
      for (Parameter* p : dense_[i].parameters()) params.push_back(p);
      for (Parameter* p : inject_[i].parameters()) params.push_back(p);
    }
    return params;
  }

  std::vector<Injection>& injections() { return inject_; }

 private:
  std::vector<Dense> dense_;
  std::vector<Tanh> tanh_;
  std::vector<Injection> inject_;
};

struct CvaeShape {
  std::vector<std::size_t> slot_sizes;
  std::size_t context_dim = 0;
  std::size_t hidden_width = 64;
  std::size_t hidden_layers = 2;
  std::size_t latent_dim = 8;
  InjectionMode injection = InjectionMode::kMultiplicative;

  std::size_t action_width() const { return std::accumulate(slot_sizes.begin(), slot_sizes.end(), std::size_t{0}); }
};

/// Batch means of the ELBO terms. loss = -(log_likelihood - kl_weight * kl).
struct ElboTerms {
  double loss = 0.0;
  double log_likelihood = 0.0;
  double kl = 0.0;
};

/// Conditional VAE over (possibly combinatorial) actions.
///
/// Inference network q(z | a, c, r) and generative network p(a | c, r, z)
/// are injected trunks; the generative head is a product of per-slot
/// categoricals and the prior over z is N(0, I).
class Cvae {
 public:
  Cvae() = default;
  Cvae(CvaeShape shape, std::uint64_t seed) : shape_(std::move(shape)), seed_(seed) {
    if (shape_.slot_sizes.empty()) throw InvalidConfig("CVAE needs at least one action slot");
    Rng rng(seed);
    const auto width = static_cast<Eigen::Index>(shape_.hidden_width);
    const auto latent = static_cast<Eigen::Index>(shape_.latent_dim);
    const auto context = static_cast<Eigen::Index>(shape_.context_dim);
    encoder_ = InjectedTrunk(static_cast<Eigen::Index>(shape_.action_width()) + context, width, shape_.hidden_layers,
                             shape_.injection, rng);
    posterior_ = GaussianHead(width, latent, rng);
    decoder_ = InjectedTrunk(latent + context, width, shape_.hidden_layers, shape_.injection, rng);
    heads_ = CategoricalHeads(width, shape_.slot_sizes, rng);
  }

  const CvaeShape& shape() const noexcept { return shape_; }
  std::uint64_t seed() const noexcept { return seed_; }

  /// Per-slot action probabilities (slot_size x batch each).
  std::vector<Matrix> decode(const Matrix& z, const Matrix& contexts, const Matrix& rewards) const {
    check_rows(z, static_cast<Eigen::Index>(shape_.latent_dim), "Cvae::decode latent");
    check_rows(contexts, static_cast<Eigen::Index>(shape_.context_dim), "Cvae::decode context");
    return heads_.infer(decoder_.infer(vstack(z, contexts), rewards));
  }

  void encode(const Batch& batch, Matrix& mu, Matrix& sigma) const {
    posterior_.infer(encoder_.infer(vstack(batch.actions, batch.contexts), batch.rewards), mu, sigma);
  }

  /// Loss and parameter gradients for one batch, with z = mu + sigma * eps.
  /// `eps` is latent_dim x batch; gradients accumulate into the parameters.
  ElboTerms elbo_with_noise(const Batch& batch, const Matrix& eps, double kl_weight) {
    const double inv_batch = 1.0 / static_cast<double>(batch.size());
    Matrix mu;
    Matrix sigma;
    posterior_.forward(encoder_.forward(vstack(batch.actions, batch.contexts), batch.rewards), mu, sigma);
    const Matrix z = mu + (sigma.array() * eps.array()).matrix();

    Matrix dhidden;
    const double nll = heads_.forward_backward(decoder_.forward(vstack(z, batch.contexts), batch.rewards),
                                               batch.targets, dhidden);
    const Matrix dinput = decoder_.backward(dhidden);
    const Matrix dz = dinput.topRows(z.rows());

    const double kl = gaussian_kl(mu, sigma).sum() * inv_batch;
    const Matrix dmu = dz + (kl_weight * inv_batch) * mu;
    const Matrix dsigma = (dz.array() * eps.array()).matrix() +
                          (kl_weight * inv_batch) * (sigma.array() - sigma.array().inverse()).matrix();
    encoder_.backward(posterior_.backward(dmu, dsigma));

    ElboTerms terms;
    terms.log_likelihood = -nll;
    terms.kl = kl;
    terms.loss = nll + kl_weight * kl;
    return terms;
  }

  ElboTerms elbo(const Batch& batch, double kl_weight, Rng& rng) {
    return elbo_with_noise(batch, standard_normal(shape_.latent_dim, batch.size(), rng), kl_weight);
  }

  /// Stateless ELBO evaluation (no gradients).
  ElboTerms evaluate(const Batch& batch, const Matrix& eps, double kl_weight) const {
    Matrix mu;
    Matrix sigma;
    encode(batch, mu, sigma);
    const Matrix z = mu + (sigma.array() * eps.array()).matrix();
    const std::vector<Matrix> probs = decode(z, batch.contexts, batch.rewards);
    double ll = 0.0;
    for (std::size_t s = 0; s < probs.size(); ++s) {
      for (Eigen::Index j = 0; j < batch.size(); ++j) {
        ll += std::log(std::max(probs[s](static_cast<Eigen::Index>(batch.targets[s][static_cast<std::size_t>(j)]), j), 1e-300));
      }
    }
    const double inv_batch = 1.0 / static_cast<double>(batch.size());
    ElboTerms terms;
    terms.log_likelihood = ll * inv_batch;
    terms.kl = gaussian_kl(mu, sigma).sum() * inv_batch;
    terms.loss = -terms.log_likelihood + kl_weight * terms.kl;
    return terms;
  }

  ParameterList parameters() {
    ParameterList params = encoder_.parameters();
    for (Parameter* p : posterior_.parameters()) params.push_back(p);
    for (Parameter* p : decoder_.parameters()) params.push_back(p);
    for (Parameter* p : heads_.parameters()) params.push_back(p);
    return params;
  }

  static Matrix standard_normal(std::size_t rows, Eigen::Index cols, Rng& rng) {
    Matrix m(static_cast<Eigen::Index>(rows), cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.normal();
    }
    return m;
  }

 private:
  CvaeShape shape_;
  std::uint64_t seed_ = 0;
  InjectedTrunk encoder_;
  GaussianHead posterior_;
  InjectedTrunk decoder_;
  CategoricalHeads heads_;
};

/// Diagnostics from one training run.
struct TrainReport {
  double initial_train_loss = 0.0;
  double final_train_loss = 0.0;
  double initial_holdout_elbo = 0.0;
  double final_holdout_elbo = 0.0;
  std::size_t train_size = 0;
  std::size_t holdout_size = 0;
  std::vector<double> losses;
};

/// Splits sample indices into (train, holdout). The holdout takes
/// floor(fraction * n) shuffled samples, leaving at least one for training.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_holdout(std::size_t n, double fraction,
                                                                                   Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng.engine());
  auto holdout = static_cast<std::size_t>(fraction * static_cast<double>(n));
  if (holdout >= n) holdout = n - 1;
  std::vector<std::size_t> held(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(holdout));
  std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(holdout), order.end());
  return {std::move(train), std::move(held)};
}

/// Trains `model` in place on `samples` with minibatches drawn with
/// replacement. Holdout ELBO is evaluated with a fixed noise draw before and
/// after training.
inline TrainReport fit_cvae(Cvae& model, const std::vector<Sample>& samples, const TrainConfig& config) {
  if (samples.empty()) throw NoData("cannot train a CVAE on an empty dataset");
  config.validate();
  const CvaeShape& shape = model.shape();
  Rng rng(config.seed);
  Rng split_rng = rng.split(1);
  Rng batch_rng = rng.split(2);
  Rng noise_rng = rng.split(3);
  auto [train, holdout] = split_holdout(samples.size(), config.holdout_fraction, split_rng);
  const std::vector<std::size_t>& eval_indices = holdout.empty() ? train : holdout;

  TrainReport report;
  report.train_size = train.size();
  report.holdout_size = holdout.size();

  const Batch eval_batch = Batch::gather(shape.slot_sizes, shape.context_dim, samples, eval_indices);
  Rng eval_noise = rng.split(4);
  const Matrix eval_eps = Cvae::standard_normal(shape.latent_dim, eval_batch.size(), eval_noise);
  report.initial_holdout_elbo = -model.evaluate(eval_batch, eval_eps, config.kl_weight).loss;

  Adam optimizer(config.learning_rate);
  const ParameterList params = model.parameters();
  std::vector<std::size_t> indices(config.batch_size);
  report.losses.reserve(static_cast<std::size_t>(config.steps));
  for (long step = 0; step < config.steps; ++step) {
    for (std::size_t& i : indices) i = train[batch_rng.uniform_index(train.size())];
    const Batch batch = Batch::gather(shape.slot_sizes, shape.context_dim, samples, indices);
    zero_grad(params);
    const ElboTerms terms = model.elbo(batch, config.kl_weight, noise_rng);
    optimizer.step(params);
    report.losses.push_back(terms.loss);
  }
  report.initial_train_loss = report.losses.front();
  report.final_train_loss = report.losses.back();
  report.final_holdout_elbo = -model.evaluate(eval_batch, eval_eps, config.kl_weight).loss;
  return report;
}

}  // namespace gmb::neural
