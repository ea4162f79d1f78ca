#pragma once

// Central finite-difference checks for every differentiable layer and the
// full CVAE ELBO. Each check returns the worst relative error it saw.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "gmb/neural/cvae.hpp"
#include "gmb/neural/layers.hpp"

namespace gmb::testing {

using neural::Matrix;

inline constexpr double kFiniteDifferenceStep = 1e-5;
inline constexpr double kGradientTolerance = 1e-4;

inline double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-5});
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  }
  return m;
}

/// Worst relative error between `grad` and central differences of `loss`
/// over every entry of `value`.
inline double gradient_error(Matrix& value, const Matrix& grad, const std::function<double()>& loss) {
  const double h = kFiniteDifferenceStep;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < value.cols(); ++j) {
    for (Eigen::Index i = 0; i < value.rows(); ++i) {
      const double saved = value(i, j);
      value(i, j) = saved + h;
      const double up = loss();
      value(i, j) = saved - h;
      const double down = loss();
      value(i, j) = saved;
      worst = std::max(worst, relative_error(grad(i, j), (up - down) / (2 * h)));
    }
  }
  return worst;
}

struct GradientReport {
  std::string name;
  double worst = 0.0;
};

inline double check_dense(std::uint64_t seed) {
  Rng rng(seed);
  neural::Dense layer(5, 4, rng);
  Matrix x = random_matrix(5, 3, rng);
  const Matrix w = random_matrix(4, 3, rng);
  auto loss = [&] { return (layer.infer(x).array() * w.array()).sum(); };
  layer.forward(x);
  const Matrix dx = layer.backward(w);
  return std::max({gradient_error(x, dx, loss), gradient_error(layer.weight.value, layer.weight.grad, loss),
                   gradient_error(layer.bias.value, layer.bias.grad, loss)});
}

inline double check_tanh(std::uint64_t seed) {
  Rng rng(seed);
  neural::Tanh layer;
  Matrix x = random_matrix(4, 3, rng);
  const Matrix w = random_matrix(4, 3, rng);
  layer.forward(x);
  const Matrix dx = layer.backward(w);
  return gradient_error(x, dx, [&] { return (neural::Tanh::infer(x).array() * w.array()).sum(); });
}

/// Dropout with a mask fixed by reseeding; also covers the off mode.
inline double check_dropout(std::uint64_t seed) {
  Rng rng(seed);
  Matrix x = random_matrix(6, 4, rng);
  const Matrix w = random_matrix(6, 4, rng);
  double worst = 0.0;
  for (neural::DropoutMode mode : {neural::DropoutMode::kSample, neural::DropoutMode::kOff}) {
    auto loss = [&] {
      Rng mask(seed + 1);
      neural::Dropout probe(0.3);
      return (probe.forward(x, mode, mask).array() * w.array()).sum();
    };
    neural::Dropout layer(0.3);
    Rng mask(seed + 1);
    layer.forward(x, mode, mask);
    worst = std::max(worst, gradient_error(x, layer.backward(w), loss));
  }
  return worst;
}

inline double check_injection(neural::InjectionMode mode, std::uint64_t seed) {
  Rng rng(seed);
  neural::Injection layer(5, rng, mode);
  layer.bias.value = random_matrix(5, 1, rng);
  Matrix h = random_matrix(5, 3, rng);
  const Matrix r = random_matrix(1, 3, rng);
  const Matrix w = random_matrix(5, 3, rng);
  auto loss = [&] { return (layer.infer(h, r).array() * w.array()).sum(); };
  layer.forward(h, r);
  const Matrix dh = layer.backward(w);
  return std::max({gradient_error(h, dh, loss), gradient_error(layer.weight.value, layer.weight.grad, loss),
                   gradient_error(layer.bias.value, layer.bias.grad, loss)});
}

inline double check_categorical(std::uint64_t seed) {
  Rng rng(seed);
  neural::CategoricalHeads heads(4, {2, 3}, rng);
  Matrix h = random_matrix(4, 5, rng);
  const std::vector<std::vector<std::size_t>> targets = {{0, 1, 1, 0, 1}, {2, 0, 1, 2, 2}};
  Matrix dh;
  heads.forward_backward(h, targets, dh);
  std::vector<Matrix> grads;
  for (neural::Parameter* p : heads.parameters()) grads.push_back(p->grad);
  auto loss = [&] {
    Matrix scratch;
    neural::CategoricalHeads probe = heads;
    return probe.forward_backward(h, targets, scratch);
  };
  double worst = gradient_error(h, dh, loss);
  const neural::ParameterList params = heads.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) worst = std::max(worst, gradient_error(params[i]->value, grads[i], loss));
  return worst;
}

inline double check_gaussian_head(std::uint64_t seed) {
  Rng rng(seed);
  neural::GaussianHead head(4, 3, rng);
  Matrix h = random_matrix(4, 2, rng);
  const Matrix a = random_matrix(3, 2, rng);
  const Matrix b = random_matrix(3, 2, rng);
  auto loss = [&] {
    Matrix mu;
    Matrix sigma;
    head.infer(h, mu, sigma);
    return (mu.array() * a.array()).sum() + (sigma.array() * b.array()).sum();
  };
  Matrix mu;
  Matrix sigma;
  head.forward(h, mu, sigma);
  const Matrix dh = head.backward(a, b);
  double worst = gradient_error(h, dh, loss);
  for (neural::Parameter* p : head.parameters()) worst = std::max(worst, gradient_error(p->value, p->grad, loss));
  return worst;
}

inline double check_kl(std::uint64_t seed) {
  Rng rng(seed);
  Matrix mu = random_matrix(3, 2, rng);
  Matrix sigma = (random_matrix(3, 2, rng).array().abs() + 0.2).matrix();
  const Matrix dmu = mu;
  const Matrix dsigma = (sigma.array() - sigma.array().inverse()).matrix();
  auto loss = [&] { return neural::gaussian_kl(mu, sigma).sum(); };
  return std::max(gradient_error(mu, dmu, loss), gradient_error(sigma, dsigma, loss));
}

/// Every CVAE parameter against the ELBO loss on a width-8 model.
inline double check_elbo(neural::InjectionMode mode, std::uint64_t seed) {
  neural::CvaeShape shape;
  shape.slot_sizes = {2, 3};
  shape.context_dim = 2;
  shape.hidden_width = 8;
  shape.latent_dim = 3;
  shape.injection = mode;
  neural::Cvae model(shape, seed);
  Rng rng(seed + 1);
  std::vector<neural::Sample> samples;
  for (int i = 0; i < 6; ++i) {
    samples.push_back(
        {{rng.uniform_index(2), rng.uniform_index(3)}, {rng.normal(), rng.normal()}, rng.bernoulli(0.5) ? 1.0 : 0.0});
  }
  const std::vector<std::size_t> all = {0, 1, 2, 3, 4, 5};
  const neural::Batch batch = neural::Batch::gather(shape.slot_sizes, shape.context_dim, samples, all);
  const Matrix eps = neural::Cvae::standard_normal(shape.latent_dim, batch.size(), rng);
  const neural::ParameterList params = model.parameters();
  neural::zero_grad(params);
  model.elbo_with_noise(batch, eps, 0.5);
  std::vector<Matrix> grads;
  for (neural::Parameter* p : params) grads.push_back(p->grad);
  auto loss = [&] { return model.evaluate(batch, eps, 0.5).loss; };
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) worst = std::max(worst, gradient_error(params[i]->value, grads[i], loss));
  return worst;
}

inline std::vector<GradientReport> all_gradient_checks(std::uint64_t seed) {
  using neural::InjectionMode;
  return {
      {"dense", check_dense(seed)},
      {"tanh", check_tanh(seed + 1)},
      {"dropout", check_dropout(seed + 2)},
      {"injection (multiplicative)", check_injection(InjectionMode::kMultiplicative, seed + 3)},
      {"injection (additive)", check_injection(InjectionMode::kAdditive, seed + 4)},
      {"categorical heads", check_categorical(seed + 5)},
      {"gaussian head", check_gaussian_head(seed + 6)},
      {"kl term", check_kl(seed + 7)},
      {"elbo (multiplicative)", check_elbo(InjectionMode::kMultiplicative, seed + 8)},
      {"elbo (additive)", check_elbo(InjectionMode::kAdditive, seed + 9)},
  };
}

}  // namespace gmb::testing
