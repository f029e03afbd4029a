#include "snd/models.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "snd/errors.hpp"

namespace snd {

std::size_t argmax(std::span<const double> v) {
  if (v.empty()) throw ParameterError("argmax of empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

Vec softmax(std::span<const double> logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  Vec p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

Vec softmax_backward(std::span<const double> probs, std::span<const double> dprobs) {
  const double inner = dot(probs, dprobs);
  Vec dz(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) dz[i] = probs[i] * (dprobs[i] - inner);
  return dz;
}

void Classifier::check_input(std::span<const double> x) const {
  if (x.size() != input_dim()) {
    throw DimensionError("model expects input dimension " + std::to_string(input_dim()) +
                         ", got " + std::to_string(x.size()));
  }
}

Vec Classifier::forward_probs(std::span<const double> x) const {
  check_input(x);
  return softmax(logits(x));
}

namespace {

// dl/dprobs for the adversary loss at the given probabilities.
Vec loss_dprobs(std::span<const double> probs, const LossForm& form) {
  if (form.label >= probs.size()) throw ParameterError("loss label out of range");
  const std::size_t other = runner_up(probs, form.label);
  Vec a(probs.size(), 0.0);
  const double sign = form.mode == LossForm::Mode::kUntargeted ? 1.0 : -1.0;
  a[form.label] = sign;
  a[other] = -sign;
  return a;
}

}  // namespace

Vec analytic_gradient(const Classifier& model, std::span<const double> x, const LossForm& form) {
  return model.loss_gradient(x, form);
}

// ---------------------------------------------------------------------------

LinearModel::LinearModel(std::size_t num_classes, std::size_t dim, Vec weights, Vec bias)
    : classes_(num_classes), dim_(dim), weights_(std::move(weights)), bias_(std::move(bias)) {
  if (classes_ < 2) throw ParameterError("LinearModel needs at least two classes");
  if (weights_.size() != classes_ * dim_ || bias_.size() != classes_) {
    throw DimensionError("LinearModel weight/bias sizes do not match N x d");
  }
}

LinearModel LinearModel::zeros(std::size_t num_classes, std::size_t dim) {
  return LinearModel(num_classes, dim, Vec(num_classes * dim, 0.0), Vec(num_classes, 0.0));
}

Vec LinearModel::logits(std::span<const double> x) const {
  Vec z(bias_);
  for (std::size_t c = 0; c < classes_; ++c) z[c] += dot(row(c), x);
  return z;
}

Vec LinearModel::loss_gradient(std::span<const double> x, const LossForm& form) const {
  check_input(x);
  const Vec p = softmax(logits(x));
  const Vec dz = softmax_backward(p, loss_dprobs(p, form));
  Vec g(dim_, 0.0);
  for (std::size_t c = 0; c < classes_; ++c) {
    if (dz[c] == 0.0) continue;
    const auto w = row(c);
    for (std::size_t i = 0; i < dim_; ++i) g[i] += dz[c] * w[i];
  }
  return g;
}

double LinearModel::boundary_distance(std::span<const double> x, std::size_t a,
                                      std::size_t b) const {
  const Vec diff = subtract(row(a), row(b));
  const double n = l2_norm(diff);
  if (n == 0.0) throw ParameterError("classes have identical weight rows");
  return std::abs(dot(diff, x) + bias_[a] - bias_[b]) / n;
}

Vec LinearModel::boundary_normal(std::size_t a, std::size_t b) const {
  return normalized(subtract(row(b), row(a)));
}

// ---------------------------------------------------------------------------

RadialModel::RadialModel(Vec center, double radius, double steepness)
    : center_(std::move(center)), radius_(radius), steepness_(steepness) {
  if (!(radius_ > 0.0)) throw ParameterError("RadialModel radius must be positive");
  if (!(steepness_ > 0.0)) throw ParameterError("RadialModel steepness must be positive");
  if (center_.empty()) throw DimensionError("RadialModel center is empty");
}

Vec RadialModel::logits(std::span<const double> x) const {
  return {steepness_ * (radius_ - l2_distance(x, center_)), 0.0};
}

Vec RadialModel::loss_gradient(std::span<const double> x, const LossForm& form) const {
  check_input(x);
  const Vec offset = subtract(x, center_);
  const double dist = l2_norm(offset);
  if (dist == 0.0) throw ParameterError("RadialModel is not differentiable at its center");
  const Vec p = softmax(logits(x));
  const Vec dz = softmax_backward(p, loss_dprobs(p, form));
  // Only logit 0 depends on x: d z0 / dx = -steepness * offset / dist.
  Vec g(offset);
  scale_in_place(g, -steepness_ * dz[0] / dist);
  return g;
}

// ---------------------------------------------------------------------------

MlpModel::MlpModel(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ParameterError("MlpModel needs at least one layer");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (l.weights.size() != l.rows * l.cols || l.bias.size() != l.rows) {
      throw DimensionError("layer " + std::to_string(i) + " weight/bias size mismatch");
    }
    if (i > 0 && l.cols != layers_[i - 1].rows) {
      throw DimensionError("layer " + std::to_string(i) + " input does not match previous output");
    }
  }
  if (layers_.back().rows < 2) throw ParameterError("MlpModel needs at least two classes");
}

std::vector<Vec> MlpModel::forward_trace(std::span<const double> x) const {
  std::vector<Vec> pre;
  pre.reserve(layers_.size());
  Vec act(x.begin(), x.end());
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    const auto& l = layers_[li];
    Vec z(l.bias);
    for (std::size_t r = 0; r < l.rows; ++r) {
      const double* w = l.weights.data() + r * l.cols;
      double s = 0.0;
      for (std::size_t c = 0; c < l.cols; ++c) s += w[c] * act[c];
      z[r] += s;
    }
    pre.push_back(z);
    if (li + 1 < layers_.size()) {
      for (double& v : z) v = std::max(0.0, v);
      act = std::move(z);
    }
  }
  return pre;
}

Vec MlpModel::logits(std::span<const double> x) const { return forward_trace(x).back(); }

Vec MlpModel::backward_input(const std::vector<Vec>& pre, std::span<const double> dlogits) const {
  Vec delta(dlogits.begin(), dlogits.end());
  for (std::size_t li = layers_.size(); li-- > 0;) {
    const auto& l = layers_[li];
    Vec down(l.cols, 0.0);
    for (std::size_t r = 0; r < l.rows; ++r) {
      if (delta[r] == 0.0) continue;
      const double* w = l.weights.data() + r * l.cols;
      for (std::size_t c = 0; c < l.cols; ++c) down[c] += delta[r] * w[c];
    }
    if (li > 0) {
      const Vec& below = pre[li - 1];
      for (std::size_t c = 0; c < l.cols; ++c) {
        if (below[c] <= 0.0) down[c] = 0.0;
      }
    }
    delta = std::move(down);
  }
  return delta;
}

Vec MlpModel::loss_gradient(std::span<const double> x, const LossForm& form) const {
  check_input(x);
  const auto pre = forward_trace(x);
  const Vec p = softmax(pre.back());
  return backward_input(pre, softmax_backward(p, loss_dprobs(p, form)));
}

}  // namespace snd
