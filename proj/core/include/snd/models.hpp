#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "snd/loss.hpp"
#include "snd/tensor.hpp"

namespace snd {

// Index of the largest entry; ties go to the smallest index.
std::size_t argmax(std::span<const double> v);

// Numerically stable softmax.
Vec softmax(std::span<const double> logits);

// A classifier f: [0,1]^d -> probability simplex over num_classes() labels.
// Implementations are immutable after construction and safe to share.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual std::size_t input_dim() const = 0;
  virtual std::size_t num_classes() const = 0;
  virtual Vec logits(std::span<const double> x) const = 0;

  // Gradient of the adversary loss with respect to the input. Models that
  // cannot provide one throw ParameterError.
  virtual Vec loss_gradient(std::span<const double> x, const LossForm& form) const = 0;

  // softmax(logits(x)); throws DimensionError on a size mismatch.
  Vec forward_probs(std::span<const double> x) const;
  Vec forward_probs(const ImageTensor& x) const { return forward_probs(x.values()); }
  std::size_t predict_label(std::span<const double> x) const { return argmax(forward_probs(x)); }
  std::size_t predict_label(const ImageTensor& x) const { return predict_label(x.values()); }

 protected:
  void check_input(std::span<const double> x) const;
};

// Exact gradient of the adversary loss, by the chain rule.
Vec analytic_gradient(const Classifier& model, std::span<const double> x, const LossForm& form);

// Back-propagates dl/dprobs through the softmax to dl/dlogits.
Vec softmax_backward(std::span<const double> probs, std::span<const double> dprobs);

// logits = W x + b, W is N x d row-major.
class LinearModel final : public Classifier {
 public:
  LinearModel(std::size_t num_classes, std::size_t dim, Vec weights, Vec bias);
  static LinearModel zeros(std::size_t num_classes, std::size_t dim);

  std::size_t input_dim() const override { return dim_; }
  std::size_t num_classes() const override { return classes_; }
  Vec logits(std::span<const double> x) const override;
  Vec loss_gradient(std::span<const double> x, const LossForm& form) const override;

  std::span<const double> row(std::size_t c) const { return {weights_.data() + c * dim_, dim_}; }
  double bias(std::size_t c) const { return bias_[c]; }

  // Two-class geometry: |(w1 - w2)^T x + (b1 - b2)| / ||w1 - w2||.
  double boundary_distance(std::span<const double> x, std::size_t a = 0, std::size_t b = 1) const;
  // Unit normal (w_b - w_a)/||w_b - w_a||, pointing from class a towards class b.
  Vec boundary_normal(std::size_t a = 0, std::size_t b = 1) const;

 private:
  std::size_t classes_;
  std::size_t dim_;
  Vec weights_;
  Vec bias_;
};

// Two classes: label 0 iff ||x - center|| < radius. The logit of class 0 is
// steepness * (radius - distance), class 1 has logit 0, so p_0 is a sigmoid
// of the signed distance to the sphere.
class RadialModel final : public Classifier {
 public:
  RadialModel(Vec center, double radius, double steepness = 10.0);

  std::size_t input_dim() const override { return center_.size(); }
  std::size_t num_classes() const override { return 2; }
  Vec logits(std::span<const double> x) const override;
  Vec loss_gradient(std::span<const double> x, const LossForm& form) const override;

  const Vec& center() const { return center_; }
  double radius() const { return radius_; }

 private:
  Vec center_;
  double radius_;
  double steepness_;
};

// Fully connected layer, weights rows x cols row-major (rows = outputs).
struct DenseLayer {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Vec weights;
  Vec bias;
};

// ReLU hidden layers, softmax output.
class MlpModel final : public Classifier {
 public:
  explicit MlpModel(std::vector<DenseLayer> layers);

  std::size_t input_dim() const override { return layers_.front().cols; }
  std::size_t num_classes() const override { return layers_.back().rows; }
  Vec logits(std::span<const double> x) const override;
  Vec loss_gradient(std::span<const double> x, const LossForm& form) const override;

  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& mutable_layers() { return layers_; }

  // Pre-activations of every layer (last entry = logits).
  std::vector<Vec> forward_trace(std::span<const double> x) const;
  // Given dl/dlogits, returns dl/dx.
  Vec backward_input(const std::vector<Vec>& pre, std::span<const double> dlogits) const;

 private:
  std::vector<DenseLayer> layers_;
};

}  // namespace snd
