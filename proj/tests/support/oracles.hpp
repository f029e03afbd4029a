#pragma once

// Independent reference computations for the tests. Nothing here calls into
// the library's numerics: randomness comes from <random>, the MLP forward
// pass from Eigen, Phi from quadrature, the DCT from its defining sum.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "snd/models.hpp"
#include "snd/oracle.hpp"
#include "snd/tensor.hpp"

namespace oracle {

using Vec = std::vector<double>;

// Central differences of f at x with step h.
Vec central_diff(const std::function<double(std::span<const double>)>& f, std::span<const double> x,
                 double h = 1e-5);

// Logits of a ReLU MLP by Eigen matrix products.
Vec eigen_mlp_logits(const std::vector<snd::DenseLayer>& layers, std::span<const double> x);
Vec eigen_softmax(std::span<const double> logits);

// Phi(z) = 1/2 + integral_0^z phi(t) dt by composite Simpson.
double normal_cdf_quadrature(double z, std::size_t intervals = 20000);

// E||eta||_2 for eta ~ N(0, sigma^2 I_d): sigma sqrt2 Gamma((d+1)/2) / Gamma(d/2).
double chi_mean(std::size_t d, double sigma);

// P[X >= k], X ~ Bin(n, p).
double binomial_upper_tail(std::size_t n, double p, std::size_t k);

// Orthonormal 2-D DCT-II from the defining double sum (one channel).
Vec naive_dct2(std::span<const double> img, std::size_t width, std::size_t height);

// |(w_a - w_b)^T x + (b_a - b_b)| / ||w_a - w_b|| for a LinearModel.
double hyperplane_distance(const snd::LinearModel& m, std::span<const double> x, std::size_t a, std::size_t b);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

// Monte Carlo mean and standard error of draw(gen) over n samples.
MeanSe monte_carlo(const std::function<double(std::mt19937_64&)>& draw, std::size_t n, std::uint64_t seed);

// Model whose logits come from an arbitrary function; gradients unsupported.
class FunctionModel final : public snd::Classifier {
 public:
  FunctionModel(std::size_t dim, std::size_t classes, std::function<Vec(std::span<const double>)> f)
      : dim_(dim), classes_(classes), f_(std::move(f)) {}
  std::size_t input_dim() const override { return dim_; }
  std::size_t num_classes() const override { return classes_; }
  Vec logits(std::span<const double> x) const override { return f_(x); }
  Vec loss_gradient(std::span<const double>, const snd::LossForm&) const override;

 private:
  std::size_t dim_;
  std::size_t classes_;
  std::function<Vec(std::span<const double>)> f_;
};

// Instrumented shim: counts every call that reaches the wrapped oracle.
class CountingOracle final : public snd::QueryOracle {
 public:
  explicit CountingOracle(snd::QueryOracle& inner, bool keep_inputs = false)
      : inner_(inner), keep_(keep_inputs) {}

  Vec score_query(const snd::ImageTensor& x) override {
    ++scores;
    if (keep_) inputs.push_back(x);
    return inner_.score_query(x);
  }
  std::size_t decision_query(const snd::ImageTensor& x) override {
    ++decisions;
    if (keep_) inputs.push_back(x);
    return inner_.decision_query(x);
  }
  const snd::QueryLedger& ledger() const override { return inner_.ledger(); }
  std::size_t num_classes() const override { return inner_.num_classes(); }
  const snd::Shape& input_shape() const override { return inner_.input_shape(); }
  std::size_t cost_per_query() const override { return inner_.cost_per_query(); }
  const snd::Classifier& criterion_model() const override { return inner_.criterion_model(); }
  const snd::DefenseSpec& defense() const override { return inner_.defense(); }

  std::size_t scores = 0;
  std::size_t decisions = 0;
  std::vector<snd::ImageTensor> inputs;

 private:
  snd::QueryOracle& inner_;
  bool keep_;
};

// Random LinearModel with N(0, scale^2) weights and biases (std::mt19937_64).
snd::LinearModel random_linear(std::size_t classes, std::size_t dim, double scale, std::uint64_t seed);

// Uniform point in [lo, hi]^d.
Vec uniform_point(std::size_t d, double lo, double hi, std::uint64_t seed);

// The desk MLP (default dataset spec, hidden {32}, default SGD, seed 7),
// trained once per process.
const snd::MlpModel& desk_model();

}  // namespace oracle
