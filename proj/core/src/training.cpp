#include "snd/training.hpp"

#include <cmath>

#include "snd/errors.hpp"
#include "snd/rng.hpp"

namespace snd {

MlpModel init_mlp(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                  std::size_t num_classes, std::uint64_t seed) {
  SeededRng rng(seed);
  std::vector<DenseLayer> layers;
  std::size_t in = input_dim;
  std::vector<std::size_t> outs = hidden;
  outs.push_back(num_classes);
  for (std::size_t out : outs) {
    if (out == 0) throw ParameterError("layer width must be positive");
    DenseLayer l{out, in, Vec(out * in), Vec(out, 0.0)};
    const double scale = std::sqrt(2.0 / static_cast<double>(in));
    for (double& w : l.weights) w = scale * rng.gaussian();
    layers.push_back(std::move(l));
    in = out;
  }
  return MlpModel(std::move(layers));
}

double accuracy(const Classifier& model, const SyntheticDataset& data) {
  if (data.size() == 0) return 0.0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (model.predict_label(data.images[i]) == data.labels[i]) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(data.size());
}

MlpModel train_mlp(const SyntheticDataset& data, const std::vector<std::size_t>& hidden,
                   const SgdParams& params, std::uint64_t seed, TrainReport* report) {
  if (data.size() == 0) throw ParameterError("training set is empty");
  if (params.batch_size == 0) throw ParameterError("batch_size must be positive");
  if (!(params.learning_rate > 0.0)) throw ParameterError("learning_rate must be positive");
  const std::size_t dim = data.shape.size();

  MlpModel model = init_mlp(dim, hidden, data.num_classes, seed);
  SeededRng rng = SeededRng::derive(seed, 1);
  auto& layers = model.mutable_layers();

  std::vector<Vec> grad_w(layers.size());
  std::vector<Vec> grad_b(layers.size());
  double epoch_loss = 0.0;

  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    const auto order = random_permutation(rng, data.size());
    epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += params.batch_size) {
      const std::size_t end = std::min(order.size(), start + params.batch_size);
      for (std::size_t li = 0; li < layers.size(); ++li) {
        grad_w[li].assign(layers[li].weights.size(), 0.0);
        grad_b[li].assign(layers[li].bias.size(), 0.0);
      }
      for (std::size_t k = start; k < end; ++k) {
        const auto& x = data.images[order[k]].values();
        const std::size_t y = data.labels[order[k]];
        const auto pre = model.forward_trace(x);
        const Vec p = softmax(pre.back());
        epoch_loss -= std::log(std::max(p[y], 1e-300));
        // Cross-entropy through softmax: dz = p - onehot(y).
        Vec delta = p;
        delta[y] -= 1.0;
        for (std::size_t li = layers.size(); li-- > 0;) {
          const auto& l = layers[li];
          Vec act;
          if (li == 0) {
            act.assign(x.begin(), x.end());
          } else {
            act = pre[li - 1];
            for (double& v : act) v = std::max(0.0, v);
          }
          for (std::size_t r = 0; r < l.rows; ++r) {
            grad_b[li][r] += delta[r];
            double* gw = grad_w[li].data() + r * l.cols;
            for (std::size_t c = 0; c < l.cols; ++c) gw[c] += delta[r] * act[c];
          }
          if (li == 0) break;
          Vec down(l.cols, 0.0);
          for (std::size_t r = 0; r < l.rows; ++r) {
            const double* w = l.weights.data() + r * l.cols;
            for (std::size_t c = 0; c < l.cols; ++c) down[c] += delta[r] * w[c];
          }
          for (std::size_t c = 0; c < l.cols; ++c) {
            if (pre[li - 1][c] <= 0.0) down[c] = 0.0;
          }
          delta = std::move(down);
        }
      }
      const double step = params.learning_rate / static_cast<double>(end - start);
      for (std::size_t li = 0; li < layers.size(); ++li) {
        for (std::size_t i = 0; i < layers[li].weights.size(); ++i) layers[li].weights[i] -= step * grad_w[li][i];
        for (std::size_t i = 0; i < layers[li].bias.size(); ++i) layers[li].bias[i] -= step * grad_b[li][i];
      }
    }
    epoch_loss /= static_cast<double>(data.size());
    // ReLU maps NaN to 0, so poisoned weights can hide behind a finite loss
    bool finite = std::isfinite(epoch_loss);
    for (const auto& l : layers) {
      for (double w : l.weights) finite = finite && std::isfinite(w);
      for (double b : l.bias) finite = finite && std::isfinite(b);
    }
    if (!finite) throw TrainingError("training diverged at epoch " + std::to_string(epoch));
  }
  if (report) {
    report->final_loss = epoch_loss;
    report->train_accuracy = accuracy(model, data);
  }
  return model;
}

}  // namespace snd
