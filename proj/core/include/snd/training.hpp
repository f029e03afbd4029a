#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "snd/dataset.hpp"
#include "snd/models.hpp"

namespace snd {

struct SgdParams {
  double learning_rate = 0.05;
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
};

struct TrainReport {
  double final_loss = 0.0;      // mean cross-entropy over the last epoch
  double train_accuracy = 0.0;  // in [0, 1], after training
};

// Random He-normal initialisation; hidden = sizes of the hidden layers.
MlpModel init_mlp(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                  std::size_t num_classes, std::uint64_t seed);

// Mini-batch SGD on mean cross-entropy, one shuffle per epoch. Deterministic
// in (data, architecture, params, seed). Throws TrainingError if the loss
// becomes non-finite.
MlpModel train_mlp(const SyntheticDataset& data, const std::vector<std::size_t>& hidden,
                   const SgdParams& params, std::uint64_t seed, TrainReport* report = nullptr);

double accuracy(const Classifier& model, const SyntheticDataset& data);

}  // namespace snd
