#pragma once

#include <cstddef>

#include "snd/attack_trace.hpp"
#include "snd/loss.hpp"
#include "snd/oracle.hpp"
#include "snd/rng.hpp"

namespace snd {

struct SimbaParams {
  double step_size = 0.2;
  void validate() const;
};

struct SimbaDctParams {
  double step_size = 0.2;
  std::size_t freq_dims = 8;  // 28 at 32x32, scaled to the 8x8 desk task
  std::size_t stride = 2;     // 7 at 32x32
  void validate(const Shape& shape) const;
};

struct BanditParams {
  double exploration = 0.01;  // delta_e, scale of the prior perturbation
  double fd_eta = 0.01;       // finite-difference step of the two probes
  double prior_lr = 0.1;      // eta_p
  double image_lr = 0.05;     // h
  std::size_t tile = 2;       // T_d, side of one prior cell in pixels
  void validate() const;
};

// SimBA over the pixel basis. Each pass visits the coordinates in a fresh
// random order; x + step*e is tried before x - step*e and the first one that
// strictly lowers the observed y_c0 is kept.
AttackTrace simba_attack(QueryOracle& oracle, const ImageTensor& x0, std::size_t c0,
                         const AttackBudget& budget, const SimbaParams& params, SeededRng& rng,
                         Referee& referee);

// SimBA over low-frequency DCT basis images in strided_order().
AttackTrace simba_dct_attack(QueryOracle& oracle, const ImageTensor& x0, std::size_t c0,
                             const AttackBudget& budget, const SimbaDctParams& params,
                             Referee& referee);

// Candidate directions used by simba_dct_attack, in visiting order.
std::vector<ImageTensor> simba_dct_directions(const Shape& shape, const SimbaDctParams& params);

// Prior grid geometry for Bandit-TD.
Shape bandit_grid(const Shape& image, std::size_t tile);
// Nearest-neighbour upsampling of a grid vector to the image shape.
Vec upsample_prior(std::span<const double> prior, const Shape& grid, const Shape& image, std::size_t tile);

struct BanditProbes {
  std::size_t label_plus = 0;
  std::size_t label_minus = 0;
  double loss_plus = 0.0;
  double loss_minus = 0.0;
};

// One bandit update of the prior at x (two score queries). The prior tracks
// the gradient of the loss and stays inside the unit ball.
BanditProbes bandit_prior_update(QueryOracle& oracle, const ImageTensor& x,
                                 const LossForm& form, Vec& prior, const Shape& grid,
                                 const BanditParams& params, SeededRng& rng);

// Bandit-TD (time and data priors), l2 version. Every iteration costs two
// queries and moves x by image_lr against the upsampled prior, projected to
// the epsilon ball. The attacker stops when a probe is observed misclassified.
AttackTrace bandit_td_attack(QueryOracle& oracle, const ImageTensor& x0, std::size_t c0,
                             const AttackBudget& budget, const BanditParams& params, SeededRng& rng,
                             Referee& referee);

}  // namespace snd
