#include "snd/loss.hpp"

#include "snd/errors.hpp"

namespace snd {

std::size_t runner_up(std::span<const double> probs, std::size_t excluded) {
  if (probs.size() < 2) throw ParameterError("loss needs at least two classes");
  std::size_t best = excluded == 0 ? 1 : 0;
  for (std::size_t c = 0; c < probs.size(); ++c) {
    if (c != excluded && probs[c] > probs[best]) best = c;
  }
  return best;
}

double adversary_loss(std::span<const double> probs, const LossForm& form) {
  if (form.label >= probs.size()) throw ParameterError("loss label out of range");
  const double own = probs[form.label];
  const double other = probs[runner_up(probs, form.label)];
  return form.mode == LossForm::Mode::kUntargeted ? own - other : other - own;
}

}  // namespace snd
