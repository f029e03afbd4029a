#pragma once

#include <cstddef>
#include <span>

namespace snd {

// The adversary's objective. Untargeted: l(x) = f(x)_c0 - max_{c != c0} f(x)_c.
// Targeted: l(x) = max_{c != target} f(x)_c - f(x)_target. In both forms l < 0
// means the attacker has won.
struct LossForm {
  enum class Mode { kUntargeted, kTargeted };
  Mode mode = Mode::kUntargeted;
  std::size_t label = 0;

  static LossForm untargeted(std::size_t true_label) { return {Mode::kUntargeted, true_label}; }
  static LossForm targeted(std::size_t target) { return {Mode::kTargeted, target}; }
};

double adversary_loss(std::span<const double> probs, const LossForm& form);

// Largest entry other than `excluded`, smallest index on ties.
std::size_t runner_up(std::span<const double> probs, std::size_t excluded);

}  // namespace snd
