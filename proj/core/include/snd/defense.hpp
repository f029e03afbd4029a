#pragma once

#include <string>

#include "snd/rng.hpp"
#include "snd/tensor.hpp"

namespace snd {

// Inference-time input transform guarding an oracle.
struct DefenseSpec {
  enum class Kind { kNone, kSnd, kBetaSnd, kRandResizePad };

  Kind kind = Kind::kNone;
  double sigma = 0.0;    // SND / BetaSND noise std
  double alpha_b = 1.0;  // BetaSND scale distribution
  double beta_b = 1.0;
  double s_min = 310.0 / 299.0;  // RandResizePad scale range
  double s_max = 331.0 / 299.0;

  static DefenseSpec none() { return {}; }
  static DefenseSpec snd(double sigma);
  static DefenseSpec beta_snd(double sigma, double alpha_b, double beta_b);
  static DefenseSpec rand_resize_pad(double s_min = 310.0 / 299.0, double s_max = 331.0 / 299.0);

  // Accepts "none", "snd:<sigma>", "beta:<sigma>,<alpha>,<beta>", "rp" or "rp:<s_min>,<s_max>".
  static DefenseSpec parse(const std::string& text);
  // Inverse of parse, with shortest round-trip numbers.
  std::string label() const;

  // Throws ParameterError when the parameters break the contract.
  void validate() const;
  // Shape the model sees for an attacker image of shape `in`.
  Shape model_shape(const Shape& in) const;
  // Noise scale reported in metric tables (0 for none / resize-pad).
  double noise_sigma() const { return kind == Kind::kSnd || kind == Kind::kBetaSnd ? sigma : 0.0; }
  bool randomized() const;
};

// x + eta, eta ~ N(0, sigma^2 I), optionally clipped to [0, 1].
ImageTensor apply_snd(const ImageTensor& x, double sigma, SeededRng& rng, bool clip = true);
// x + k * eta for a fixed scale k. apply_snd(x, s, rng) == apply_scaled_snd(x, s, 1, rng).
ImageTensor apply_scaled_snd(const ImageTensor& x, double sigma, double k, SeededRng& rng,
                             bool clip = true);
// k ~ Beta(alpha_b, beta_b) drawn first, then x + k * eta.
ImageTensor apply_beta_snd(const ImageTensor& x, double sigma, double alpha_b, double beta_b,
                           SeededRng& rng, bool clip = true);

// Canvas side for a scale range: ceil(s_max * side).
Shape resize_pad_canvas(const Shape& in, double s_max);
// Bilinear resize with half-pixel centres and edge clamping.
ImageTensor bilinear_resize(const ImageTensor& x, std::size_t width, std::size_t height);
// Resize to (width, height) and paste at (offset_x, offset_y) on a zero canvas.
ImageTensor resize_pad(const ImageTensor& x, std::size_t width, std::size_t height,
                       std::size_t offset_x, std::size_t offset_y, const Shape& canvas);
// s ~ U[s_min, s_max], resized side round(s * side), uniform offset inside the
// ceil(s_max * side) canvas.
ImageTensor apply_rand_resize_pad(const ImageTensor& x, double s_min, double s_max, SeededRng& rng);

// Dispatch on spec.kind. Resize-pad output is never clipped (already in range).
ImageTensor apply_defense(const DefenseSpec& spec, const ImageTensor& x, SeededRng& rng,
                          bool clip_after_noise = true);

}  // namespace snd
