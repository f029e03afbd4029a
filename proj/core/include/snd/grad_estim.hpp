#pragma once

#include <cstddef>
#include <limits>
#include <optional>

#include "snd/loss.hpp"
#include "snd/oracle.hpp"
#include "snd/rng.hpp"

namespace snd {

// Random gradient-free estimator settings. The probe deviation is kept apart
// from any defense sigma.
struct RgfConfig {
  std::size_t samples = 100;  // B
  double smoothing = 0.01;    // beta_s, finite-difference step
  double probe_sigma = 1.0;   // u ~ N(0, probe_sigma^2 I)

  void validate() const;
};

// g = (1/B) sum_i [l(x + beta_s u_i) - l(x)] / beta_s * u_i.
// Costs exactly B + 1 score queries; the base loss is queried once. The whole
// cost is checked against the ledger before the first query, so a
// BudgetExceeded leaves no partial estimate.
Vec rgf_estimate(QueryOracle& oracle, const ImageTensor& x, const LossForm& form,
                 const RgfConfig& cfg, SeededRng& rng);

struct BoundaryPoint {
  ImageTensor point;             // adversarial-side end of the final bracket
  ImageTensor inside;            // benign-side end of the final bracket
  double distance_from_x0 = 0.0; // ||point - initial inside||
  double bracket_fraction = 1.0; // final bracket length / initial length
  std::size_t inside_label = 0;
  std::size_t outside_label = 0;
  std::size_t queries = 0;
};

// Number of bisection steps that bring a unit bracket down to <= tol.
std::size_t bisection_steps(double tol);

// Bisects the segment [inside, outside] whose ends were observed with
// different labels. A midpoint observed with inside_label replaces `inside`,
// anything else replaces `outside`. Uses exactly bisection_steps(tol)
// decision queries. Throws BracketError when the labels coincide.
BoundaryPoint binary_search_to_boundary(QueryOracle& oracle, const ImageTensor& inside,
                                        std::size_t inside_label, const ImageTensor& outside,
                                        std::size_t outside_label, double tol);

inline constexpr double kNoCrossing = std::numeric_limits<double>::infinity();

struct LineSearchOptions {
  double search_cap = 10.0;   // largest lambda tried
  double tolerance = 1e-3;    // absolute bracket length on lambda
  double initial_step = 0.25; // first lambda when no guess is given
  std::optional<double> guess;  // warm start, e.g. the previous distance
};

// g(theta) = min{ lambda > 0 : h(clip(x0 + lambda * theta/|theta|)) != c0 },
// by exponential stepping then bisection. Returns kNoCrossing when nothing
// flips up to search_cap. `queries` (optional) receives the decision-query count.
double boundary_distance_along(QueryOracle& oracle, const ImageTensor& x0, std::size_t c0,
                               std::span<const double> theta, const LineSearchOptions& opts,
                               std::size_t* queries = nullptr);

struct NormalEstimate {
  Vec direction;  // unnormalised mean of phi_i * u_i, points to the adversarial side
  std::size_t adversarial = 0;
  std::size_t probes = 0;
  bool degenerate() const { return adversarial == 0 || adversarial == probes; }
};

// Probes point + radius * u_i, u_i uniform on the sphere, phi_i = +1 when the
// observed label differs from c0 and -1 otherwise. With `center`, phi is
// mean-centred unless all probes agree.
NormalEstimate estimate_boundary_normal(QueryOracle& oracle, const ImageTensor& point, std::size_t c0,
                                        std::size_t probes, double radius, SeededRng& rng,
                                        bool center = true);

}  // namespace snd
