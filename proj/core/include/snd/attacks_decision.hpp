#pragma once

#include <cstddef>
#include <optional>

#include "snd/attack_trace.hpp"
#include "snd/grad_estim.hpp"
#include "snd/oracle.hpp"
#include "snd/rng.hpp"

namespace snd {

struct InitResult {
  ImageTensor x;               // observed-misclassified starting point
  std::size_t label = 0;       // its observed label
  bool x0_adversarial = false; // x0 itself was observed misclassified
  std::size_t tries = 0;
};

// Queries x0 first (returned as is when already misclassified), then draws
// uniform images in [0,1]^d until one is observed misclassified and pulls it
// towards x0 with one binary search. Throws InitFailure after max_tries draws.
InitResult init_adversarial(QueryOracle& oracle, const ImageTensor& x0, std::size_t c0, SeededRng& rng,
                            std::size_t max_tries = 100, double search_tol = 1e-3);

struct BoundaryAttackParams {
  double orthogonal_step = 0.01;  // gamma_o, relative to the current distance
  double source_step = 0.01;      // gamma_s, contraction towards x0
  std::size_t window = 20;        // adaptation window
  double target_rate = 0.25;
  std::size_t max_init_tries = 100;
  void validate() const;
};

struct SignOptParams {
  std::size_t probes = 100;     // B_so
  double probe_beta = 0.05;     // beta_so
  double step = 0.2;            // initial eta_so, adapted by backtracking
  std::size_t max_halvings = 8;
  double line_tol = 1e-3;       // absolute tolerance of g(theta)
  double search_cap = 10.0;
  std::size_t max_init_tries = 100;
  void validate() const;
};

struct HsjaParams {
  std::size_t initial_probes = 30;   // B_0; iteration t uses B_0 * sqrt(t)
  std::size_t max_probes = 10000;
  double gamma = 1.0;                // theta_bs = gamma / d^(3/2)
  std::optional<double> probe_radius;  // fixed delta_probe, overrides the schedule
  std::size_t max_step_halvings = 30;
  std::size_t max_init_tries = 100;
  void validate() const;
};

struct GeodaParams {
  double probe_radius = 0.02;     // r_probe
  std::size_t sub_iterations = 4;  // N_sub per round
  double ratio = 1.3;             // geometric growth of per-sub-iteration probes
  std::size_t round_probes = 400;  // probes shared by the sub-iterations of one round
  double search_tol = 1e-3;       // relative binary-search tolerance
  double search_cap = 10.0;
  std::size_t max_init_tries = 100;
  void validate() const;
};

// Probe counts n_j = n_0 * ratio^j (j < n) that sum to `total` (rounded, each >= 1).
std::vector<std::size_t> geometric_schedule(std::size_t total, std::size_t n, double ratio);

AttackTrace boundary_attack(QueryOracle& oracle, const ImageTensor& x0, std::size_t c0,
                            const AttackBudget& budget, const BoundaryAttackParams& params,
                            SeededRng& rng, Referee& referee);

AttackTrace sign_opt_attack(QueryOracle& oracle, const ImageTensor& x0, std::size_t c0,
                            const AttackBudget& budget, const SignOptParams& params, SeededRng& rng,
                            Referee& referee);

AttackTrace hsja_attack(QueryOracle& oracle, const ImageTensor& x0, std::size_t c0,
                        const AttackBudget& budget, const HsjaParams& params, SeededRng& rng,
                        Referee& referee);

AttackTrace geoda_attack(QueryOracle& oracle, const ImageTensor& x0, std::size_t c0,
                         const AttackBudget& budget, const GeodaParams& params, SeededRng& rng,
                         Referee& referee);

// Sign-OPT's sign-based estimate of grad g(theta) at distance g:
// (1/B) sum_i s_i u_i, s_i = -1 when x0 + g * (theta + beta u_i)/|.| is
// observed adversarial, +1 otherwise. Costs B decision queries.
Vec sign_opt_gradient(QueryOracle& oracle, const ImageTensor& x0, std::size_t c0,
                      std::span<const double> theta, double g, std::size_t probes, double beta,
                      SeededRng& rng, std::size_t* adversarial_count = nullptr);

struct SignOptStep {
  Vec theta;  // unit direction after the step
  double g = 0.0;
  bool moved = false;
  std::size_t queries = 0;
};

// Backtracking line search along -grad from (theta, g). Accepts only a strict
// decrease of g; otherwise returns theta unchanged. `step` is updated in place.
SignOptStep sign_opt_line_search(QueryOracle& oracle, const ImageTensor& x0, std::size_t c0,
                                 std::span<const double> theta, double g, std::span<const double> grad,
                                 double& step, const SignOptParams& params);

}  // namespace snd
