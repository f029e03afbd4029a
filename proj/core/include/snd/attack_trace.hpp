#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "snd/defense.hpp"
#include "snd/models.hpp"
#include "snd/oracle.hpp"
#include "snd/rng.hpp"
#include "snd/tensor.hpp"

namespace snd {

struct AttackBudget {
  std::size_t queries = 10000;     // Q, logical queries the attacker may issue
  double epsilon = 2.0;            // l2 perturbation budget used for success
  std::size_t max_iterations = 0;  // optional step cap, 0 = none

  void validate() const;
};

// One accepted iterate.
struct StepRecord {
  std::size_t t = 0;           // iteration number
  std::size_t q = 0;           // logical queries used when accepted
  std::size_t q_physical = 0;  // physical queries used when accepted
  double l2 = 0.0;             // ||x_t - x0||
  double value = 0.0;          // observed loss / probability / label, per attack
  bool base_adversarial = false;  // referee verdict on x_t
};

struct AttackTrace {
  std::string attack;
  std::size_t true_label = 0;
  double epsilon = 0.0;
  std::size_t budget = 0;
  std::size_t repeat = 1;  // T of an adaptive wrapper
  std::vector<StepRecord> steps;
  ImageTensor final_x;
  double final_l2 = 0.0;
  bool success = false;           // referee: some accepted iterate is adversarial within epsilon
  bool declared_success = false;  // attacker believed it had succeeded
  std::size_t queries_used = 0;   // physical
  std::size_t logical_queries = 0;
  std::string status = "ok";      // ok | budget | iterations | init_failure | error
  std::string reason;

  // Success using only iterates accepted within `query_budget` queries
  // (physical when `physical`, else logical), with l2 <= epsilon.
  bool success_at(double eps, std::size_t query_budget, bool physical = true) const;
  std::string to_json(bool include_final_x = true) const;
};

// Judges iterates. kUndefended asks the bare criterion model; kDefendedVote
// takes the majority label of `votes` defended evaluations drawn from the
// referee's own stream (never charged to any ledger).
class Referee {
 public:
  enum class Mode { kUndefended, kDefendedVote };

  explicit Referee(const Classifier& model);
  Referee(const Classifier& model, DefenseSpec defense, std::uint64_t seed, std::size_t votes = 15);

  std::size_t label(const ImageTensor& x);
  bool adversarial(const ImageTensor& x, std::size_t true_label) { return label(x) != true_label; }
  Mode mode() const { return mode_; }

 private:
  const Classifier& model_;
  Mode mode_ = Mode::kUndefended;
  DefenseSpec defense_;
  SeededRng rng_;
  std::size_t votes_ = 1;
};

// Builds an AttackTrace while an attack runs.
class TraceRecorder {
 public:
  TraceRecorder(std::string attack, const QueryOracle& oracle, Referee& referee,
                const ImageTensor& x0, std::size_t true_label, const AttackBudget& budget);

  // Records an accepted iterate and makes it the current output.
  void accept(std::size_t t, const ImageTensor& x, double value);
  void declare_success() { trace_.declared_success = true; }
  void set_status(std::string status, std::string reason = {});
  AttackTrace finish();

  const ImageTensor& current() const { return current_; }

 private:
  const QueryOracle& oracle_;
  Referee& referee_;
  ImageTensor x0_;
  ImageTensor current_;
  AttackTrace trace_;
};

}  // namespace snd
