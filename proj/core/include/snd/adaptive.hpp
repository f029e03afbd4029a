#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "snd/oracle.hpp"
#include "snd/rng.hpp"

namespace snd {

// Mean of T defended score queries. T physical queries, one logical query.
// The whole batch is checked against the budget first, so exhaustion never
// leaves a partial aggregate.
Vec expected_score_query(Oracle& oracle, const ImageTensor& x, std::size_t T);

// Mode of T defended labels; ties go to the smallest class index.
std::size_t majority_decision_query(Oracle& oracle, const ImageTensor& x, std::size_t T);

// Expectation-over-repeats attacker view of an oracle.
class AdaptiveOracle final : public QueryOracle {
 public:
  AdaptiveOracle(Oracle& inner, std::size_t T);

  Vec score_query(const ImageTensor& x) override { return expected_score_query(inner_, x, T_); }
  std::size_t decision_query(const ImageTensor& x) override { return majority_decision_query(inner_, x, T_); }

  const QueryLedger& ledger() const override { return inner_.ledger(); }
  std::size_t num_classes() const override { return inner_.num_classes(); }
  const Shape& input_shape() const override { return inner_.input_shape(); }
  std::size_t cost_per_query() const override { return T_; }
  const Classifier& criterion_model() const override { return inner_.criterion_model(); }
  const DefenseSpec& defense() const override { return inner_.defense(); }

  std::size_t repeats() const { return T_; }

 private:
  Oracle& inner_;
  std::size_t T_;
};

struct BiasPoint {
  std::size_t T = 0;
  double mean = 0.0;  // mean of f(x + eta_i), i < T
  double bias = 0.0;  // |mean - f(x)|
};

struct BiasReport {
  double exact = 0.0;  // f(x)
  std::vector<BiasPoint> points;
};

// |mean_T f(x + eta) - f(x)| at T = 1, 2, 4, ... and T_max, all from one
// running sequence of draws eta ~ N(0, sigma^2 I).
BiasReport expectation_bias_demo(const std::function<double(std::span<const double>)>& f,
                                 std::span<const double> x, double sigma, std::size_t T_max, SeededRng& rng);

}  // namespace snd
