#include "snd/adaptive.hpp"

#include <cmath>

#include "snd/errors.hpp"
#include "snd/models.hpp"

namespace snd {

namespace {

void check_repeats(std::size_t T) {
  if (T == 0) throw ParameterError("repeat count T must be >= 1");
}

}  // namespace

Vec expected_score_query(Oracle& oracle, const ImageTensor& x, std::size_t T) {
  check_repeats(T);
  oracle.ledger().require(T);
  Vec mean(oracle.num_classes(), 0.0);
  for (std::size_t i = 0; i < T; ++i) {
    const Vec p = oracle.physical_query(x, QueryKind::kScore);
    for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += p[c];
  }
  scale_in_place(mean, 1.0 / static_cast<double>(T));
  oracle.mutable_ledger().charge_logical();
  return mean;
}

std::size_t majority_decision_query(Oracle& oracle, const ImageTensor& x, std::size_t T) {
  check_repeats(T);
  oracle.ledger().require(T);
  std::vector<std::size_t> votes(oracle.num_classes(), 0);
  for (std::size_t i = 0; i < T; ++i) ++votes[argmax(oracle.physical_query(x, QueryKind::kDecision))];
  oracle.mutable_ledger().charge_logical();
  std::size_t best = 0;
  for (std::size_t c = 1; c < votes.size(); ++c) {
    if (votes[c] > votes[best]) best = c;
  }
  return best;
}

AdaptiveOracle::AdaptiveOracle(Oracle& inner, std::size_t T) : inner_(inner), T_(T) { check_repeats(T); }

BiasReport expectation_bias_demo(const std::function<double(std::span<const double>)>& f,
                                 std::span<const double> x, double sigma, std::size_t T_max, SeededRng& rng) {
  check_repeats(T_max);
  if (!(sigma >= 0.0)) throw ParameterError("sigma must be >= 0");
  BiasReport rep;
  rep.exact = f(x);
  double sum = 0.0;
  std::size_t next_report = 1;
  Vec xp(x.size());
  for (std::size_t T = 1; T <= T_max; ++T) {
    const Vec eta = sample_gaussian(rng, x.size(), sigma);
    for (std::size_t i = 0; i < x.size(); ++i) xp[i] = x[i] + eta[i];
    sum += f(xp);
    if (T == next_report || T == T_max) {
      const double mean = sum / static_cast<double>(T);
      rep.points.push_back({T, mean, std::abs(mean - rep.exact)});
      if (T == next_report) next_report *= 2;
    }
  }
  return rep;
}

}  // namespace snd
