#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "snd/attack_trace.hpp"
#include "snd/defense.hpp"
#include "snd/models.hpp"
#include "snd/oracle.hpp"
#include "snd/rng.hpp"

namespace snd {

// E[(x + eta)^T (x + eta)] at x = 0: d * sigma^2.
double quadratic_expectation(std::size_t d, double sigma);

struct ReluUnitParams {
  double w = 1.0;
  double b = 0.0;
  double x = 0.0;
  double sigma = 1.0;
};

// E[max(0, w(x + eta) + b)], eta ~ N(0, sigma^2), in closed form:
// mu Phi(mu / s) + s phi(mu / s), mu = wx + b, s = |w| sigma.
// w == 0 or sigma == 0 gives the noiseless value.
double relu_expectation(const ReluUnitParams& p);

double std_normal_pdf(double z);
// Phi(z) = erfc(-z / sqrt 2) / 2 through the C library erfc, whose relative
// error is within a few ulp; far tighter than the 1e-7 needed here.
double std_normal_cdf(double z);

// Monte Carlo E||eta||_2 of the noise a defense adds in d dimensions
// (Beta-scaled noise included). Zero for non-noise defenses.
double mean_noise_norm(const DefenseSpec& defense, std::size_t d, std::size_t draws, SeededRng& rng);

// Fraction of (point, trial) pairs whose defended label differs from the
// undefended label of the same point. Requires a defense whose output shape
// matches the model input (noise defenses).
double estimate_pmis(const Classifier& model, const DefenseSpec& defense, const std::vector<ImageTensor>& points,
                     std::size_t trials, SeededRng& rng);

// Same fraction over recorded attack-time queries: the logged defended label
// against a replay of the undefended model on the logged input. Entries
// without an input are skipped; throws when none remain.
double estimate_pmis_from_log(const Classifier& model, const std::vector<QueryLogEntry>& log);

// Mean over points of the sample standard deviation (n - 1) of loss(x + eta)
// across `trials` draws of eta ~ N(0, sigma^2 I).
double estimate_sigma_hat(const std::function<double(std::span<const double>)>& loss,
                          const std::vector<Vec>& points, double sigma, std::size_t trials, SeededRng& rng);

// The same for the adversary's untargeted loss on a defended model.
double estimate_sigma_hat(const Classifier& model, const DefenseSpec& defense,
                          const std::vector<ImageTensor>& points, const std::vector<std::size_t>& labels,
                          std::size_t trials, SeededRng& rng);

// Percentage of traces with an adversarial iterate of norm <= epsilon
// accepted within `query_budget` physical queries.
double attack_success_rate(const std::vector<AttackTrace>& traces, double epsilon, std::size_t query_budget);

// ||x0 - x^q|| of the query with 1-based index `at_budget`, or of the last
// query when the log is shorter.
double mean_query_perturbation_norm(const std::vector<QueryLogEntry>& log, std::span<const double> x0,
                                    std::size_t at_budget);

struct MetricReport {
  std::string attack;
  std::string defense;
  double sigma = 0.0;
  std::size_t T = 1;
  std::uint64_t seed = 0;
  std::size_t n_images = 0;
  double success_rate = 0.0;
  double mean_final_l2 = 0.0;
  double mean_query_l2 = 0.0;
  double pmis = 0.0;
  double sigma_hat = 0.0;
  std::size_t pmis_samples = 0;
  std::size_t sigma_hat_samples = 0;

  static std::string csv_header();
  std::string csv_row() const;
  std::string to_json() const;
};

}  // namespace snd
