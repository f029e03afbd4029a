#include "snd/analysis.hpp"

#include <cmath>
#include <json.hpp>
#include <numbers>

#include "snd/errors.hpp"
#include "snd/format.hpp"

namespace snd {

double quadratic_expectation(std::size_t d, double sigma) {
  if (d == 0) throw ParameterError("d must be >= 1");
  if (!(sigma >= 0.0)) throw ParameterError("sigma must be >= 0");
  return static_cast<double>(d) * sigma * sigma;
}

double std_normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double relu_expectation(const ReluUnitParams& p) {
  if (!(p.sigma >= 0.0)) throw ParameterError("sigma must be >= 0");
  const double mu = p.w * p.x + p.b;
  const double s = std::abs(p.w) * p.sigma;
  if (p.w == 0.0 || s == 0.0) return std::max(0.0, mu);
  const double z = mu / s;
  // past ~38 standard deviations phi underflows and Phi is 0 or 1 exactly
  if (z > 38.0) return mu;
  if (z < -38.0) return 0.0;
  return mu * std_normal_cdf(z) + s * std_normal_pdf(z);
}

double mean_noise_norm(const DefenseSpec& defense, std::size_t d, std::size_t draws, SeededRng& rng) {
  defense.validate();
  if (draws == 0) throw ParameterError("draws must be >= 1");
  if (defense.noise_sigma() == 0.0) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < draws; ++i) {
    const double k = defense.kind == DefenseSpec::Kind::kBetaSnd ? rng.beta(defense.alpha_b, defense.beta_b) : 1.0;
    sum += k * l2_norm(sample_gaussian(rng, d, defense.sigma));
  }
  return sum / static_cast<double>(draws);
}

double estimate_pmis(const Classifier& model, const DefenseSpec& defense, const std::vector<ImageTensor>& points,
                     std::size_t trials, SeededRng& rng) {
  if (points.empty()) throw ParameterError("P_mis needs at least one point");
  if (trials == 0) throw ParameterError("P_mis needs trials >= 1");
  defense.validate();
  std::size_t mismatches = 0;
  for (const auto& x : points) {
    if (defense.model_shape(x.shape()).size() != model.input_dim() || x.size() != model.input_dim()) {
      throw DimensionError("P_mis needs a defense that keeps the model input size");
    }
    const std::size_t clean = model.predict_label(x.values());
    for (std::size_t t = 0; t < trials; ++t) {
      if (model.predict_label(apply_defense(defense, x, rng).values()) != clean) ++mismatches;
    }
  }
  return static_cast<double>(mismatches) / static_cast<double>(points.size() * trials);
}

double estimate_pmis_from_log(const Classifier& model, const std::vector<QueryLogEntry>& log) {
  std::size_t n = 0;
  std::size_t mismatches = 0;
  for (const auto& e : log) {
    if (e.input.empty()) continue;
    ++n;
    if (model.predict_label(e.input) != e.label) ++mismatches;
  }
  if (n == 0) throw ParameterError("query log holds no recorded inputs");
  return static_cast<double>(mismatches) / static_cast<double>(n);
}

double estimate_sigma_hat(const std::function<double(std::span<const double>)>& loss,
                          const std::vector<Vec>& points, double sigma, std::size_t trials, SeededRng& rng) {
  if (points.empty()) throw ParameterError("sigma_hat needs at least one point");
  if (trials < 2) throw ParameterError("sigma_hat needs trials >= 2");
  double total = 0.0;
  Vec xp;
  for (const auto& x : points) {
    double mean = 0.0;
    double m2 = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
      const Vec eta = sample_gaussian(rng, x.size(), sigma);
      xp = add_scaled(x, 1.0, eta);
      const double v = loss(xp);
      // Welford
      const double delta = v - mean;
      mean += delta / static_cast<double>(t + 1);
      m2 += delta * (v - mean);
    }
    total += std::sqrt(m2 / static_cast<double>(trials - 1));
  }
  return total / static_cast<double>(points.size());
}

double estimate_sigma_hat(const Classifier& model, const DefenseSpec& defense,
                          const std::vector<ImageTensor>& points, const std::vector<std::size_t>& labels,
                          std::size_t trials, SeededRng& rng) {
  if (points.empty()) throw ParameterError("sigma_hat needs at least one point");
  if (points.size() != labels.size()) throw DimensionError("one label per point is required");
  if (trials < 2) throw ParameterError("sigma_hat needs trials >= 2");
  defense.validate();
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const LossForm form = LossForm::untargeted(labels[i]);
    double mean = 0.0;
    double m2 = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
      const double v = adversary_loss(model.forward_probs(apply_defense(defense, points[i], rng).values()), form);
      const double delta = v - mean;
      mean += delta / static_cast<double>(t + 1);
      m2 += delta * (v - mean);
    }
    total += std::sqrt(m2 / static_cast<double>(trials - 1));
  }
  return total / static_cast<double>(points.size());
}

double attack_success_rate(const std::vector<AttackTrace>& traces, double epsilon, std::size_t query_budget) {
  if (traces.empty()) throw ParameterError("success rate needs at least one trace");
  std::size_t ok = 0;
  for (const auto& t : traces) {
    if (t.success_at(epsilon, query_budget)) ++ok;
  }
  return 100.0 * static_cast<double>(ok) / static_cast<double>(traces.size());
}

double mean_query_perturbation_norm(const std::vector<QueryLogEntry>& log, std::span<const double> x0,
                                    std::size_t at_budget) {
  if (log.empty()) throw ParameterError("query log is empty");
  const std::size_t idx = at_budget == 0 ? 0 : std::min(at_budget, log.size()) - 1;
  const QueryLogEntry& e = log[idx];
  if (!e.input.empty()) return l2_distance(e.input, x0);
  if (std::isnan(e.l2_from_x0)) throw ParameterError("log entry carries neither input nor distance");
  return e.l2_from_x0;
}

std::string MetricReport::csv_header() {
  return "attack,defense,sigma,T,seed,n_images,success_rate,mean_final_l2,mean_query_l2,pmis,sigma_hat";
}

std::string MetricReport::csv_row() const {
  std::string s = csv_field(attack) + ',' + csv_field(defense) + ',' + format_double(sigma) + ',' + std::to_string(T) + ',' +
                  std::to_string(seed) + ',' + std::to_string(n_images) + ',';
  s += format_double(success_rate) + ',' + format_double(mean_final_l2) + ',' + format_double(mean_query_l2) +
       ',' + format_double(pmis) + ',' + format_double(sigma_hat);
  return s;
}

std::string MetricReport::to_json() const {
  nlohmann::ordered_json j;
  j["attack"] = attack;
  j["defense"] = defense;
  j["sigma"] = sigma;
  j["T"] = T;
  j["seed"] = seed;
  j["n_images"] = n_images;
  j["success_rate"] = success_rate;
  j["mean_final_l2"] = mean_final_l2;
  j["mean_query_l2"] = mean_query_l2;
  j["pmis"] = pmis;
  j["pmis_samples"] = pmis_samples;
  j["sigma_hat"] = sigma_hat;
  j["sigma_hat_samples"] = sigma_hat_samples;
  return j.dump(2);
}

}  // namespace snd
