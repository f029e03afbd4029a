#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "snd/analysis.hpp"
#include "snd/dataset.hpp"
#include "snd/errors.hpp"
#include "snd/grad_estim.hpp"

using namespace snd;

namespace {

const SyntheticDataset& desk_eval() {
  static const SyntheticDataset d = [] {
    DatasetSpec s;
    s.seed = 2;
    s.samples_per_class = 10;
    return generate_dataset(s);
  }();
  return d;
}

StepRecord step(std::size_t q, double l2, bool adv) {
  StepRecord s;
  s.q = q;
  s.q_physical = q;
  s.l2 = l2;
  s.base_adversarial = adv;
  return s;
}

AttackTrace trace_with(std::vector<StepRecord> steps) {
  AttackTrace t;
  t.steps = std::move(steps);
  return t;
}

QueryLogEntry entry(Vec input) {
  QueryLogEntry e;
  e.input = std::move(input);
  return e;
}

}  // namespace

TEST(QuadraticExpectation, ClosedForm) {
  EXPECT_NEAR(quadratic_expectation(150528, 0.01), 15.0528, 1e-9);
  EXPECT_EQ(quadratic_expectation(10, 0.0), 0.0);
}

TEST(QuadraticExpectation, MonteCarlo) {
  const auto mc = oracle::monte_carlo(
      [](std::mt19937_64& g) {
        std::normal_distribution<double> n(0.0, 0.1);
        double s = 0.0;
        for (int i = 0; i < 10; ++i) {
          const double e = n(g);
          s += e * e;
        }
        return s;
      },
      1000000, 17);
  EXPECT_NEAR(mc.mean, 0.1, 0.001);
  EXPECT_NEAR(mc.mean, quadratic_expectation(10, 0.1), 4 * mc.se);
}

TEST(ReluExpectation, HalfNormalMean) {
  EXPECT_NEAR(relu_expectation({1.0, 0.0, 0.0, 1.0}), 0.3989423, 1e-7);
}

TEST(ReluExpectation, NoiselessLimitAndDegenerateBranches) {
  EXPECT_NEAR(relu_expectation({2.0, -1.0, 1.0, 1e-8}), 1.0, 1e-9);
  EXPECT_EQ(relu_expectation({2.0, -1.0, 1.0, 0.0}), 1.0);
  EXPECT_EQ(relu_expectation({0.0, 0.7, 5.0, 1.0}), 0.7);
  EXPECT_EQ(relu_expectation({0.0, -0.7, 5.0, 1.0}), 0.0);
}

TEST(ReluExpectation, MonteCarloWithinThreeStandardErrors) {
  const ReluUnitParams p{1.5, 0.5, -0.2, 0.3};
  const auto mc = oracle::monte_carlo(
      [&](std::mt19937_64& g) {
        std::normal_distribution<double> n(0.0, p.sigma);
        return std::max(0.0, p.w * (p.x + n(g)) + p.b);
      },
      10000000, 5);
  EXPECT_NEAR(relu_expectation(p), mc.mean, 3 * mc.se);
}

TEST(NormalFunctions, ReferenceValues) {
  EXPECT_EQ(std_normal_cdf(0.0), 0.5);
  EXPECT_NEAR(std_normal_pdf(0.0), 0.3989423, 1e-7);
  EXPECT_NEAR(std_normal_cdf(1.96), 0.9750021, 1e-6);
  EXPECT_NEAR(std_normal_cdf(1.96), oracle::normal_cdf_quadrature(1.96), 1e-7);
}

TEST(NormalFunctions, CdfAgreesWithQuadratureOnGrid) {
  for (double z = -8.0; z <= 8.0; z += 0.25) {
    EXPECT_NEAR(std_normal_cdf(z), oracle::normal_cdf_quadrature(z), 1e-7) << z;
  }
}

TEST(Pmis, ZeroSigmaIsZero) {
  const auto& m = oracle::desk_model();
  SeededRng rng(1);
  EXPECT_EQ(estimate_pmis(m, DefenseSpec::snd(0.0), desk_eval().images, 20, rng), 0.0);
}

TEST(Pmis, InvalidInputs) {
  const auto& m = oracle::desk_model();
  SeededRng rng(1);
  EXPECT_THROW(estimate_pmis(m, DefenseSpec::snd(0.1), {}, 20, rng), ParameterError);
  EXPECT_THROW(estimate_pmis(m, DefenseSpec::snd(0.1), desk_eval().images, 0, rng), ParameterError);
}

TEST(Pmis, SpherePointsFlipHalfTheTime) {
  const Vec c(16, 0.5);
  RadialModel m(c, 0.3);
  std::vector<ImageTensor> pts;
  for (std::uint64_t s = 0; s < 50; ++s) {
    // a hair inside so the clean label is the interior class
    pts.push_back(ImageTensor::flat(add_scaled(c, 0.3 - 1e-9, normalized(oracle::uniform_point(16, -1, 1, s)))));
  }
  SeededRng rng(3);
  EXPECT_NEAR(estimate_pmis(m, DefenseSpec::snd(1e-3), pts, 200, rng), 0.5, 0.05);
}

TEST(Pmis, CleanPointsVersusBoundaryPoints) {
  const auto& m = oracle::desk_model();
  const DefenseSpec snd = DefenseSpec::snd(0.01 * std::sqrt(3072.0 / 64.0));
  std::vector<ImageTensor> clean, near;
  const auto& imgs = desk_eval().images;
  for (std::size_t i = 0; i < imgs.size(); ++i) {
    const std::size_t c = m.predict_label(imgs[i]);
    const Vec p = m.forward_probs(imgs[i].values());
    if (p[c] > 0.9) clean.push_back(imgs[i]);
    // bisect towards an image of another class
    for (std::size_t j = 0; j < imgs.size(); ++j) {
      const std::size_t cj = m.predict_label(imgs[j]);
      if (cj == c) continue;
      Oracle o(m, DefenseSpec::none(), 1, 100);
      near.push_back(binary_search_to_boundary(o, imgs[i], c, imgs[j], cj, 1e-4).inside);
      break;
    }
  }
  ASSERT_GE(clean.size(), 20u);
  SeededRng rng(8);
  const double p_clean = estimate_pmis(m, snd, clean, 100, rng);
  const double p_near = estimate_pmis(m, snd, near, 100, rng);
  EXPECT_LE(p_clean, 0.05);
  EXPECT_GE(p_near, 0.2);
}

TEST(Pmis, FromLogSkipsEntriesWithoutInput) {
  const auto m = oracle::random_linear(3, 4, 1.0, 2);
  std::vector<QueryLogEntry> log;
  const Vec a{0.1, 0.2, 0.3, 0.4}, b{0.9, 0.1, 0.5, 0.2};
  log.push_back(entry(a));
  log.back().label = m.predict_label(a);
  log.push_back(entry(b));
  log.back().label = (m.predict_label(b) + 1) % 3;
  log.push_back(QueryLogEntry{});
  EXPECT_DOUBLE_EQ(estimate_pmis_from_log(m, log), 0.5);
  EXPECT_THROW(estimate_pmis_from_log(m, {QueryLogEntry{}}), ParameterError);
}

TEST(SigmaHat, ZeroSigmaIsZero) {
  const auto& m = oracle::desk_model();
  SeededRng rng(1);
  std::vector<std::size_t> labels;
  for (const auto& x : desk_eval().images) labels.push_back(m.predict_label(x));
  EXPECT_EQ(estimate_sigma_hat(m, DefenseSpec::snd(0.0), desk_eval().images, labels, 10, rng), 0.0);
  EXPECT_THROW(estimate_sigma_hat(m, DefenseSpec::snd(0.1), desk_eval().images, labels, 1, rng), ParameterError);
}

TEST(SigmaHat, LinearMarginIsNormTimesSigma) {
  const Vec a{0.3, -1.1, 0.8, 0.2, -0.5};
  auto loss = [&](std::span<const double> x) { return dot(a, x) - 0.2; };
  SeededRng rng(4);
  const std::vector<Vec> pts = {Vec(5, 0.1), Vec(5, 0.7)};
  EXPECT_NEAR(estimate_sigma_hat(loss, pts, 0.05, 10000, rng), l2_norm(a) * 0.05, 0.05 * l2_norm(a) * 0.05);
}

TEST(SigmaHat, DeskModelIsPositive) {
  const auto& m = oracle::desk_model();
  std::vector<ImageTensor> pts(desk_eval().images.begin(), desk_eval().images.begin() + 4);
  std::vector<std::size_t> labels;
  for (const auto& x : pts) labels.push_back(m.predict_label(x));
  SeededRng rng(4);
  EXPECT_GT(estimate_sigma_hat(m, DefenseSpec::snd(0.01), pts, labels, 10000, rng), 0.0);
}

TEST(SuccessRate, AllSuccessful) {
  std::vector<AttackTrace> t(7, trace_with({step(3, 0.5, true)}));
  EXPECT_EQ(attack_success_rate(t, 1.0, 10), 100.0);
}

TEST(SuccessRate, Arithmetic) {
  std::vector<AttackTrace> t;
  for (int i = 0; i < 1000; ++i) t.push_back(trace_with({step(10, i < 892 ? 0.5 : 5.0, true)}));
  EXPECT_NEAR(attack_success_rate(t, 1.0, 100), 89.2, 1e-12);
}

TEST(SuccessRate, EpsilonAndBudgetAreInclusive) {
  std::vector<AttackTrace> t = {trace_with({step(100, 1.0, true)})};
  EXPECT_EQ(attack_success_rate(t, 1.0, 100), 100.0);
  EXPECT_EQ(attack_success_rate(t, std::nextafter(1.0, 0.0), 100), 0.0);
  EXPECT_EQ(attack_success_rate(t, 1.0, 99), 0.0);
  EXPECT_THROW(attack_success_rate({}, 1.0, 10), ParameterError);
}

TEST(SuccessRate, BenignIteratesDoNotCount) {
  std::vector<AttackTrace> t = {trace_with({step(1, 0.1, false), step(5, 0.3, false)})};
  EXPECT_EQ(attack_success_rate(t, 1.0, 100), 0.0);
}

TEST(QueryNorm, AllAtStartIsZero) {
  const Vec x0{0.2, 0.4};
  std::vector<QueryLogEntry> log(5, entry(x0));
  EXPECT_EQ(mean_query_perturbation_norm(log, x0, 3), 0.0);
  EXPECT_THROW(mean_query_perturbation_norm({}, x0, 3), ParameterError);
}

TEST(QueryNorm, EarlyStopUsesLastQuery) {
  const Vec x0{0.0, 0.0};
  std::vector<QueryLogEntry> log;
  for (int i = 1; i <= 100; ++i) log.push_back(entry({0.0, 0.01 * i}));
  EXPECT_NEAR(mean_query_perturbation_norm(log, x0, 5000), 1.0, 1e-12);
  EXPECT_NEAR(mean_query_perturbation_norm(log, x0, 50), 0.5, 1e-12);
}

TEST(QueryNorm, HandComputedMean) {
  const Vec x0{0.0, 0.0};
  // per-image norms at Q=2: 5, 1, 0 -> mean 2
  const std::vector<std::vector<QueryLogEntry>> logs = {
      {entry({1.0, 1.0}), entry({3.0, 4.0}), entry({9.0, 9.0})},
      {entry({0.0, 1.0})},
      {entry({0.0, 0.0}), entry({0.0, 0.0})},
  };
  double sum = 0.0;
  for (const auto& l : logs) sum += mean_query_perturbation_norm(l, x0, 2);
  EXPECT_NEAR(sum / 3.0, 2.0, 1e-12);
}

TEST(QueryNorm, DistanceColumnWhenNoInput) {
  QueryLogEntry e;
  e.l2_from_x0 = 0.75;
  EXPECT_EQ(mean_query_perturbation_norm({e}, Vec{0.0}, 1), 0.75);
  EXPECT_THROW(mean_query_perturbation_norm({QueryLogEntry{}}, Vec{0.0}, 1), ParameterError);
}

TEST(MetricReport, CsvColumns) {
  EXPECT_EQ(MetricReport::csv_header(),
            "attack,defense,sigma,T,seed,n_images,success_rate,mean_final_l2,mean_query_l2,pmis,sigma_hat");
  MetricReport r;
  r.attack = "hsja";
  r.defense = "snd:0.05";
  r.sigma = 0.05;
  r.T = 5;
  r.seed = 3;
  r.n_images = 10;
  r.success_rate = 40.0;
  const std::string row = r.csv_row();
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), 10);
  EXPECT_EQ(row.rfind("hsja,snd:0.05,", 0), 0u);
}
