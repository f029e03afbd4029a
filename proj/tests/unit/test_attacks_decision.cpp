#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "snd/analysis.hpp"
#include "snd/attacks_decision.hpp"
#include "snd/dataset.hpp"
#include "snd/errors.hpp"

using namespace snd;

namespace {

// Two classes split by n^T (x - x0) = margin, class 1 beyond.
LinearModel slab(const Vec& n, const Vec& x0, double margin) {
  Vec w(2 * n.size(), 0.0);
  for (std::size_t i = 0; i < n.size(); ++i) w[n.size() + i] = n[i];
  return LinearModel(2, n.size(), std::move(w), {0.0, -(dot(n, x0) + margin)});
}

struct LinearCase {
  std::size_t d;
  Vec n;
  ImageTensor x0;
  double margin;
  LinearModel model;
};

LinearCase linear_case(std::size_t d, double margin, std::uint64_t seed) {
  Vec n = normalized(oracle::uniform_point(d, -1.0, 1.0, seed));
  ImageTensor x0 = ImageTensor::flat(Vec(d, 0.5));
  LinearModel m = slab(n, x0.vec(), margin);
  return {d, n, x0, margin, m};
}

const SyntheticDataset& desk_eval() {
  static const SyntheticDataset d = [] {
    DatasetSpec s;
    s.seed = 2;
    s.samples_per_class = 5;
    return generate_dataset(s);
  }();
  return d;
}

AttackTrace run_named(const std::string& name, QueryOracle& o, const ImageTensor& x0, std::size_t c0,
                      const AttackBudget& b, SeededRng& rng, Referee& ref) {
  if (name == "boundary") return boundary_attack(o, x0, c0, b, BoundaryAttackParams{}, rng, ref);
  if (name == "sign_opt") return sign_opt_attack(o, x0, c0, b, SignOptParams{}, rng, ref);
  if (name == "hsja") return hsja_attack(o, x0, c0, b, HsjaParams{}, rng, ref);
  return geoda_attack(o, x0, c0, b, GeodaParams{}, rng, ref);
}

const std::vector<std::string> kAttacks = {"boundary", "sign_opt", "hsja", "geoda"};

}  // namespace

TEST(InitAdversarial, SuccessRateMatchesExteriorVolume) {
  // disc of radius 0.3 at the centre of the unit square
  RadialModel m(Vec{0.5, 0.5}, 0.3);
  const double inside = std::numbers::pi * 0.09;
  const ImageTensor x0 = ImageTensor::flat({0.5, 0.5});
  std::size_t first_try = 0;
  std::size_t failures = 0;
  const std::size_t runs = 2000;
  for (std::size_t s = 0; s < runs; ++s) {
    Oracle o(m, DefenseSpec::none(), 1, 1000);
    SeededRng rng(s);
    try {
      const auto r = init_adversarial(o, x0, 0, rng, 10);
      if (r.tries == 1) ++first_try;
      EXPECT_NE(m.predict_label(r.x), 0u);
    } catch (const InitFailure&) {
      ++failures;
    }
  }
  const double p = 1.0 - inside;
  EXPECT_NEAR(double(first_try) / runs, p, 4.0 * std::sqrt(p * (1 - p) / runs));
  EXPECT_EQ(failures, 0u);  // expected 2000 * 0.283^10 ~ 6e-3
}

TEST(InitAdversarial, MisclassifiedStartIsReturned) {
  RadialModel m(Vec{0.5, 0.5}, 0.3);
  const ImageTensor x0 = ImageTensor::flat({0.0, 0.0});
  Oracle o(m, DefenseSpec::none(), 1, 10);
  SeededRng rng(1);
  const auto r = init_adversarial(o, x0, 0, rng);
  EXPECT_TRUE(r.x0_adversarial);
  EXPECT_EQ(r.x, x0);
  EXPECT_EQ(o.ledger().physical(), 1u);
}

TEST(InitAdversarial, ZeroTriesFails) {
  RadialModel m(Vec{0.5, 0.5}, 0.3);
  Oracle o(m, DefenseSpec::none(), 1, 10);
  SeededRng rng(1);
  EXPECT_THROW(init_adversarial(o, ImageTensor::flat({0.5, 0.5}), 0, rng, 0), InitFailure);
}

TEST(GeometricSchedule, SumsToTotal) {
  const auto s = geometric_schedule(400, 4, 1.3);
  std::size_t sum = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    sum += s[i];
    if (i) EXPECT_GE(s[i], s[i - 1]);
  }
  EXPECT_EQ(sum, 400u);
  EXPECT_THROW(geometric_schedule(2, 3, 1.0), ParameterError);
}

TEST(BoundaryAttack, ReachesTheHyperplaneMargin) {
  const auto c = linear_case(16, 0.15, 3);
  Referee ref(c.model);
  Oracle o(c.model, DefenseSpec::none(), 1, 5000);
  SeededRng rng(4);
  const auto tr = boundary_attack(o, c.x0, 0, AttackBudget{5000, 2.0, 0}, BoundaryAttackParams{}, rng, ref);
  ASSERT_TRUE(tr.success);
  EXPECT_LE(tr.final_l2, 1.1 * c.margin);
}

TEST(BoundaryAttack, ZeroStepsAreAFixedPoint) {
  const auto c = linear_case(16, 0.15, 3);
  Referee ref(c.model);
  Oracle o(c.model, DefenseSpec::none(), 1, 500);
  SeededRng rng(4);
  BoundaryAttackParams p;
  p.orthogonal_step = 0.0;
  p.source_step = 0.0;
  const auto tr = boundary_attack(o, c.x0, 0, AttackBudget{500, 2.0, 0}, p, rng, ref);
  ASSERT_GE(tr.steps.size(), 1u);
  for (const auto& s : tr.steps) EXPECT_DOUBLE_EQ(s.l2, tr.steps.front().l2);
  EXPECT_DOUBLE_EQ(tr.final_l2, tr.steps.front().l2);
}

TEST(BoundaryAttack, NoiseInflatesTheFinalNorm) {
  // desk dimension; the inflation grows with the noise norm sigma * sqrt(d)
  const auto c = linear_case(64, 0.15, 3);
  Referee ref(c.model);
  double clean = 0.0, noisy = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Oracle a(c.model, DefenseSpec::none(), seed, 5000);
    Oracle b(c.model, DefenseSpec::snd(c.margin / 2), seed, 5000);
    SeededRng r1(seed), r2(seed);
    clean += boundary_attack(a, c.x0, 0, AttackBudget{5000, 2.0, 0}, BoundaryAttackParams{}, r1, ref).final_l2;
    noisy += boundary_attack(b, c.x0, 0, AttackBudget{5000, 2.0, 0}, BoundaryAttackParams{}, r2, ref).final_l2;
  }
  EXPECT_GE(noisy, 2.0 * clean);
}

TEST(SignOpt, ConvergesToTheNormal) {
  const auto c = linear_case(16, 0.15, 5);
  Referee ref(c.model);
  Oracle o(c.model, DefenseSpec::none(), 1, 10000);
  SeededRng rng(6);
  const auto tr = sign_opt_attack(o, c.x0, 0, AttackBudget{10000, 2.0, 0}, SignOptParams{}, rng, ref);
  ASSERT_TRUE(tr.success);
  EXPECT_GE(cosine(subtract(tr.final_x.values(), c.x0.values()), c.n), 0.95);
  EXPECT_NEAR(tr.final_l2, c.margin, 0.05 * c.margin);
}

TEST(SignOpt, AtTheNormalTheEstimateHasNoDirectionAndGNeverGrows) {
  const auto c = linear_case(16, 0.15, 5);
  Oracle o(c.model, DefenseSpec::none(), 1, 100000);
  SeededRng rng(7);
  const std::size_t B = 2000;
  std::size_t adv = 0;
  const Vec g = sign_opt_gradient(o, c.x0, 0, c.n, c.margin * (1 + 1e-9), B, 0.05, rng, &adv);
  // every tilt of theta lengthens the ray, so no probe is adversarial and
  // the mean of the (symmetric) probe directions is pure sampling noise
  EXPECT_EQ(adv, 0u);
  EXPECT_LT(l2_norm(g), 4.0 / std::sqrt(double(B)));
  double step = 0.2;
  SignOptParams p;
  p.line_tol = 1e-6;
  const auto st = sign_opt_line_search(o, c.x0, 0, c.n, c.margin, g, step, p);
  EXPECT_LE(st.g, c.margin);
  if (!st.moved) EXPECT_EQ(st.theta, c.n);
}

TEST(SignOpt, ConstantLabelRegionGivesNoInformation) {
  const auto m = LinearModel::zeros(2, 8);
  Oracle o(m, DefenseSpec::none(), 1, 10000);
  const ImageTensor x0 = ImageTensor::flat(Vec(8, 0.5));
  const Vec theta = normalized(oracle::uniform_point(8, -1.0, 1.0, 1));
  SeededRng rng(3), twin(3);
  const Vec g = sign_opt_gradient(o, x0, 0, theta, 0.3, 50, 0.05, rng);
  Vec sum(8, 0.0);
  for (int i = 0; i < 50; ++i) {
    const Vec u = sample_unit_sphere(twin, 8);
    for (std::size_t k = 0; k < 8; ++k) sum[k] += u[k] / 50.0;
  }
  for (std::size_t k = 0; k < 8; ++k) EXPECT_NEAR(g[k], sum[k], 1e-12);
  double step = 0.2;
  const auto st = sign_opt_line_search(o, x0, 0, theta, 0.3, g, step, SignOptParams{});
  EXPECT_FALSE(st.moved);
  EXPECT_EQ(st.theta, theta);
  EXPECT_EQ(st.g, 0.3);
}

TEST(Hsja, ZeroProbeRadiusIsInvalid) {
  HsjaParams p;
  p.probe_radius = 0.0;
  EXPECT_THROW(p.validate(), ParameterError);
  const auto c = linear_case(8, 0.1, 1);
  Oracle o(c.model, DefenseSpec::none(), 1, 100);
  Referee ref(c.model);
  SeededRng rng(1);
  EXPECT_THROW(hsja_attack(o, c.x0, 0, AttackBudget{100, 2.0, 0}, p, rng, ref), ParameterError);
}

TEST(Hsja, ReachesTheHyperplaneMargin) {
  const auto c = linear_case(16, 0.15, 8);
  Referee ref(c.model);
  Oracle o(c.model, DefenseSpec::none(), 1, 5000);
  SeededRng rng(9);
  const auto tr = hsja_attack(o, c.x0, 0, AttackBudget{5000, 2.0, 0}, HsjaParams{}, rng, ref);
  ASSERT_TRUE(tr.success);
  EXPECT_LE(tr.final_l2, 1.05 * c.margin);
}

TEST(Hsja, NoiseLowersSuccess) {
  const auto& m = oracle::desk_model();
  std::size_t clean = 0, noisy = 0;
  for (std::size_t i = 0; i < 8; ++i) {
    const auto& x0 = desk_eval().images[i];
    const std::size_t c0 = m.predict_label(x0);
    for (int defended = 0; defended < 2; ++defended) {
      Oracle o(m, defended ? DefenseSpec::snd(0.0693) : DefenseSpec::none(), i, 2000, {8, 8, 1});
      Referee ref(m);
      SeededRng rng(i);
      const auto tr = hsja_attack(o, x0, c0, AttackBudget{2000, 1.0, 0}, HsjaParams{}, rng, ref);
      (defended ? noisy : clean) += tr.success ? 1 : 0;
    }
  }
  EXPECT_GT(clean, noisy);
}

TEST(Geoda, LinearNormalAndMargin) {
  const auto c = linear_case(16, 0.15, 10);
  const ImageTensor on = step_clipped(c.x0, c.margin + 1e-4, c.n);
  Oracle probe(c.model, DefenseSpec::none(), 1, 2000);
  SeededRng r0(1);
  const auto est = estimate_boundary_normal(probe, on, 0, 2000, 0.02, r0);
  EXPECT_GE(cosine(est.direction, c.n), 0.99);

  Referee ref(c.model);
  Oracle o(c.model, DefenseSpec::none(), 1, 5000);
  SeededRng rng(11);
  const auto tr = geoda_attack(o, c.x0, 0, AttackBudget{5000, 2.0, 0}, GeodaParams{}, rng, ref);
  ASSERT_TRUE(tr.success);
  EXPECT_LE(tr.final_l2, 1.02 * c.margin);
}

TEST(DecisionAttacks, FeasibilityRatchetWithoutDefense) {
  const auto& m = oracle::desk_model();
  Referee ref(m);
  for (const auto& name : kAttacks) {
    for (std::size_t i = 0; i < 3; ++i) {
      const auto& x0 = desk_eval().images[i];
      const std::size_t c0 = m.predict_label(x0);
      Oracle o(m, DefenseSpec::none(), 1, 3000, {8, 8, 1});
      SeededRng rng(i);
      const auto tr = run_named(name, o, x0, c0, AttackBudget{3000, 2.0, 0}, rng, ref);
      for (std::size_t k = 0; k < tr.steps.size(); ++k) {
        EXPECT_TRUE(tr.steps[k].base_adversarial) << name << " step " << k;
        if (k) EXPECT_LE(tr.steps[k].l2, tr.steps[k - 1].l2 + 1e-12) << name << " step " << k;
      }
    }
  }
}

TEST(DecisionAttacks, LedgerMatchesCallsAndBudget) {
  const auto& m = oracle::desk_model();
  Referee ref(m);
  const auto& x0 = desk_eval().images[0];
  const std::size_t c0 = m.predict_label(x0);
  for (const auto& name : kAttacks) {
    for (int defended = 0; defended < 2; ++defended) {
      Oracle o(m, defended ? DefenseSpec::snd(0.0693) : DefenseSpec::none(), 2, 1500, {8, 8, 1});
      oracle::CountingOracle shim(o);
      SeededRng rng(3);
      const auto tr = run_named(name, shim, x0, c0, AttackBudget{1200, 2.0, 0}, rng, ref);
      EXPECT_EQ(shim.decisions, o.ledger().physical()) << name;
      EXPECT_EQ(shim.scores, 0u) << name;
      EXPECT_LE(tr.logical_queries, 1200u) << name;
      EXPECT_EQ(tr.queries_used, o.ledger().physical());
    }
  }
}

TEST(DecisionAttacks, LoggedMismatchFractionIsThePmisEstimator) {
  const auto& m = oracle::desk_model();
  Referee ref(m);
  const auto& x0 = desk_eval().images[2];
  const std::size_t c0 = m.predict_label(x0);
  Oracle o(m, DefenseSpec::snd(0.0693), 5, 3000, {8, 8, 1});
  o.set_log_mode(LogMode::kFull);
  SeededRng rng(5);
  hsja_attack(o, x0, c0, AttackBudget{3000, 2.0, 0}, HsjaParams{}, rng, ref);
  std::size_t mism = 0;
  for (const auto& e : o.log()) mism += m.predict_label(e.input) != e.label ? 1 : 0;
  ASSERT_FALSE(o.log().empty());
  EXPECT_DOUBLE_EQ(estimate_pmis_from_log(m, o.log()), double(mism) / double(o.log().size()));
  EXPECT_GT(mism, 0u);
}
