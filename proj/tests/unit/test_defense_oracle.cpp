#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "snd/analysis.hpp"
#include "snd/dataset.hpp"
#include "snd/defense.hpp"
#include "snd/errors.hpp"
#include "snd/oracle.hpp"

using namespace snd;

TEST(DefenseSpec, ParseLabelRoundTrip) {
  for (const char* text : {"none", "snd:0.0693", "beta:0.01,2,2", "rp:1.1,1.2"}) {
    EXPECT_EQ(DefenseSpec::parse(text).label(), text);
  }
  EXPECT_EQ(DefenseSpec::parse(" snd : 0.05 ").sigma, 0.05);
}

TEST(DefenseSpec, InvalidParameters) {
  EXPECT_THROW(DefenseSpec::snd(-0.1), ParameterError);
  EXPECT_THROW(DefenseSpec::beta_snd(0.01, 0.0, 1.0), ParameterError);
  EXPECT_THROW(DefenseSpec::rand_resize_pad(1.2, 1.1), ParameterError);
  EXPECT_THROW(DefenseSpec::parse("gauss:1"), ParameterError);
  EXPECT_THROW(DefenseSpec::parse("snd:abc"), ParameterError);
}

TEST(ScoreQuery, NoDefenseIsForwardProbs) {
  const auto& m = oracle::desk_model();
  Oracle o(m, DefenseSpec::none(), 1, 100, {8, 8, 1});
  for (std::uint64_t s = 0; s < 10; ++s) {
    ImageTensor x({8, 8, 1}, oracle::uniform_point(64, 0.0, 1.0, s));
    EXPECT_EQ(o.score_query(x), m.forward_probs(x));
  }
}

TEST(ScoreQuery, ZeroSigmaIsUndefended) {
  const auto& m = oracle::desk_model();
  Oracle o(m, DefenseSpec::snd(0.0), 1, 100, {8, 8, 1});
  ImageTensor x({8, 8, 1}, oracle::uniform_point(64, 0.0, 1.0, 3));
  const Vec ref = m.forward_probs(x);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(o.score_query(x), ref);
}

TEST(DecisionQuery, FlatBoundaryGivesCoinFlips) {
  // sphere of radius 5 centred far outside the cube: locally flat at x
  RadialModel m(Vec{0.5, -4.5}, 5.0);
  Oracle o(m, DefenseSpec::snd(0.05), 17, 1000);
  const ImageTensor x = ImageTensor::flat({0.5, 0.5});
  std::size_t inside = 0;
  for (int i = 0; i < 1000; ++i) inside += o.decision_query(x) == 0 ? 1 : 0;
  EXPECT_NEAR(double(inside) / 1000.0, 0.5, 0.05);
}

TEST(DecisionQuery, StableWithoutDefense) {
  const auto& m = oracle::desk_model();
  const auto d = generate_dataset(DatasetSpec{});
  Oracle o(m, DefenseSpec::none(), 1, 100, {8, 8, 1});
  const std::size_t first = o.decision_query(d.images[0]);
  for (int i = 1; i < 100; ++i) EXPECT_EQ(o.decision_query(d.images[0]), first);
}

TEST(DecisionQuery, CleanConfidentPointRarelyFlips) {
  const auto& m = oracle::desk_model();
  const auto d = generate_dataset(DatasetSpec{});
  Oracle o(m, DefenseSpec::snd(0.0693), 2, 1000, {8, 8, 1});
  const std::size_t c = m.predict_label(d.images[1]);
  std::size_t flips = 0;
  for (int i = 0; i < 1000; ++i) flips += o.decision_query(d.images[1]) != c ? 1 : 0;
  EXPECT_LE(flips, 50u);
}

TEST(DecisionQuery, BudgetExceededOnSixthCall) {
  const auto m = LinearModel::zeros(2, 3);
  Oracle o(m, DefenseSpec::none(), 1, 5);
  const auto x = ImageTensor::flat({0.1, 0.2, 0.3});
  for (int i = 0; i < 5; ++i) o.decision_query(x);
  EXPECT_THROW(o.decision_query(x), BudgetExceeded);
  EXPECT_EQ(o.ledger().physical(), 5u);
  EXPECT_EQ(o.ledger().logical(), 5u);
}

TEST(Oracle, DimensionChecks) {
  const auto m = LinearModel::zeros(2, 3);
  Oracle o(m, DefenseSpec::none(), 1, 5);
  EXPECT_THROW(o.score_query(ImageTensor::flat({1, 2})), DimensionError);
  // resize-pad enlarges the image, which this model cannot take
  EXPECT_THROW(Oracle(oracle::desk_model(), DefenseSpec::rand_resize_pad(), 1, 5, {8, 8, 1}), DimensionError);
}

TEST(Oracle, LogRecordsEveryQuery) {
  const auto m = oracle::random_linear(3, 4, 1.0, 2);
  Oracle o(m, DefenseSpec::snd(0.1), 1, 10);
  o.set_log_mode(LogMode::kFull);
  const auto x0 = ImageTensor::flat({0.5, 0.5, 0.5, 0.5});
  o.set_reference(x0);
  o.score_query(x0);
  o.decision_query(ImageTensor::flat({0.5, 0.5, 0.5, 0.8}));
  ASSERT_EQ(o.log().size(), 2u);
  EXPECT_EQ(o.log()[0].index, 1u);
  EXPECT_EQ(o.log()[0].kind, QueryKind::kScore);
  EXPECT_DOUBLE_EQ(o.log()[1].l2_from_x0, 0.3);
  EXPECT_EQ(o.log()[1].input.size(), 4u);
  std::ostringstream csv;
  o.write_log_csv(csv);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "query_index,kind,l2_from_x0,output_label_or_top_prob");
}

TEST(Oracle, FreshNoisePerQuery) {
  const auto m = LinearModel::zeros(2, 16);
  Oracle o(m, DefenseSpec::snd(0.05), 9, 2000);
  o.set_clip_after_noise(false);
  const auto x = ImageTensor::flat(Vec(16, 0.5));
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (int i = 0; i < 1000; ++i) {
    o.score_query(x);
    const Vec a = subtract(o.last_model_input().values(), x.values());
    o.score_query(x);
    const Vec b = subtract(o.last_model_input().values(), x.values());
    sxy += dot(a, b);
    sxx += dot(a, a);
    syy += dot(b, b);
  }
  EXPECT_LT(std::abs(sxy / std::sqrt(sxx * syy)), 0.02);
}

TEST(BetaSnd, UnitScaleReproducesSnd) {
  const ImageTensor x({4, 4, 1}, 0.5);
  SeededRng a(5), b(5);
  EXPECT_EQ(apply_scaled_snd(x, 0.1, 1.0, a), apply_snd(x, 0.1, b));
}

TEST(BetaSnd, NoiseNormUniformScale) {
  SeededRng rng(31);
  EXPECT_NEAR(mean_noise_norm(DefenseSpec::beta_snd(0.02, 1, 1), 3072, 10000, rng), 0.552, 0.01);
}

TEST(BetaSnd, NoiseNormBeta22) {
  SeededRng rng(32);
  EXPECT_NEAR(mean_noise_norm(DefenseSpec::beta_snd(0.01, 2, 2), 3072, 10000, rng), 0.275, 0.006);
}

TEST(RandResizePad, UnitScaleZeroOffsetIsIdentity) {
  ImageTensor x({8, 8, 1}, oracle::uniform_point(64, 0.0, 1.0, 8));
  EXPECT_EQ(resize_pad(x, 8, 8, 0, 0, x.shape()), x);
  SeededRng rng(1);
  EXPECT_EQ(apply_rand_resize_pad(x, 1.0, 1.0, rng), x);
}

TEST(RandResizePad, CanvasRule) {
  EXPECT_EQ(resize_pad_canvas({8, 8, 1}, 331.0 / 299.0).width, 9u);
  EXPECT_EQ(DefenseSpec::rand_resize_pad().model_shape({8, 8, 1}), (Shape{9, 9, 1}));
}

TEST(RandResizePad, ConstantImageMeanPreserved) {
  const ImageTensor x({8, 8, 1}, 0.6);
  const auto big = bilinear_resize(x, 9, 9);
  for (double v : big.values()) EXPECT_NEAR(v, 0.6, 1e-12);
  SeededRng rng(3);
  for (int t = 0; t < 20; ++t) {
    const auto y = apply_rand_resize_pad(x, 310.0 / 299.0, 331.0 / 299.0, rng);
    double s = 0.0;
    std::size_t n = 0;
    for (double v : y.values()) {
      if (v != 0.0) {
        s += v;
        ++n;
      }
    }
    ASSERT_GT(n, 0u);
    EXPECT_NEAR(s / double(n), 0.6, 0.012);
  }
}
