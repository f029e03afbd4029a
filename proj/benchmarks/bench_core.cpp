#include <benchmark/benchmark.h>

#include "snd/attacks_decision.hpp"
#include "snd/dct.hpp"
#include "snd/grad_estim.hpp"
#include "snd/loss.hpp"
#include "snd/oracle.hpp"
#include "snd/training.hpp"

using namespace snd;

namespace {

const Shape kShape{8, 8, 1};

ImageTensor point(std::uint64_t seed, const Shape& shape = kShape) {
  SeededRng rng(seed);
  Vec v(shape.size());
  for (double& e : v) e = rng.uniform(0.2, 0.8);
  return ImageTensor(shape, v);
}

const MlpModel& model() {
  static const MlpModel m = init_mlp(64, {32}, 4, 1);
  return m;
}

}  // namespace

static void BM_MlpForward(benchmark::State& st) {
  const ImageTensor x = point(1);
  for (auto _ : st) benchmark::DoNotOptimize(model().forward_probs(x.values()));
}
BENCHMARK(BM_MlpForward);

static void BM_Dct2(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const ImageTensor x = point(2, {n, n, 3});
  for (auto _ : st) benchmark::DoNotOptimize(dct2(x));
}
BENCHMARK(BM_Dct2)->Arg(8)->Arg(32);

static void BM_BinarySearch(benchmark::State& st) {
  const ImageTensor x0 = point(3);
  const std::size_t c0 = model().predict_label(x0);
  // any random point with another label closes the bracket
  ImageTensor far = x0;
  for (std::uint64_t s = 100; s < 200 && model().predict_label(far) == c0; ++s) far = point(s);
  const std::size_t c1 = model().predict_label(far);
  if (c1 == c0) {
    st.SkipWithError("no label change found");
    return;
  }
  for (auto _ : st) {
    Oracle o(model(), DefenseSpec::none(), 1, 1000, kShape);
    benchmark::DoNotOptimize(binary_search_to_boundary(o, x0, c0, far, c1, 1e-4));
  }
}
BENCHMARK(BM_BinarySearch);

static void BM_RgfEstimate(benchmark::State& st) {
  const ImageTensor x = point(4);
  const LossForm form = LossForm::untargeted(model().predict_label(x));
  RgfConfig cfg;
  cfg.samples = static_cast<std::size_t>(st.range(0));
  SeededRng rng(5);
  for (auto _ : st) {
    Oracle o(model(), DefenseSpec::snd(0.01), 1, cfg.samples + 1, kShape);
    benchmark::DoNotOptimize(rgf_estimate(o, x, form, cfg, rng));
  }
}
BENCHMARK(BM_RgfEstimate)->Arg(20)->Arg(100);

// a few HSJA iterations from a fixed start
static void BM_HsjaSteps(benchmark::State& st) {
  const ImageTensor x0 = point(6);
  const std::size_t c0 = model().predict_label(x0);
  for (auto _ : st) {
    Oracle o(model(), DefenseSpec::none(), 1, 5000, kShape);
    Referee ref(model());
    SeededRng rng(7);
    benchmark::DoNotOptimize(hsja_attack(o, x0, c0, AttackBudget{5000, 2.0, 3}, HsjaParams{}, rng, ref));
  }
}
BENCHMARK(BM_HsjaSteps);
BENCHMARK_MAIN();
