#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "snd/dct.hpp"
#include "snd/errors.hpp"

using namespace snd;

namespace {

double max_abs(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST(Dct2, MatchesDefiningSum) {
  for (auto [w, h] : {std::pair{8u, 8u}, std::pair{5u, 3u}}) {
    const Vec px = oracle::uniform_point(w * h, 0.0, 1.0, w);
    const ImageTensor x({w, h, 1}, px);
    EXPECT_LT(max_abs(dct2(x).values(), oracle::naive_dct2(px, w, h)), 1e-12) << w << "x" << h;
  }
}

TEST(Dct2, InverseRoundTrip) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    const ImageTensor x({8, 8, 2}, oracle::uniform_point(128, 0.0, 1.0, s));
    ASSERT_LT(max_abs(idct2(dct2(x)).values(), x.values()), 1e-9);
  }
}

TEST(Dct2, ConstantImageHasOnlyDc) {
  const auto c = dct2(ImageTensor({8, 8, 1}, 0.3));
  EXPECT_NEAR(c[0], 0.3 * 8.0, 1e-12);
  for (std::size_t i = 1; i < c.size(); ++i) EXPECT_NEAR(c[i], 0.0, 1e-12);
}

TEST(Dct2, Parseval) {
  const ImageTensor x({8, 8, 1}, oracle::uniform_point(64, -1.0, 1.0, 77));
  EXPECT_NEAR(l2_norm(dct2(x).values()), l2_norm(x.values()), 1e-9);
}

TEST(Dct2, PerChannel) {
  ImageTensor x({4, 4, 2}, 0.0);
  for (std::size_t y = 0; y < 4; ++y)
    for (std::size_t u = 0; u < 4; ++u) x.at(u, y, 1) = 1.0;
  const auto c = dct2(x);
  EXPECT_NEAR(c.at(0, 0, 0), 0.0, 1e-12);
  EXPECT_NEAR(c.at(0, 0, 1), 4.0, 1e-12);
}

TEST(DctBasis, UnitNormAndInverseOfUnitCoefficient) {
  const Shape s{8, 8, 1};
  for (std::size_t r = 0; r < 8; ++r) {
    for (std::size_t c = 0; c < 8; ++c) {
      const auto b = dct_basis_image(s, r, c, 0);
      ASSERT_NEAR(l2_norm(b.values()), 1.0, 1e-9);
      const auto back = dct2(b);
      EXPECT_NEAR(back.at(c, r), 1.0, 1e-9);
    }
  }
}

TEST(StridedOrder, DocumentedPrefix) {
  const auto order = strided_order(8, 2);
  ASSERT_EQ(order.size(), 64u);
  const std::vector<Coefficient> head = {{0, 0}, {0, 2}, {0, 4}, {0, 6}, {2, 0}, {2, 2}};
  for (std::size_t i = 0; i < head.size(); ++i) EXPECT_EQ(order[i], head[i]) << i;
  // the (0,1) class starts after the 16 even-even coefficients
  EXPECT_EQ(order[16], (Coefficient{0, 1}));
  EXPECT_EQ(order[32], (Coefficient{1, 0}));
  EXPECT_EQ(order.back(), (Coefficient{7, 7}));
}

TEST(StridedOrder, VisitsEachCoefficientOnce) {
  const auto order = strided_order(5, 3);
  std::vector<int> seen(25, 0);
  for (const auto& c : order) ++seen[c.row * 5 + c.col];
  for (int v : seen) EXPECT_EQ(v, 1);
}
