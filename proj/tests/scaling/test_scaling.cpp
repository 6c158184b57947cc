#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "avs/scaling/scaling.hpp"

using namespace avs;
using namespace avs::scaling;

namespace {

Tensor<double> random_map(std::mt19937_64& rng, int h, int w, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  Tensor<double> t({h, w});
  for (auto& v : t.values()) v = d(rng);
  return t;
}

// Sorting-based median, independent of the nth_element implementation.
double sorted_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::pair<double, double> mean_std(const Tensor<double>& t) {
  double m = 0;
  for (double v : t.values()) m += v;
  m /= static_cast<double>(t.size());
  double s = 0;
  for (double v : t.values()) s += (v - m) * (v - m);
  return {m, std::sqrt(s / static_cast<double>(t.size()))};
}

}  // namespace

TEST(Median, OddAndEvenCounts) {
  EXPECT_DOUBLE_EQ(median({3, 1, 2}), 2.0);
  EXPECT_DOUBLE_EQ(median({4, 1, 3, 2}), 2.5);
  EXPECT_THROW(median({}), std::invalid_argument);
}

TEST(MedianScale, IdentityWhenMapsMatch) {
  std::mt19937_64 rng(1);
  const auto r = random_map(rng, 8, 8, 0.5, 5);
  const auto out = median_scale(r, r);
  EXPECT_DOUBLE_EQ(out.factor.s, 1.0);
  for (std::size_t i = 0; i < r.size(); ++i) EXPECT_DOUBLE_EQ(out.depth[i], r[i]);
}

TEST(MedianScale, FactorTwoDoublesEveryPixel) {
  Tensor<double> r({1, 3}, {1.0, 2.0, 3.0});
  Tensor<double> m({1, 3}, {1.0, 4.0, 9.0});
  const auto out = median_scale(r, m);
  EXPECT_DOUBLE_EQ(out.factor.s, 2.0);
  for (std::size_t i = 0; i < r.size(); ++i) EXPECT_DOUBLE_EQ(out.depth[i], 2.0 * r[i]);
}

TEST(MedianScale, MatchesPseudoMedianAndKeepsOrder) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int h = 1 + trial % 9, w = 2 + trial % 13;
    const auto r = random_map(rng, h, w, 1e-3, 10);
    const auto m = random_map(rng, h, w, 0.1, 20);
    const auto out = median_scale(r, m);
    const std::vector<double> mv(m.values().begin(), m.values().end());
    const std::vector<double> ov(out.depth.values().begin(), out.depth.values().end());
    EXPECT_NEAR(sorted_median(ov), sorted_median(mv), 1e-6);
    for (std::size_t i = 0; i < r.size(); ++i)
      for (std::size_t j = 0; j < r.size(); ++j)
        if (r[i] < r[j]) {
          ASSERT_LT(out.depth[i], out.depth[j]);
        }
  }
}

TEST(MedianScale, UsesJointValidPixelsOnly) {
  Tensor<double> r({1, 4}, {1.0, 2.0, 3.0, 100.0});
  Tensor<double> m({1, 4}, {2.0, 4.0, 6.0, 0.0});  // last pixel invalid in the pseudo map
  const auto out = median_scale(r, m);
  EXPECT_EQ(out.factor.pixels, 3u);
  EXPECT_DOUBLE_EQ(out.factor.s, 2.0);
  Tensor<double> mask({1, 4}, {1.0, 1.0, 0.0, 0.0});
  EXPECT_DOUBLE_EQ(median_scale(r, m, mask).factor.s, 2.0);
  EXPECT_EQ(median_scale(r, m, mask).factor.pixels, 2u);
}

TEST(MedianScale, RejectsDegenerateInput) {
  Tensor<double> r({1, 2}, {0.0, -1.0});
  Tensor<double> m({1, 2}, {1.0, 1.0});
  EXPECT_THROW(median_scale(r, m), std::invalid_argument);
  EXPECT_THROW(median_scale(Tensor<double>({1, 2}, 1.0), Tensor<double>({2, 1}, 1.0)), std::invalid_argument);
}

TEST(MeanStdScale, IdentityAndAffineRecovery) {
  std::mt19937_64 rng(3);
  const auto m = random_map(rng, 6, 7, 0.5, 8);
  const auto same = meanstd_scale(m, m);
  for (std::size_t i = 0; i < m.size(); ++i) EXPECT_NEAR(same.depth[i], m[i], 1e-12);
  Tensor<double> r(m.shape());
  for (std::size_t i = 0; i < m.size(); ++i) r[i] = 0.3 * m[i] + 2.0;
  const auto rec = meanstd_scale(r, m);
  for (std::size_t i = 0; i < m.size(); ++i) EXPECT_NEAR(rec.depth[i], m[i], 1e-9);
}

TEST(MeanStdScale, MatchesMomentsBeforeClamp) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto r = random_map(rng, 5, 9, 0.1, 3);
    const auto m = random_map(rng, 5, 9, 4, 9);  // narrow enough that the floor never binds
    const auto out = meanstd_scale(r, m);
    const auto [mo, so] = mean_std(out.depth);
    const auto [mm, sm] = mean_std(m);
    EXPECT_NEAR(mo, mm, 1e-6);
    EXPECT_NEAR(so, sm, 1e-6);
  }
}

TEST(MeanStdScale, ClampsAndRejectsConstant) {
  Tensor<double> r({1, 3}, {1.0, 2.0, 100.0});
  Tensor<double> m({1, 3}, {5.0, 5.1, 5.2});
  const auto out = meanstd_scale(r, m);
  for (double v : out.depth.values()) EXPECT_GE(v, kMeanStdFloor);
  EXPECT_THROW(meanstd_scale(Tensor<double>({1, 3}, 2.0), m), std::invalid_argument);
}

TEST(Scaling, IdempotentForBothMethods) {
  std::mt19937_64 rng(5);
  const auto r = random_map(rng, 8, 8, 0.2, 4), m = random_map(rng, 8, 8, 1, 9);
  for (Method method : {Method::Median, Method::MeanStd}) {
    const auto once = scale(method, r, m);
    const auto twice = scale(method, once.depth, m);
    for (std::size_t i = 0; i < r.size(); ++i) EXPECT_NEAR(twice.depth[i], once.depth[i], 1e-6);
  }
}

TEST(ScaleFactor, TextRoundTrip) {
  ScaleFactor f;
  f.method = Method::MeanStd;
  f.mu_r = 0.1;
  f.sigma_r = 0.2;
  f.mu_m = 3.3;
  f.sigma_m = 1.0 / 3.0;
  f.pixels = 42;
  const auto g = ScaleFactor::parse(f.to_string());
  EXPECT_EQ(g.method, f.method);
  EXPECT_EQ(g.sigma_m, f.sigma_m);
  EXPECT_EQ(g.pixels, 42u);
  EXPECT_EQ(parse_method("median"), Method::Median);
  EXPECT_THROW(parse_method("mean"), std::invalid_argument);
}
