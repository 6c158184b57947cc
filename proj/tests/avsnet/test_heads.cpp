#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "avs/avsnet/heads.hpp"
#include "../support/module_check.hpp"

using namespace avs;
using namespace avs::avsnet;
using avs::testing::random_tensor;

namespace {

// Dense reference: loops over heads and tokens without any shared helpers.
Tensor<double> attention_oracle(const Tensor<double>& fv, const Tensor<double>& fa, const Tensor<double>& wq,
                                const Tensor<double>& wk, const Tensor<double>& wv, int heads) {
  const int N = fv.dim(0), M = fa.dim(0), E = fv.dim(1), dk = E / heads;
  auto proj = [&](const Tensor<double>& x, const Tensor<double>& w) {
    Tensor<double> y({x.dim(0), E});
    for (int i = 0; i < x.dim(0); ++i)
      for (int o = 0; o < E; ++o)
        for (int e = 0; e < E; ++e) y.at(i, o) += x.at(i, e) * w.at(e, o);
    return y;
  };
  const auto Q = proj(fv, wq), K = proj(fa, wk), V = proj(fa, wv);
  Tensor<double> out = fv;
  for (int h = 0; h < heads; ++h)
    for (int i = 0; i < N; ++i) {
      std::vector<double> s(M);
      double mx = -1e300;
      for (int j = 0; j < M; ++j) {
        for (int d = 0; d < dk; ++d) s[j] += Q.at(i, h * dk + d) * K.at(j, h * dk + d);
        s[j] /= std::sqrt(static_cast<double>(dk));
        mx = std::max(mx, s[j]);
      }
      double z = 0.0;
      for (double& v : s) z += (v = std::exp(v - mx));
      for (int d = 0; d < dk; ++d)
        for (int j = 0; j < M; ++j) out.at(i, h * dk + d) += s[j] / z * V.at(j, h * dk + d);
    }
  return out;
}

double binomial_pmf(int K, int k, double q) {
  return std::tgamma(K) / (std::tgamma(k + 1.0) * std::tgamma(K - k)) * std::pow(q, k) * std::pow(1 - q, K - 1 - k);
}

}  // namespace

TEST(CrossModalAttention, MatchesDenseOracle) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto fv = random_tensor({4, 8}, rng), fa = random_tensor({4, 8}, rng);
    const auto wq = random_tensor({8, 8}, rng), wk = random_tensor({8, 8}, rng), wv = random_tensor({8, 8}, rng);
    const auto out = cross_modal_attention(fv, fa, wq, wk, wv, 2);
    const auto ref = attention_oracle(fv, fa, wq, wk, wv, 2);
    for (std::size_t i = 0; i < out.size(); ++i) EXPECT_NEAR(out[i], ref[i], 1e-6);
  }
}

TEST(CrossModalAttention, ZeroValueProjectionIsSkipOnly) {
  std::mt19937_64 rng(2);
  const auto fv = random_tensor({8, 16}, rng), fa = random_tensor({8, 16}, rng);
  const auto out = cross_modal_attention(fv, fa, random_tensor({16, 16}, rng), random_tensor({16, 16}, rng),
                                         Tensor<double>({16, 16}), 4);
  EXPECT_EQ(out, fv);
}

TEST(CrossModalAttention, EqualValueRowsIgnoreAttentionWeights) {
  std::mt19937_64 rng(3);
  const int E = 8;
  // every audio token identical, so every value row equals u W_V
  const auto u = random_tensor({1, E}, rng);
  Tensor<double> fa({5, E});
  for (int i = 0; i < 5; ++i)
    for (int e = 0; e < E; ++e) fa.at(i, e) = u.at(0, e);
  const auto fv = random_tensor({5, E}, rng);
  const auto wv = random_tensor({E, E}, rng);
  const auto out = cross_modal_attention(fv, fa, random_tensor({E, E}, rng), random_tensor({E, E}, rng), wv, 2);
  for (int i = 0; i < 5; ++i)
    for (int o = 0; o < E; ++o) {
      double pu = 0.0;
      for (int e = 0; e < E; ++e) pu += u.at(0, e) * wv.at(e, o);
      EXPECT_NEAR(out.at(i, o), pu + fv.at(i, o), 1e-12);
    }
}

TEST(CrossModalAttention, RejectsMismatchedDimensions) {
  const Tensor<double> w8({8, 8});
  EXPECT_THROW(cross_modal_attention(Tensor<double>({4, 8}), Tensor<double>({4, 6}), w8, w8, w8, 2),
               std::invalid_argument);
  EXPECT_THROW(cross_modal_attention(Tensor<double>({4, 8}), Tensor<double>({3, 8}), w8, w8, w8, 2),
               std::invalid_argument);
  EXPECT_THROW(cross_modal_attention(Tensor<double>({4, 8}), Tensor<double>({4, 8}), w8, w8, w8, 3),
               std::invalid_argument);
}

TEST(CrossModalAttention, Gradients) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Tensor<double>> in{random_tensor({4, 8}, rng), random_tensor({4, 8}, rng), random_tensor({8, 8}, rng),
                                   random_tensor({8, 8}, rng), random_tensor({8, 8}, rng)};
    auto rep = grad_check<double>(
        [](const auto& x) { return cross_modal_attention(x[0], x[1], x[2], x[3], x[4], 2); },
        [](const auto& x, const Tensor<double>& g) {
          AttentionCache<double> c;
          cross_modal_attention(x[0], x[1], x[2], x[3], x[4], 2, &c);
          auto gr = cross_modal_attention_backward(x[0], x[1], x[2], x[3], x[4], 2, c, g);
          return std::vector<Tensor<double>>{gr.fv, gr.fa, gr.wq, gr.wk, gr.wv};
        },
        in, {0, 1e-3, 0, static_cast<std::uint64_t>(trial)});
    ASSERT_TRUE(rep.passed(1e-5)) << rep.worst;
  }
}

TEST(SeedBins, UniformLogitsGiveEqualWidths) {
  const auto b = bins_from_logits(Tensor<double>({8}, 0.3), 1.0, 9.0);
  for (int k = 0; k < 8; ++k) {
    EXPECT_NEAR(b.widths[k], 1.0, 1e-12);
    EXPECT_NEAR(b.centers[k], 1.0 + (k + 0.5), 1e-12);
  }
}

TEST(SeedBins, OrderedAndNormalizedForRandomLogits) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto logits = random_tensor({64}, rng, -8, 8);
    const auto b = bins_from_logits(logits, 0.1, 12.0);
    double s = 0.0;
    for (int k = 0; k < 64; ++k) {
      s += b.widths[k];
      EXPECT_GT(b.widths[k], 0.0);
      if (k > 0) {
        EXPECT_GT(b.centers[k], b.centers[k - 1]);
      }
      EXPECT_GE(b.centers[k], 0.1);
      EXPECT_LE(b.centers[k], 12.0);
    }
    EXPECT_NEAR(s, 11.9, 1e-6);
    // single precision keeps the order (ties allowed once widths drop below an ulp) and the total
    const auto bf = bins_from_logits(logits.cast<float>(), 0.1, 12.0);
    double sf = 0.0;
    for (int k = 0; k < 64; ++k) {
      sf += bf.widths[k];
      if (k > 0) {
        EXPECT_GE(bf.centers[k], bf.centers[k - 1]);
      }
    }
    EXPECT_NEAR(sf, 11.9, 1e-5);
  }
}

TEST(SeedBins, Gradients) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Tensor<double>> in{random_tensor({6, 8}, rng), random_tensor({8, 5}, rng), random_tensor({5}, rng)};
    auto rep = grad_check<double>(
        [](const auto& x) { return seed_bins(x[0], x[1], x[2], 0.5, 10.0).bins.centers; },
        [](const auto& x, const Tensor<double>& g) {
          const auto s = seed_bins(x[0], x[1], x[2], 0.5, 10.0);
          auto gr = seed_bins_backward(x[0], x[1], s, g, 0.5, 10.0);
          return std::vector<Tensor<double>>{gr.fused, gr.w, gr.b};
        },
        in, {0, 1e-3, 0, static_cast<std::uint64_t>(trial)});
    ASSERT_TRUE(rep.passed(1e-5)) << rep.worst;
  }
}

TEST(Attractor, ScalarCases) {
  EXPECT_EQ(attractor_pull(3.0, 3.0, 300, 2), 0.0);
  EXPECT_GT(attractor_pull(3.5, 3.0, 300, 2), 0.0);
  EXPECT_LT(attractor_pull(2.5, 3.0, 300, 2), 0.0);
  // (4 - 2) / (1 + 1 * 2^2)
  EXPECT_DOUBLE_EQ(attractor_pull(4.0, 2.0, 1.0, 2), 0.4);
}

TEST(Attractor, AdjustKeepsOrderAndRange) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto seed = bins_from_logits(random_tensor({16}, rng, -2, 2), 0.5, 10.0);
    Tensor<double> c({16, 3, 4});
    for (int k = 0; k < 16; ++k)
      for (int p = 0; p < 12; ++p) c[k * 12 + p] = seed.centers[k];
    const auto a = random_tensor({4, 3, 4}, rng, 0.5, 10.0);
    const auto r = attractor_adjust(c, a, 0.5, 2, 0.5, 10.0);
    for (int p = 0; p < 12; ++p)
      for (int k = 0; k < 16; ++k) {
        EXPECT_GE(r.centers[k * 12 + p], 0.5);
        EXPECT_LE(r.centers[k * 12 + p], 10.0);
        if (k > 0) {
          EXPECT_GE(r.centers[k * 12 + p], r.centers[(k - 1) * 12 + p]);
        }
      }
  }
}

TEST(Attractor, CentersMoveTowardSingleAttractor) {
  Tensor<double> c({3, 1, 1}, {1.0, 2.0, 3.0});
  Tensor<double> a({1, 1, 1}, {5.0});
  const auto r = attractor_adjust(c, a, 1.0, 2, 0.0, 10.0);
  for (int k = 0; k < 3; ++k) EXPECT_GT(r.centers[k], c[k]);
}

TEST(Attractor, Gradients) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    auto c = random_tensor({6, 2, 3}, rng, 1.0, 5.0);
    auto a = random_tensor({3, 2, 3}, rng, 1.0, 5.0);
    auto rep = grad_check<double>(
        [](const auto& x) { return attractor_adjust(x[0], x[1], 2.0, 2, 0.5, 6.0).centers; },
        [](const auto& x, const Tensor<double>& g) {
          const auto r = attractor_adjust(x[0], x[1], 2.0, 2, 0.5, 6.0);
          auto gr = attractor_adjust_backward(x[0], x[1], 2.0, 2, 0.5, 6.0, r, g);
          return std::vector<Tensor<double>>{gr.centers, gr.attractors};
        },
        {c, a}, {0, 1e-3, 0, static_cast<std::uint64_t>(trial)});
    ASSERT_TRUE(rep.passed(1e-5)) << rep.worst;
  }
}

TEST(LogBinomial, NormalizedAndMatchesPmf) {
  Tensor<double> q({1, 1}, 0.25), t({1, 1}, 1.0);
  const auto p = log_binomial_probs(q, t, 9);
  double s = 0.0;
  for (int k = 0; k < 9; ++k) {
    EXPECT_NEAR(p[k], binomial_pmf(9, k, 0.25), 1e-6);
    s += p[k];
  }
  EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(LogBinomial, SymmetricAtHalf) {
  Tensor<double> q({1, 1}, 0.5), t({1, 1}, 1.0);
  const auto p = log_binomial_probs(q, t, 9);
  int best = 0;
  for (int k = 0; k < 9; ++k) {
    EXPECT_NEAR(p[k], p[8 - k], 1e-12);
    if (p[k] > p[best]) best = k;
  }
  EXPECT_EQ(best, 4);
}

TEST(LogBinomial, RejectsInvalidParameters) {
  EXPECT_THROW(log_binomial_probs(Tensor<double>({1}, 1.0), Tensor<double>({1}, 1.0), 4), std::invalid_argument);
  EXPECT_THROW(log_binomial_probs(Tensor<double>({1}, 0.5), Tensor<double>({1}, 0.0), 4), std::invalid_argument);
}

TEST(LogBinomial, Gradients) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const auto q = random_tensor({2, 3}, rng, 0.05, 0.95), t = random_tensor({2, 3}, rng, 0.3, 3.0);
    auto rep = grad_check<double>(
        [](const auto& x) { return log_binomial_probs(x[0], x[1], 7); },
        [](const auto& x, const Tensor<double>& g) {
          const auto p = log_binomial_probs(x[0], x[1], 7);
          auto gr = log_binomial_backward(x[0], x[1], p, g);
          return std::vector<Tensor<double>>{gr.q, gr.t};
        },
        {q, t}, {0, 1e-3, 0, static_cast<std::uint64_t>(trial)});
    ASSERT_TRUE(rep.passed(1e-5)) << rep.worst;
  }
}

TEST(PseudoDepth, OneHotUniformAndDotProduct) {
  Tensor<double> c({4, 1, 1}, {1.0, 2.0, 3.0, 4.0});
  Tensor<double> onehot({4, 1, 1}, {0.0, 0.0, 1.0, 0.0});
  EXPECT_EQ(pseudo_depth(onehot, c)[0], 3.0);
  const auto bins = bins_from_logits(Tensor<double>({4}), 1.0, 5.0);
  Tensor<double> uni({4, 1, 1}, 0.25);
  Tensor<double> cu({4, 1, 1}, std::vector<double>(bins.centers.values().begin(), bins.centers.values().end()));
  EXPECT_NEAR(pseudo_depth(uni, cu)[0], 3.0, 1e-12);
  std::mt19937_64 rng(10);
  const auto p = random_tensor({5, 2, 2}, rng, 0, 1), cc = random_tensor({5, 2, 2}, rng, 1, 9);
  const auto d = pseudo_depth(p, cc);
  for (int px = 0; px < 4; ++px) {
    double ref = 0.0;
    for (int k = 0; k < 5; ++k) ref += p[k * 4 + px] * cc[k * 4 + px];
    EXPECT_NEAR(d[px], ref, 1e-12);
  }
}

TEST(PseudoDepth, Gradients) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    auto rep = grad_check<double>(
        [](const auto& x) { return pseudo_depth(x[0], x[1]); },
        [](const auto& x, const Tensor<double>& g) {
          auto gr = pseudo_depth_backward(x[0], x[1], g);
          return std::vector<Tensor<double>>{gr.probs, gr.centers};
        },
        {random_tensor({5, 2, 3}, rng, 0, 1), random_tensor({5, 2, 3}, rng, 1, 9)},
        {0, 1e-3, 0, static_cast<std::uint64_t>(trial)});
    ASSERT_TRUE(rep.passed(1e-5)) << rep.worst;
  }
}

TEST(SiLoss, ClosedForms) {
  std::mt19937_64 rng(12);
  const auto gt = random_tensor({6, 7}, rng, 0.5, 10.0);
  EXPECT_EQ(si_loss(gt, gt), 0.0);
  for (double c : {0.5, std::numbers::e, 3.0}) {
    Tensor<double> pred = gt;
    pred *= c;
    EXPECT_NEAR(si_loss(pred, gt), 10.0 * std::sqrt(0.15) * std::abs(std::log(c)), 1e-9);
  }
  Tensor<double> pe = gt;
  pe *= std::numbers::e;
  EXPECT_NEAR(si_loss(pe, gt), 3.8730, 1e-4);
  Tensor<double> one_pred({1, 1}, 2.0), one_gt({1, 1}, 1.0);
  EXPECT_NEAR(si_loss(one_pred, one_gt), 2.6845, 1e-4);
}

TEST(SiLoss, IgnoresInvalidPixelsAndRejectsEmptyMask) {
  Tensor<double> pred({3}, {2.0, 5.0, 7.0}), gt({3}, {1.0, 0.0, 0.0});
  EXPECT_NEAR(si_loss(pred, gt), 10.0 * std::log(2.0) * std::sqrt(0.15), 1e-12);
  EXPECT_THROW(si_loss(pred, Tensor<double>({3})), std::invalid_argument);
}

TEST(SiLoss, Gradients) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    auto gt = random_tensor({4, 5}, rng, 0.5, 10.0);
    gt[3] = 0.0;
    auto rep = grad_check<double>(
        [&](const auto& x) { return Tensor<double>({1}, si_loss(x[0], gt)); },
        [&](const auto& x, const Tensor<double>& g) {
          auto gp = si_loss_backward(x[0], gt);
          gp *= g[0];
          return std::vector<Tensor<double>>{gp};
        },
        {random_tensor({4, 5}, rng, 0.5, 10.0)}, {0, 1e-3, 0, static_cast<std::uint64_t>(trial)});
    ASSERT_TRUE(rep.passed(1e-5)) << rep.worst;
  }
}
