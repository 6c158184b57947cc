#include <gtest/gtest.h>

#include <random>

#include "avs/core/grad_check.hpp"
#include "avs/core/ops.hpp"

using namespace avs;

namespace {

Tensor<double> random_tensor(const Shape& shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  Tensor<double> t(shape);
  for (auto& v : t.values()) v = d(rng);
  return t;
}

}  // namespace

TEST(GradCheck, ConstantFunctionHasZeroGradients) {
  ForwardFn<double> f = [](const std::vector<Tensor<double>>&) { return Tensor<double>({1}, 4.0); };
  BackwardFn<double> b = [](const std::vector<Tensor<double>>& in, const Tensor<double>&) {
    return std::vector<Tensor<double>>{Tensor<double>(in[0].shape())};
  };
  const auto r = grad_check(f, b, {Tensor<double>({3}, 1.0)});
  EXPECT_TRUE(r.passed(1e-12));
  EXPECT_EQ(r.max_abs_error, 0.0);
}

TEST(GradCheck, SquareAtThree) {
  ForwardFn<double> f = [](const std::vector<Tensor<double>>& in) {
    return Tensor<double>({1}, in[0][0] * in[0][0]);
  };
  BackwardFn<double> b = [](const std::vector<Tensor<double>>& in, const Tensor<double>& g) {
    return std::vector<Tensor<double>>{Tensor<double>({1}, 2.0 * in[0][0] * g[0])};
  };
  const auto r = grad_check(f, b, {Tensor<double>({1}, 3.0)});
  EXPECT_TRUE(r.passed(1e-8)) << r.worst;
}

TEST(GradCheck, FlagsWrongGradientAndNonFinite) {
  ForwardFn<double> f = [](const std::vector<Tensor<double>>& in) { return Tensor<double>({1}, 3.0 * in[0][0]); };
  BackwardFn<double> wrong = [](const std::vector<Tensor<double>>&, const Tensor<double>& g) {
    return std::vector<Tensor<double>>{Tensor<double>({1}, 2.0 * g[0])};
  };
  EXPECT_FALSE(grad_check(f, wrong, {Tensor<double>({1}, 1.0)}).passed(1e-3));

  ForwardFn<double> logf = [](const std::vector<Tensor<double>>& in) {
    return Tensor<double>({1}, std::log(in[0][0]));
  };
  BackwardFn<double> logb = [](const std::vector<Tensor<double>>& in, const Tensor<double>& g) {
    return std::vector<Tensor<double>>{Tensor<double>({1}, g[0] / in[0][0])};
  };
  const auto r = grad_check(logf, logb, {Tensor<double>({1}, -1.0)});
  EXPECT_TRUE(r.non_finite);
  EXPECT_FALSE(r.passed(1.0));
}

TEST(GradCheck, Conv2dHundredInstances) {
  std::mt19937_64 rng(100);
  for (int trial = 0; trial < 100; ++trial) {
    const int stride = 1 + trial % 2;
    const auto x = random_tensor({1, 2, 5, 6}, rng);
    const auto w = random_tensor({3, 2, 3, 3}, rng);
    const auto bias = random_tensor({3}, rng);
    ForwardFn<double> f = [stride](const std::vector<Tensor<double>>& in) {
      return conv2d(in[0], in[1], in[2], stride, 1);
    };
    BackwardFn<double> b = [stride](const std::vector<Tensor<double>>& in, const Tensor<double>& g) {
      auto gr = conv2d_backward(in[0], in[1], g, stride, 1);
      return std::vector<Tensor<double>>{gr.input, gr.weight, gr.bias};
    };
    const auto r = grad_check(f, b, {x, w, bias}, {.seed = static_cast<std::uint64_t>(trial)});
    ASSERT_TRUE(r.passed(1e-5)) << "trial " << trial << ": " << r.worst;
  }
}

TEST(GradCheck, SoftmaxBilinearLinearActivations) {
  std::mt19937_64 rng(200);
  for (int trial = 0; trial < 100; ++trial) {
    const auto x = random_tensor({3, 4, 5}, rng, -3, 3);
    const int axis = trial % 3;
    {
      ForwardFn<double> f = [axis](const std::vector<Tensor<double>>& in) { return softmax(in[0], axis); };
      BackwardFn<double> b = [axis](const std::vector<Tensor<double>>& in, const Tensor<double>& g) {
        return std::vector<Tensor<double>>{softmax_backward(softmax(in[0], axis), g, axis)};
      };
      ASSERT_TRUE(grad_check(f, b, {x}).passed(1e-5));
    }
    {
      const int oh = 2 + trial % 7, ow = 3 + trial % 5;
      ForwardFn<double> f = [=](const std::vector<Tensor<double>>& in) { return bilinear_resize(in[0], oh, ow); };
      BackwardFn<double> b = [=](const std::vector<Tensor<double>>&, const Tensor<double>& g) {
        return std::vector<Tensor<double>>{bilinear_resize_backward(g, 4, 5)};
      };
      ASSERT_TRUE(grad_check(f, b, {x}).passed(1e-5));
    }
    {
      const auto w = random_tensor({5, 2}, rng), bias = random_tensor({2}, rng);
      const auto xs = x.reshaped({12, 5});
      ForwardFn<double> f = [](const std::vector<Tensor<double>>& in) { return linear(in[0], in[1], in[2]); };
      BackwardFn<double> b = [](const std::vector<Tensor<double>>& in, const Tensor<double>& g) {
        auto gr = linear_backward(in[0], in[1], g);
        return std::vector<Tensor<double>>{gr.x, gr.w, gr.b};
      };
      ASSERT_TRUE(grad_check(f, b, {xs, w, bias}).passed(1e-5));
    }
    {
      ForwardFn<double> f = [](const std::vector<Tensor<double>>& in) {
        auto y = elu(in[0]);
        auto s = sigmoid(in[0]);
        auto p = softplus(in[0]);
        auto r = relu(in[0]);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += 2 * s[i] + 3 * p[i] + 0.5 * r[i];
        return y;
      };
      BackwardFn<double> b = [](const std::vector<Tensor<double>>& in, const Tensor<double>& g) {
        auto ge = elu_backward(in[0], g);
        auto gs = sigmoid_backward(sigmoid(in[0]), g);
        auto gp = softplus_backward(in[0], g);
        auto gr = relu_backward(in[0], g);
        for (std::size_t i = 0; i < ge.size(); ++i) ge[i] += 2 * gs[i] + 3 * gp[i] + 0.5 * gr[i];
        return std::vector<Tensor<double>>{ge};
      };
      ASSERT_TRUE(grad_check(f, b, {x}).passed(1e-5));
    }
  }
}

TEST(GradCheck, SinglePrecisionWithinLooserTolerance) {
  std::mt19937_64 rng(300);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = random_tensor({1, 2, 5, 5}, rng).cast<float>();
    const auto w = random_tensor({2, 2, 3, 3}, rng).cast<float>();
    ForwardFn<float> f = [](const std::vector<Tensor<float>>& in) { return conv2d(in[0], in[1], Tensor<float>{}, 1, 1); };
    BackwardFn<float> b = [](const std::vector<Tensor<float>>& in, const Tensor<float>& g) {
      auto gr = conv2d_backward(in[0], in[1], g, 1, 1);
      return std::vector<Tensor<float>>{gr.input, gr.weight};
    };
    const auto r = grad_check(f, b, {x, w}, {.floor = 1e-1});
    ASSERT_TRUE(r.passed(1e-3)) << r.worst;
  }
}
