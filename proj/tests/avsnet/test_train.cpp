#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

#include "avs/avsnet/train.hpp"
#include "../support/module_check.hpp"

using namespace avs;
using namespace avs::avsnet;
using avs::testing::random_tensor;

namespace {

AvsSample<float> ramp_sample(std::uint64_t seed, double near, double far) {
  std::mt19937_64 rng(seed);
  AvsSample<float> s;
  s.rgb = random_tensor({3, 64, 128}, rng, 0, 1).cast<float>();
  s.spec = random_tensor({2, 33, 20}, rng, 0, 1).cast<float>();
  s.depth = Tensor<float>({64, 128});
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 128; ++x)
      s.depth.at(y, x) = static_cast<float>(near + (far - near) * (y * 128 + x) / (64.0 * 128.0));
  return s;
}

}  // namespace

TEST(TrainAvsNet, OverfitsSingleSample) {
  AvsNet<float> net(AvsNetConfig{});
  AvsTrainConfig cfg;
  cfg.steps = 200;
  cfg.batch_size = 1;
  const auto r = train_avsnet(net, {ramp_sample(1, 1.0, 6.0)}, {}, cfg);
  ASSERT_EQ(r.loss_trace.size(), 200u);
  EXPECT_LT(r.loss_trace.back(), 0.1 * r.loss_trace.front())
      << "initial " << r.loss_trace.front() << " final " << r.loss_trace.back();
}

namespace {

AvsNetConfig small_config(bool audio) {
  AvsNetConfig c;
  c.height = 32;
  c.width = 32;
  c.encoder_channels = {4, 8, 12};
  c.decoder_channels = {8, 6};
  c.audio_channels = {4, 8, 12};
  c.heads = 2;
  c.bins = 16;
  c.bin_embedding = 8;
  c.attractors = {4, 1};
  c.use_audio = audio;
  return c;
}

std::vector<AvsSample<float>> small_set(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<AvsSample<float>> out;
  for (int i = 0; i < n; ++i) {
    AvsSample<float> s;
    s.rgb = random_tensor({3, 32, 32}, rng, 0, 1).cast<float>();
    s.spec = random_tensor({2, 17, 9}, rng, 0, 1).cast<float>();
    s.depth = random_tensor({32, 32}, rng, 1, 8).cast<float>();
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

TEST(TrainAvsNet, SeededTracesAreBitwiseIdentical) {
  const auto data = small_set(6, 2);
  AvsTrainConfig cfg;
  cfg.steps = 12;
  cfg.batch_size = 2;
  cfg.seed = 9;
  AvsNet<float> a(small_config(true)), b(small_config(true));
  const auto ra = train_avsnet(a, data, {}, cfg);
  const auto rb = train_avsnet(b, data, {}, cfg);
  ASSERT_EQ(ra.loss_trace.size(), rb.loss_trace.size());
  for (std::size_t i = 0; i < ra.loss_trace.size(); ++i) ASSERT_EQ(ra.loss_trace[i], rb.loss_trace[i]) << i;
}

TEST(TrainAvsNet, KeepsBestValidationWeights) {
  const auto data = small_set(4, 3);
  const auto val = small_set(2, 4);
  AvsTrainConfig cfg;
  cfg.steps = 20;
  cfg.batch_size = 2;
  cfg.eval_every = 5;
  cfg.lr = 5e-3;
  AvsNet<float> net(small_config(true));
  const auto r = train_avsnet(net, data, val, cfg);
  ASSERT_GE(r.best_step, 5);
  EXPECT_NEAR(evaluate_abs_rel(net, val, 12.0), r.best_val_abs_rel, 1e-6);
}

TEST(TrainAvsNet, WritesCheckpoint) {
  const auto dir = std::filesystem::temp_directory_path() / "avs_train_ckpt";
  std::filesystem::remove_all(dir);
  AvsTrainConfig cfg;
  cfg.steps = 2;
  cfg.batch_size = 1;
  cfg.checkpoint_dir = dir;
  AvsNet<float> net(small_config(false));
  train_avsnet(net, small_set(2, 5), small_set(1, 6), cfg);
  EXPECT_TRUE(std::filesystem::exists(dir / "manifest.txt"));
  EXPECT_FALSE(AvsNet<float>::load(dir).config().use_audio);
  std::filesystem::remove_all(dir);
}

TEST(TrainAvsNet, DivergenceAbortsWithTrace) {
  auto data = small_set(2, 7);
  data[1].depth.at(3, 3) = std::numeric_limits<float>::infinity();
  AvsTrainConfig cfg;
  cfg.steps = 10;
  cfg.batch_size = 2;
  AvsNet<float> net(small_config(true));
  try {
    train_avsnet(net, data, {}, cfg);
    FAIL() << "expected divergence";
  } catch (const nn::DivergenceError& e) {
    EXPECT_EQ(e.trace.size(), 1u);
  }
}

TEST(TrainAvsNet, RgbOnlyCannotSeparateIdenticalImages) {
  auto data = small_set(1, 8);
  AvsSample<float> twin = data[0];
  for (auto& v : twin.depth.values()) v *= 2.0f;
  for (auto& v : twin.spec.values()) v = 1.0f - v;
  data.push_back(twin);
  AvsTrainConfig cfg;
  cfg.steps = 10;
  cfg.batch_size = 2;
  AvsNet<float> net(small_config(false));
  train_avsnet(net, data, {}, cfg);
  const auto a = net.forward(data[0].rgb, data[0].spec).depth;
  const auto b = net.forward(data[1].rgb, data[1].spec).depth;
  for (std::size_t i = 0; i < a.size(); ++i) ASSERT_EQ(a[i], b[i]);
}

TEST(Saliency, ZeroWithoutAudio) {
  AvsNet<float> net(small_config(false));
  const auto s = small_set(1, 9)[0];
  const auto sal = saliency(net, s.rgb, s.spec);
  ASSERT_EQ(sal.profile.size(), 9u);
  for (double v : sal.profile) EXPECT_EQ(v, 0.0);
  for (float v : sal.map.values()) EXPECT_EQ(v, 0.0f);
}

TEST(Saliency, NonNegativeAndMatchesFiniteDifference) {
  AvsNet<double> net([] {
    auto c = small_config(true);
    c.seed = 4;
    return c;
  }());
  std::mt19937_64 rng(10);
  const auto rgb = random_tensor({3, 32, 32}, rng, 0, 1);
  auto spec = random_tensor({2, 17, 9}, rng, 0.1, 1);
  const auto sal = saliency(net, rgb, spec);
  double total = 0.0;
  for (double v : sal.map.values()) {
    ASSERT_GE(v, 0.0);
    total += v;
  }
  EXPECT_GT(total, 0.0);
  for (auto* p : net.parameters())
    for (double g : p->grad.values()) ASSERT_EQ(g, 0.0);
  auto mean_depth = [&](const Tensor<double>& sp) {
    const auto& d = net.forward(rgb, sp).depth;
    double m = 0.0;
    for (double v : d.values()) m += v;
    return m / static_cast<double>(d.size());
  };
  std::size_t checked = 0;
  for (std::size_t i = 0; i < spec.size(); i += 37) {
    const double x = spec[i], h = 1e-6;
    spec[i] = x + h;
    const double up = mean_depth(spec);
    spec[i] = x - h;
    const double dn = mean_depth(spec);
    spec[i] = x;
    const double fd = std::abs((up - dn) / (2 * h));
    EXPECT_NEAR(sal.map[i], fd, 1e-5 * std::max(1.0, fd)) << i;
    ++checked;
  }
  EXPECT_GT(checked, 5u);
}
