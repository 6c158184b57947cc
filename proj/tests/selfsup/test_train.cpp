#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "avs/core/grad_check.hpp"
#include "avs/dataio/synth.hpp"
#include "avs/selfsup/train.hpp"
#include "../support/module_check.hpp"

using namespace avs;
using namespace avs::selfsup;
using avs::testing::random_tensor;

namespace {

Tensor<double> smooth_image(std::mt19937_64& rng, int H, int W) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Tensor<double> t({3, H, W});
  for (int c = 0; c < 3; ++c) {
    const double fx = 0.3 + 0.5 * u(rng), fy = 0.3 + 0.5 * u(rng), ph = 6 * u(rng);
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) t.at(c, y, x) = 0.5 + 0.3 * std::sin(fx * x + ph) * std::cos(fy * y);
  }
  return t;
}

template <typename T>
FrameTriple<T> corridor_triple(int h, int w, double step, std::uint64_t seed) {
  dataio::SceneSpec spec;
  spec.height = h;
  spec.width = w;
  spec.wall_distance = 4.0;
  spec.half_width = 1.2;
  spec.camera_step = step;
  const auto f = dataio::synth_scene(spec, 3, seed);
  return {f[0].rgb.cast<T>(), f[1].rgb.cast<T>(), f[2].rgb.cast<T>()};
}

geometry::CameraIntrinsics intrinsics(int h, int w) { return {0.5 * w, 0.5 * w, 0.5 * (w - 1), 0.5 * (h - 1)}; }

}  // namespace

TEST(DepthNet, ShapesRangeAndDeterminism) {
  DepthNetConfig c;
  DepthNet<float> a(c), b(c);
  std::mt19937_64 rng(1);
  const auto x = random_tensor({3, 64, 128}, rng, 0, 1).cast<float>();
  const auto& da = a.forward(x);
  ASSERT_EQ(da.size(), 4u);
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(da[i].shape(), (Shape{1, 64 >> i, 128 >> i}));
    for (float v : da[i].values()) {
      EXPECT_GT(v, 0.0f);
      EXPECT_LT(v, 1.0f);
    }
  }
  const auto& db = b.forward(x);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(da[i], db[i]);
  c.n_scales = 3;
  EXPECT_EQ(DepthNet<float>(c).forward(x).size(), 3u);
}

TEST(DepthNet, RejectsResolutionNotDivisibleBy32) {
  DepthNetConfig c;
  c.height = 60;
  EXPECT_THROW(DepthNet<float>{c}, std::invalid_argument);
  DepthNet<float> ok;
  EXPECT_THROW(ok.forward(Tensor<float>({3, 32, 64})), std::invalid_argument);
}

TEST(DepthNet, Gradient) {
  DepthNetConfig c;
  c.height = 32;
  c.width = 32;
  c.encoder_channels = {3, 4, 4, 5, 6};
  c.decoder_channels = {5, 4, 4, 3, 3};
  DepthNet<double> net(c);
  std::mt19937_64 rng(2);
  // Zero biases put dead-ReLU regions exactly on the hinge of the next layer.
  std::uniform_real_distribution<double> ub(-0.2, 0.2);
  for (auto* p : net.parameters())
    if (p->name.find("bias") != std::string::npos)
      for (auto& v : p->value.values()) v = ub(rng);
  const auto x = random_tensor({3, 32, 32}, rng, 0, 1);
  std::vector<Tensor<double>> w;
  for (int i = 0; i < 4; ++i) w.push_back(random_tensor({1, 32 >> i, 32 >> i}, rng));
  GradCheckOptions o;
  o.max_coords = 12;
  const auto rep = avs::testing::check_module(
      net.parameters(), {},
      [&](const std::vector<Tensor<double>>&) {
        const auto& d = net.forward(x);
        double acc = 0;
        for (int i = 0; i < 4; ++i)
          for (std::size_t k = 0; k < d[i].size(); ++k) acc += w[i][k] * d[i][k];
        return Tensor<double>({1}, {acc});
      },
      [&](const Tensor<double>& g) {
        std::vector<Tensor<double>> gs = w;
        for (auto& t : gs) t *= g[0];
        net.backward(gs);
        return std::vector<Tensor<double>>{};
      },
      o);
  EXPECT_TRUE(rep.passed(1e-5)) << rep.worst << " rel " << rep.max_rel_error;
}

TEST(PoseNet, SixOutputsAndZeroFinalLayer) {
  PoseNet<double> net;
  std::mt19937_64 rng(3);
  const auto a = random_tensor({3, 32, 64}, rng, 0, 1), b = random_tensor({3, 32, 64}, rng, 0, 1);
  const auto p = net.forward(a, b);
  EXPECT_EQ(p.shape(), (Shape{6}));
  net.final_layer().weight().value.fill(0.0);
  net.final_layer().bias().value.fill(0.0);
  const auto zero = net.forward(a, b);
  for (double v : zero.values()) EXPECT_EQ(v, 0.0);
}

TEST(PoseNet, Gradient) {
  PoseNetConfig c;
  c.encoder_channels = {4, 5, 6};
  PoseNet<double> net(c);
  std::mt19937_64 rng(4);
  const auto a = random_tensor({3, 16, 16}, rng, 0, 1), b = random_tensor({3, 16, 16}, rng, 0, 1);
  GradCheckOptions o;
  o.max_coords = 16;
  const auto rep = avs::testing::check_module(
      net.parameters(), {}, [&](const std::vector<Tensor<double>>&) { return net.forward(a, b); },
      [&](const Tensor<double>& g) {
        net.backward(g);
        return std::vector<Tensor<double>>{};
      },
      o);
  EXPECT_TRUE(rep.passed(1e-5)) << rep.worst << " rel " << rep.max_rel_error;
}

TEST(JointObjective, GradientWrtDisparityAndPose) {
  const int H = 16, W = 32;
  std::mt19937_64 rng(5);
  const auto K = intrinsics(H, W);
  for (int trial = 0; trial < 3; ++trial) {
    const auto target = smooth_image(rng, H, W);
    const std::vector<Tensor<double>> sources{smooth_image(rng, H, W), smooth_image(rng, H, W)};
    std::vector<Tensor<double>> inputs;
    for (int i = 0; i < 4; ++i) inputs.push_back(random_tensor({1, H >> i, W >> i}, rng, 0.1, 0.9));
    for (int s = 0; s < 2; ++s) inputs.push_back(random_tensor({6}, rng, -0.05, 0.05));
    JointObjective<double> obj(K, PhotometricParams{}, 0.1, 100.0);
    auto split = [](const std::vector<Tensor<double>>& in) {
      return std::make_pair(std::vector<Tensor<double>>(in.begin(), in.begin() + 4),
                            std::vector<Tensor<double>>(in.begin() + 4, in.end()));
    };
    GradCheckOptions o;
    o.max_coords = 40;
    o.seed = static_cast<std::uint64_t>(trial);
    // Pose probes move every sample point; a short step keeps bilinear cell crossings rare.
    o.epsilon = 1e-7;
    const auto rep = grad_check<double>(
        [&](const std::vector<Tensor<double>>& in) {
          const auto [d, p] = split(in);
          return Tensor<double>({1}, {obj.forward(target, sources, d, p).total});
        },
        [&](const std::vector<Tensor<double>>& in, const Tensor<double>& g) {
          const auto [d, p] = split(in);
          obj.forward(target, sources, d, p);
          auto gr = obj.backward(g[0]);
          std::vector<Tensor<double>> out = gr.disps;
          for (auto& t : gr.poses) out.push_back(t);
          return out;
        },
        inputs, o);
    EXPECT_TRUE(rep.passed(1e-5)) << rep.worst << " rel " << rep.max_rel_error << " kinks " << rep.kinks;
  }
}

TEST(JointObjective, InvariantToCommonDepthAndTranslationScale) {
  const int H = 16, W = 32;
  std::mt19937_64 rng(6);
  const auto K = intrinsics(H, W);
  const auto target = smooth_image(rng, H, W);
  const std::vector<Tensor<double>> sources{smooth_image(rng, H, W), smooth_image(rng, H, W)};
  std::vector<Tensor<double>> disps;
  for (int i = 0; i < 4; ++i) disps.push_back(random_tensor({1, H >> i, W >> i}, rng, 0.1, 0.9));
  std::vector<Tensor<double>> poses{random_tensor({6}, rng, -0.05, 0.05), random_tensor({6}, rng, -0.05, 0.05)};
  JointObjective<double> base(K, PhotometricParams{}, 0.1, 100.0);
  const double ref = base.forward(target, sources, disps, poses).total;
  for (double c : {0.5, 3.0, 17.0}) {
    // disp_to_depth with both bounds times c multiplies every depth by c.
    JointObjective<double> scaled(K, PhotometricParams{}, 0.1 * c, 100.0 * c);
    auto sp = poses;
    for (auto& p : sp)
      for (int k = 3; k < 6; ++k) p[k] *= c;
    EXPECT_NEAR(scaled.forward(target, sources, disps, sp).total, ref, 1e-9);
  }
}

TEST(SelfSup, OverfitsOneForwardMotionTriple) {
  const auto tr = corridor_triple<float>(64, 128, 0.25, 3);
  DepthNet<float> depth;
  PoseNet<float> pose;
  SelfSupTrainConfig cfg;
  cfg.steps = 500;
  cfg.batch_size = 1;
  cfg.lr = 1e-3;
  const auto res = train_selfsup(depth, pose, {tr}, intrinsics(64, 128), cfg);
  ASSERT_EQ(res.loss_trace.size(), 500u);
  const double final = evaluate_triple(depth, pose, tr, intrinsics(64, 128), cfg).total;
  EXPECT_LT(final, 0.5 * res.loss_trace.front()) << "initial " << res.loss_trace.front();
}

TEST(SelfSup, SeededTraceIsBitwiseReproducible) {
  const auto tr = corridor_triple<float>(32, 64, 0.25, 4);
  auto run = [&] {
    DepthNetConfig dc;
    dc.height = 32;
    dc.width = 64;
    DepthNet<float> depth(dc);
    PoseNet<float> pose;
    SelfSupTrainConfig cfg;
    cfg.steps = 6;
    cfg.batch_size = 2;
    cfg.seed = 9;
    return train_selfsup(depth, pose, {tr, tr}, intrinsics(32, 64), cfg).loss_trace;
  };
  const auto a = run(), b = run();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
}

TEST(SelfSup, FrozenIdentityPoseHasHigherLossFloor) {
  const auto tr = corridor_triple<float>(32, 64, 0.3, 5);
  const auto K = intrinsics(32, 64);
  auto final_loss = [&](bool freeze) {
    DepthNetConfig dc;
    dc.height = 32;
    dc.width = 64;
    DepthNet<float> depth(dc);
    PoseNet<float> pose;
    SelfSupTrainConfig cfg;
    cfg.steps = 300;
    cfg.batch_size = 1;
    cfg.lr = 1e-3;
    cfg.freeze_pose = freeze;
    train_selfsup(depth, pose, {tr}, K, cfg);
    return evaluate_triple(depth, pose, tr, K, cfg).total;
  };
  const double joint = final_loss(false), frozen = final_loss(true);
  EXPECT_GT(frozen, joint) << "joint " << joint << " frozen " << frozen;
}

TEST(SelfSup, CheckpointRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / ("avs_selfsup_ckpt_" + std::to_string(::getpid()));
  DepthNetConfig dc;
  dc.height = 32;
  dc.width = 64;
  dc.n_scales = 3;
  DepthNet<float> depth(dc);
  PoseNet<float> pose;
  depth.save(dir / "depth");
  pose.save(dir / "pose");
  auto d2 = DepthNet<float>::load(dir / "depth");
  auto p2 = PoseNet<float>::load(dir / "pose");
  EXPECT_EQ(d2.config().n_scales, 3);
  std::mt19937_64 rng(7);
  const auto x = random_tensor({3, 32, 64}, rng, 0, 1).cast<float>();
  EXPECT_EQ(predict_relative_depth(depth, x), predict_relative_depth(d2, x));
  EXPECT_EQ(pose.forward(x, x), p2.forward(x, x));
  EXPECT_THROW(PoseNet<float>::load(dir / "depth"), std::runtime_error);
  std::filesystem::remove_all(dir);
}
