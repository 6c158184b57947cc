#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "avs/core/grad_check.hpp"
#include "avs/geometry/geometry.hpp"

using namespace avs;
using namespace avs::geometry;

namespace {

Tensor<double> random_tensor(const Shape& s, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  Tensor<double> t(s);
  for (auto& v : t.values()) v = d(rng);
  return t;
}

// smooth image with a few low-frequency components
Tensor<double> smooth_image(int C, int H, int W, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(0.0, 1.0);
  Tensor<double> img({C, H, W});
  for (int c = 0; c < C; ++c) {
    const double a = d(rng), b = d(rng), ph = 6.0 * d(rng);
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x)
        img.at(c, y, x) = 0.5 + 0.2 * std::sin(a * 0.4 * x + b * 0.3 * y + ph) + 0.1 * std::cos(0.25 * x - 0.35 * y);
  }
  return img;
}

}  // namespace

TEST(DispToDepth, BoundsAndScalarOracle) {
  Tensor<double> disp({4}, {0.0, 1.0, 0.5, 0.25});
  const auto d = disp_to_depth(disp, 0.1, 10.0);
  EXPECT_NEAR(d[0], 10.0, 1e-12);
  EXPECT_NEAR(d[1], 0.1, 1e-12);
  // 1 / (0.1 + (10 - 0.1) * 0.5)
  EXPECT_NEAR(d[2], 1.0 / 5.05, 1e-12);
  EXPECT_GT(d[3], d[2]);
  EXPECT_THROW(disp_to_depth(disp, 1.0, 0.5), std::invalid_argument);
}

TEST(DispToDepth, Monotone) {
  std::mt19937_64 rng(3);
  const auto disp = random_tensor({200}, rng, 0.0, 1.0);
  const auto d = disp_to_depth(disp, 0.1, 12.0);
  for (std::size_t i = 0; i < disp.size(); ++i)
    for (std::size_t j = 0; j < disp.size(); ++j)
      if (disp[i] > disp[j]) { EXPECT_LT(d[i], d[j]); }
}

TEST(DispToDepth, Gradient) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto disp = random_tensor({3, 5}, rng, 0.01, 0.99);
    auto rep = grad_check<double>(
        [](const std::vector<Tensor<double>>& in) { return disp_to_depth(in[0], 0.1, 12.0); },
        [](const std::vector<Tensor<double>>& in, const Tensor<double>& g) {
          return std::vector<Tensor<double>>{disp_to_depth_backward(in[0], g, 0.1, 12.0)};
        },
        {disp});
    EXPECT_TRUE(rep.passed(1e-5)) << rep.worst;
  }
}

TEST(Backproject, PrincipalPointAndAxisCases) {
  Tensor<double> depth({3, 3}, 2.0);
  const auto p = backproject(depth, CameraIntrinsics{50, 50, 1, 1});
  EXPECT_DOUBLE_EQ(p.at(1, 1, 0), 0.0);
  EXPECT_DOUBLE_EQ(p.at(1, 1, 1), 0.0);
  EXPECT_DOUBLE_EQ(p.at(1, 1, 2), 2.0);

  Tensor<double> wide({1, 101}, 1.0);
  const auto q = backproject(wide, CameraIntrinsics{100, 100, 0, 0});
  EXPECT_DOUBLE_EQ(q.at(0, 100, 0), 1.0);
  EXPECT_DOUBLE_EQ(q.at(0, 100, 1), 0.0);
  EXPECT_DOUBLE_EQ(q.at(0, 100, 2), 1.0);
}

TEST(Project, IdentityRoundTrip) {
  std::mt19937_64 rng(5);
  const CameraIntrinsics K{40, 45, 15.5, 7.5};
  for (int trial = 0; trial < 10; ++trial) {
    const auto depth = random_tensor({16, 32}, rng, 0.2, 12.0);
    const auto proj = project(backproject(depth, K), Pose::identity(), K);
    for (int v = 0; v < 16; ++v)
      for (int u = 0; u < 32; ++u) {
        EXPECT_NEAR(proj.grid.at(v, u, 0), u, 1e-5);
        EXPECT_NEAR(proj.grid.at(v, u, 1), v, 1e-5);
        EXPECT_NEAR(proj.depth.at(v, u), depth.at(v, u), 1e-12);
        EXPECT_EQ(proj.valid.at(v, u), 1.0);
      }
  }
}

TEST(Project, ForwardTranslationOnPlane) {
  const CameraIntrinsics K{30, 30, 8, 4};
  const Tensor<double> depth({9, 17}, 2.0);
  Pose pose;
  pose.translation = {0.0, 0.0, -1.0};
  const auto proj = project(backproject(depth, K), pose, K);
  for (int v = 0; v < 9; ++v)
    for (int u = 0; u < 17; ++u) {
      EXPECT_NEAR(proj.depth.at(v, u), 1.0, 1e-12);
      EXPECT_NEAR(proj.grid.at(v, u, 0) - K.cx, 2.0 * (u - K.cx), 1e-9);
      EXPECT_NEAR(proj.grid.at(v, u, 1) - K.cy, 2.0 * (v - K.cy), 1e-9);
    }
}

TEST(Project, HalfTurnMirrorsAboutPrincipalPoint) {
  const CameraIntrinsics K{30, 30, 8, 4};
  std::mt19937_64 rng(6);
  const auto depth = random_tensor({9, 17}, rng, 1.0, 5.0);
  Pose pose;
  pose.rotation = {0.0, 0.0, std::numbers::pi};
  const auto proj = project(backproject(depth, K), pose, K);
  for (int v = 0; v < 9; ++v)
    for (int u = 0; u < 17; ++u) {
      EXPECT_NEAR(proj.grid.at(v, u, 0), 2 * K.cx - u, 1e-9);
      EXPECT_NEAR(proj.grid.at(v, u, 1), 2 * K.cy - v, 1e-9);
    }
}

TEST(Project, PointsBehindCameraAreInvalid) {
  const CameraIntrinsics K{30, 30, 2, 2};
  const Tensor<double> depth({5, 5}, 1.0);
  Pose pose;
  pose.translation = {0.0, 0.0, -2.0};
  const auto proj = project(backproject(depth, K), pose, K);
  for (double v : proj.valid.values()) EXPECT_EQ(v, 0.0);
}

TEST(Rodrigues, MatchesAxisAngleDefinitionAndIsOrthonormal) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(-1.5, 1.5);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec3 r{d(rng), d(rng), d(rng)};
    const Mat3 R = rodrigues(r);
    // rotation of a vector about axis n by theta (vector form)
    const double th = std::sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]);
    const Vec3 n{r[0] / th, r[1] / th, r[2] / th};
    const Vec3 x{d(rng), d(rng), d(rng)};
    const double ndx = n[0] * x[0] + n[1] * x[1] + n[2] * x[2];
    const Vec3 nxx{n[1] * x[2] - n[2] * x[1], n[2] * x[0] - n[0] * x[2], n[0] * x[1] - n[1] * x[0]};
    for (int i = 0; i < 3; ++i) {
      const double expect = x[i] * std::cos(th) + nxx[i] * std::sin(th) + n[i] * ndx * (1 - std::cos(th));
      EXPECT_NEAR(R[i][0] * x[0] + R[i][1] * x[1] + R[i][2] * x[2], expect, 1e-12);
      for (int j = 0; j < 3; ++j) {
        double dot = 0.0;
        for (int k = 0; k < 3; ++k) dot += R[k][i] * R[k][j];
        EXPECT_NEAR(dot, i == j ? 1.0 : 0.0, 1e-12);
      }
    }
    const Vec3 back = log_rotation(R);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(back[i], r[i], 1e-9);
  }
}

TEST(Rodrigues, JacobianMatchesFiniteDifferences) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (double scale : {1.0, 1e-2, 3e-3, 1e-5, 0.0}) {
    const Vec3 r{scale * d(rng), scale * d(rng), scale * d(rng)};
    const auto J = rodrigues_jacobian(r);
    for (int n = 0; n < 3; ++n) {
      Vec3 rp = r, rm = r;
      rp[n] += 1e-6;
      rm[n] -= 1e-6;
      const Mat3 Rp = rodrigues(rp), Rm = rodrigues(rm);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) EXPECT_NEAR(J[n][i][j], (Rp[i][j] - Rm[i][j]) / 2e-6, 1e-8);
    }
  }
}

TEST(Pose, ComposeWithInverseIsIdentity) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> d(-0.8, 0.8);
  for (int trial = 0; trial < 20; ++trial) {
    Pose p{{d(rng), d(rng), d(rng)}, {d(rng), d(rng), d(rng)}};
    const Pose id = compose(p, inverse(p));
    for (int i = 0; i < 3; ++i) {
      EXPECT_NEAR(id.rotation[i], 0.0, 1e-12);
      EXPECT_NEAR(id.translation[i], 0.0, 1e-12);
    }
    const Vec3 x{d(rng), d(rng), d(rng)};
    const Vec3 y = transform(inverse(p), transform(p, x));
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(y[i], x[i], 1e-12);
  }
}

TEST(InverseWarp, IdentityPoseReproducesSource) {
  std::mt19937_64 rng(10);
  const CameraIntrinsics K{20, 20, 8, 4};
  const auto src = random_tensor({3, 8, 16}, rng, 0.0, 1.0);
  const auto depth = random_tensor({8, 16}, rng, 0.5, 8.0);
  const auto w = inverse_warp(src, depth, Pose::identity().to_tensor<double>(), K);
  for (std::size_t i = 0; i < src.size(); ++i) EXPECT_NEAR(w.image[i], src[i], 1e-12);
  for (double m : w.mask.values()) EXPECT_EQ(m, 1.0);
}

TEST(InverseWarp, ConstantSourceStaysConstantWhereValid) {
  std::mt19937_64 rng(11);
  const CameraIntrinsics K{20, 20, 8, 4};
  const Tensor<double> src({2, 8, 16}, 0.37);
  const auto depth = random_tensor({8, 16}, rng, 0.5, 8.0);
  Pose pose{{0.05, -0.1, 0.02}, {0.3, 0.1, -0.2}};
  const auto w = inverse_warp(src, depth, pose.to_tensor<double>(), K);
  int valid = 0;
  for (int c = 0; c < 2; ++c)
    for (int v = 0; v < 8; ++v)
      for (int u = 0; u < 16; ++u)
        if (w.mask.at(v, u) > 0) {
          ++valid;
          EXPECT_NEAR(w.image.at(c, v, u), 0.37, 1e-12);
        }
  EXPECT_GT(valid, 0);
}

TEST(InverseWarp, LateralTranslationIsIntegerShift) {
  std::mt19937_64 rng(12);
  const CameraIntrinsics K{40, 40, 16, 8};
  const int H = 16, W = 32;
  const auto src = random_tensor({1, H, W}, rng, 0.0, 1.0);
  const Tensor<double> depth({H, W}, 4.0);
  Pose pose;
  pose.translation = {0.3, 0.0, 0.0};  // fx * tx / z = 3 pixels
  const auto w = inverse_warp(src, depth, pose.to_tensor<double>(), K);
  for (int v = 0; v < H; ++v)
    for (int u = 0; u < W; ++u) {
      if (u + 3 < W) {
        EXPECT_NEAR(w.image.at(0, v, u), src.at(0, v, u + 3), 1e-9);
        EXPECT_EQ(w.mask.at(v, u), 1.0);
      } else {
        EXPECT_EQ(w.mask.at(v, u), 0.0);
      }
    }
}

TEST(InverseWarp, PoseAndInverseRoundTripOnSmoothImage) {
  std::mt19937_64 rng(13);
  const CameraIntrinsics K{40, 40, 16, 8};
  const int H = 16, W = 32;
  // affine intensity, which bilinear interpolation reproduces exactly
  Tensor<double> img({1, H, W});
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) img.at(0, y, x) = 0.2 + 0.01 * x + 0.02 * y;
  // frame A sees a fronto-parallel plane n.P = d with n = (0,0,1), d = 3
  const Pose a_to_b{{0.0, 0.03, 0.01}, {0.1, -0.05, 0.2}};
  const Pose b_to_a = inverse(a_to_b);
  const Mat3 R = rodrigues(a_to_b.rotation);
  // plane in B coordinates: (R n) . P = d + n . R^T t
  const Vec3 nb{R[0][2], R[1][2], R[2][2]};
  double nrt = 0.0;
  for (int i = 0; i < 3; ++i) nrt += R[i][2] * a_to_b.translation[i];
  const double db = 3.0 + nrt;
  Tensor<double> depth_b({H, W});
  for (int v = 0; v < H; ++v)
    for (int u = 0; u < W; ++u) {
      const Vec3 ray{(u - K.cx) / K.fx, (v - K.cy) / K.fy, 1.0};
      depth_b.at(v, u) = db / (nb[0] * ray[0] + nb[1] * ray[1] + nb[2] * ray[2]);
    }
  const Tensor<double> depth_a({H, W}, 3.0);
  const auto in_b = inverse_warp(img, depth_b, b_to_a.to_tensor<double>(), K);
  const auto back = inverse_warp(in_b.image, depth_a, a_to_b.to_tensor<double>(), K);
  int checked = 0;
  for (int v = 0; v < H; ++v)
    for (int u = 0; u < W; ++u) {
      if (back.mask.at(v, u) == 0) continue;
      const double pu = back.grid.at(v, u, 0), pv = back.grid.at(v, u, 1);
      const int x0 = static_cast<int>(std::floor(pu)), y0 = static_cast<int>(std::floor(pv));
      bool interior = true;
      for (int dy = 0; dy < 2; ++dy)
        for (int dx = 0; dx < 2; ++dx)
          if (in_b.mask.at(std::min(y0 + dy, H - 1), std::min(x0 + dx, W - 1)) == 0) interior = false;
      if (!interior) continue;
      ++checked;
      EXPECT_NEAR(back.image.at(0, v, u), img.at(0, v, u), 1e-4);
    }
  EXPECT_GT(checked, H * W / 3);
}

TEST(InverseWarp, GradientsWrtDepthPoseAndSource) {
  std::mt19937_64 rng(14);
  const CameraIntrinsics K{12, 12, 8, 4};
  int passed = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto src = smooth_image(2, 8, 16, rng);
    const auto depth = random_tensor({8, 16}, rng, 1.0, 4.0);
    std::uniform_real_distribution<double> d(-0.1, 0.1);
    Tensor<double> pose({6}, {d(rng), d(rng), d(rng), d(rng), d(rng), d(rng)});
    auto rep = grad_check<double>(
        [&](const std::vector<Tensor<double>>& in) { return inverse_warp(in[0], in[1], in[2], K).image; },
        [&](const std::vector<Tensor<double>>& in, const Tensor<double>& g) {
          auto gr = inverse_warp_backward(in[0], in[1], in[2], K, g);
          return std::vector<Tensor<double>>{gr.source, gr.depth, gr.pose};
        },
        {src, depth, pose}, GradCheckOptions{1e-6, 1e-3, 0, static_cast<std::uint64_t>(trial), true});
    EXPECT_TRUE(rep.passed(1e-5)) << rep.worst;
    passed += rep.passed(1e-5);
  }
  EXPECT_EQ(passed, 20);
}

TEST(InverseWarp, RejectsMismatchedShapes) {
  const CameraIntrinsics K{12, 12, 8, 4};
  EXPECT_THROW(inverse_warp(Tensor<double>({3, 8, 16}), Tensor<double>({8, 15}), Tensor<double>({6}), K),
               std::invalid_argument);
  EXPECT_THROW(inverse_warp(Tensor<double>({3, 8, 16}), Tensor<double>({8, 16}), Tensor<double>({5}), K),
               std::invalid_argument);
}
