#include "avs/geometry/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace avs::geometry {

namespace {

constexpr double kMinDepth = 1e-6;
constexpr double kEdgeTol = 1e-6;

Mat3 skew(const Vec3& r) {
  return {{{0.0, -r[2], r[1]}, {r[2], 0.0, -r[0]}, {-r[1], r[0], 0.0}}};
}

Mat3 matmul(const Mat3& a, const Mat3& b) {
  Mat3 c{};
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k)
      for (int j = 0; j < 3; ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

Mat3 transpose(const Mat3& a) {
  Mat3 t{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t[i][j] = a[j][i];
  return t;
}

Vec3 matvec(const Mat3& a, const Vec3& v) {
  return {a[0][0] * v[0] + a[0][1] * v[1] + a[0][2] * v[2], a[1][0] * v[0] + a[1][1] * v[1] + a[1][2] * v[2],
          a[2][0] * v[0] + a[2][1] * v[1] + a[2][2] * v[2]};
}

// A = sin t / t, B = (1 - cos t) / t^2 and their derivatives divided by t.
struct RodriguesCoeffs {
  double a, b, da, db;
};

RodriguesCoeffs coeffs(double theta) {
  const double t2 = theta * theta;
  if (theta < 1e-2) {
    return {1.0 - t2 / 6.0 + t2 * t2 / 120.0, 0.5 - t2 / 24.0 + t2 * t2 / 720.0,
            -1.0 / 3.0 + t2 / 30.0 - t2 * t2 / 840.0, -1.0 / 12.0 + t2 / 180.0 - t2 * t2 / 6720.0};
  }
  const double s = std::sin(theta), c = std::cos(theta);
  return {s / theta, (1.0 - c) / t2, (theta * c - s) / (t2 * theta), (theta * s - 2.0 * (1.0 - c)) / (t2 * t2)};
}


}  // namespace

template <typename T>
Tensor<T> Pose::to_tensor() const {
  return Tensor<T>({6}, std::vector<T>{static_cast<T>(rotation[0]), static_cast<T>(rotation[1]),
                                       static_cast<T>(rotation[2]), static_cast<T>(translation[0]),
                                       static_cast<T>(translation[1]), static_cast<T>(translation[2])});
}

template <typename T>
Pose Pose::from_tensor(const Tensor<T>& v) {
  if (v.size() != 6) throw std::invalid_argument("Pose: expected 6 values, got " + shape_str(v.shape()));
  Pose p;
  for (int i = 0; i < 3; ++i) {
    p.rotation[i] = static_cast<double>(v[i]);
    p.translation[i] = static_cast<double>(v[i + 3]);
  }
  return p;
}

Mat3 rodrigues(const Vec3& r) {
  const double theta = std::sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]);
  const auto k = coeffs(theta);
  const Mat3 K = skew(r);
  const Mat3 K2 = matmul(K, K);
  Mat3 R{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) R[i][j] = (i == j ? 1.0 : 0.0) + k.a * K[i][j] + k.b * K2[i][j];
  return R;
}

std::array<Mat3, 3> rodrigues_jacobian(const Vec3& r) {
  const double theta = std::sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]);
  const auto k = coeffs(theta);
  const Mat3 K = skew(r);
  const Mat3 K2 = matmul(K, K);
  std::array<Mat3, 3> out{};
  for (int n = 0; n < 3; ++n) {
    Vec3 e{0.0, 0.0, 0.0};
    e[n] = 1.0;
    const Mat3 E = skew(e);
    const Mat3 EK = matmul(E, K);
    const Mat3 KE = matmul(K, E);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        out[n][i][j] = k.da * r[n] * K[i][j] + k.a * E[i][j] + k.db * r[n] * K2[i][j] + k.b * (EK[i][j] + KE[i][j]);
  }
  return out;
}

Vec3 log_rotation(const Mat3& R) {
  const double tr = R[0][0] + R[1][1] + R[2][2];
  const double cos_t = std::clamp((tr - 1.0) / 2.0, -1.0, 1.0);
  const double theta = std::acos(cos_t);
  const Vec3 w{(R[2][1] - R[1][2]) / 2.0, (R[0][2] - R[2][0]) / 2.0, (R[1][0] - R[0][1]) / 2.0};
  if (theta < 1e-6) return w;
  if (std::numbers::pi - theta > 1e-4) {
    const double f = theta / std::sin(theta);
    return {w[0] * f, w[1] * f, w[2] * f};
  }
  // near pi: R ~ 2 n n^T - I
  int i = 0;
  if (R[1][1] > R[i][i]) i = 1;
  if (R[2][2] > R[i][i]) i = 2;
  Vec3 n{};
  n[i] = std::sqrt(std::max(0.0, (R[i][i] + 1.0) / 2.0));
  for (int j = 0; j < 3; ++j)
    if (j != i) n[j] = (R[i][j] + R[j][i]) / (4.0 * n[i]);
  const double sign = (w[0] * n[0] + w[1] * n[1] + w[2] * n[2]) < 0 ? -1.0 : 1.0;
  return {sign * theta * n[0], sign * theta * n[1], sign * theta * n[2]};
}

Vec3 transform(const Pose& pose, const Vec3& p) {
  Vec3 q = matvec(rodrigues(pose.rotation), p);
  for (int i = 0; i < 3; ++i) q[i] += pose.translation[i];
  return q;
}

Pose compose(const Pose& a, const Pose& b) {
  const Mat3 Ra = rodrigues(a.rotation);
  Pose c;
  c.rotation = log_rotation(matmul(Ra, rodrigues(b.rotation)));
  const Vec3 t = matvec(Ra, b.translation);
  for (int i = 0; i < 3; ++i) c.translation[i] = t[i] + a.translation[i];
  return c;
}

Pose inverse(const Pose& pose) {
  const Mat3 Rt = transpose(rodrigues(pose.rotation));
  Pose inv;
  inv.rotation = {-pose.rotation[0], -pose.rotation[1], -pose.rotation[2]};
  const Vec3 t = matvec(Rt, pose.translation);
  inv.translation = {-t[0], -t[1], -t[2]};
  return inv;
}

template <typename T>
Tensor<T> disp_to_depth(const Tensor<T>& disp, double d_min, double d_max) {
  if (!(d_min > 0 && d_min < d_max)) throw std::invalid_argument("disp_to_depth: need 0 < d_min < d_max");
  const double lo = 1.0 / d_max, span = 1.0 / d_min - 1.0 / d_max;
  Tensor<T> out(disp.shape());
  for (std::size_t i = 0; i < disp.size(); ++i) out[i] = static_cast<T>(1.0 / (lo + span * static_cast<double>(disp[i])));
  return out;
}

template <typename T>
Tensor<T> disp_to_depth_backward(const Tensor<T>& disp, const Tensor<T>& grad_depth, double d_min, double d_max) {
  disp.require_same_shape(grad_depth, "disp_to_depth_backward");
  const double lo = 1.0 / d_max, span = 1.0 / d_min - 1.0 / d_max;
  Tensor<T> g(disp.shape());
  for (std::size_t i = 0; i < disp.size(); ++i) {
    const double s = lo + span * static_cast<double>(disp[i]);
    g[i] = static_cast<T>(-static_cast<double>(grad_depth[i]) * span / (s * s));
  }
  return g;
}

template <typename T>
Tensor<T> backproject(const Tensor<T>& depth, const CameraIntrinsics& K) {
  if (depth.rank() != 2) throw std::invalid_argument("backproject: expected H x W depth, got " + shape_str(depth.shape()));
  const int H = depth.dim(0), W = depth.dim(1);
  Tensor<T> pts({H, W, 3});
  for (int v = 0; v < H; ++v)
    for (int u = 0; u < W; ++u) {
      const double z = static_cast<double>(depth.at(v, u));
      pts.at(v, u, 0) = static_cast<T>(z * (u - K.cx) / K.fx);
      pts.at(v, u, 1) = static_cast<T>(z * (v - K.cy) / K.fy);
      pts.at(v, u, 2) = static_cast<T>(z);
    }
  return pts;
}

template <typename T>
Projection<T> project(const Tensor<T>& points, const Pose& pose, const CameraIntrinsics& K) {
  if (points.rank() != 3 || points.dim(2) != 3)
    throw std::invalid_argument("project: expected H x W x 3 points, got " + shape_str(points.shape()));
  const int H = points.dim(0), W = points.dim(1);
  Projection<T> out{Tensor<T>({H, W, 2}), Tensor<T>({H, W}), Tensor<T>({H, W})};
  const Mat3 R = rodrigues(pose.rotation);
  for (int v = 0; v < H; ++v)
    for (int u = 0; u < W; ++u) {
      const Vec3 p{static_cast<double>(points.at(v, u, 0)), static_cast<double>(points.at(v, u, 1)),
                   static_cast<double>(points.at(v, u, 2))};
      Vec3 q = matvec(R, p);
      for (int i = 0; i < 3; ++i) q[i] += pose.translation[i];
      out.depth.at(v, u) = static_cast<T>(q[2]);
      if (q[2] <= kMinDepth) continue;
      out.valid.at(v, u) = T(1);
      out.grid.at(v, u, 0) = static_cast<T>(K.fx * q[0] / q[2] + K.cx);
      out.grid.at(v, u, 1) = static_cast<T>(K.fy * q[1] / q[2] + K.cy);
    }
  return out;
}

namespace {

template <typename T>
void check_warp_args(const Tensor<T>& source, const Tensor<T>& depth, const Tensor<T>& pose) {
  if (source.rank() != 3) throw std::invalid_argument("inverse_warp: expected C x H x W source, got " + shape_str(source.shape()));
  if (depth.rank() != 2 || depth.dim(0) != source.dim(1) || depth.dim(1) != source.dim(2))
    throw std::invalid_argument("inverse_warp: depth " + shape_str(depth.shape()) + " does not match source " +
                                shape_str(source.shape()));
  if (pose.size() != 6) throw std::invalid_argument("inverse_warp: pose must have 6 values");
}

struct Corner {
  int x0, y0;
  double wx, wy;
};

}  // namespace

template <typename T>
WarpResult<T> inverse_warp(const Tensor<T>& source, const Tensor<T>& depth, const Tensor<T>& pose,
                           const CameraIntrinsics& K) {
  check_warp_args(source, depth, pose);
  const int C = source.dim(0), H = source.dim(1), W = source.dim(2);
  const Pose P = Pose::from_tensor(pose);
  const Mat3 R = rodrigues(P.rotation);
  WarpResult<T> out{Tensor<T>({C, H, W}), Tensor<T>({H, W}), Tensor<T>({H, W, 2})};
  const T* src = source.data();
  for (int v = 0; v < H; ++v)
    for (int u = 0; u < W; ++u) {
      const double z = static_cast<double>(depth.at(v, u));
      const Vec3 p{z * (u - K.cx) / K.fx, z * (v - K.cy) / K.fy, z};
      Vec3 q = matvec(R, p);
      for (int i = 0; i < 3; ++i) q[i] += P.translation[i];
      if (q[2] <= kMinDepth) continue;
      const double pu = K.fx * q[0] / q[2] + K.cx;
      const double pv = K.fy * q[1] / q[2] + K.cy;
      out.grid.at(v, u, 0) = static_cast<T>(pu);
      out.grid.at(v, u, 1) = static_cast<T>(pv);
      if (pu >= -kEdgeTol && pu <= W - 1 + kEdgeTol && pv >= -kEdgeTol && pv <= H - 1 + kEdgeTol) out.mask.at(v, u) = T(1);
      if (!(pu > -1 && pu < W && pv > -1 && pv < H)) continue;
      const int x0 = static_cast<int>(std::floor(pu)), y0 = static_cast<int>(std::floor(pv));
      const double wx = pu - x0, wy = pv - y0;
      for (int c = 0; c < C; ++c) {
        const T* plane = src + static_cast<std::size_t>(c) * H * W;
        double acc = 0.0;
        for (int dy = 0; dy < 2; ++dy)
          for (int dx = 0; dx < 2; ++dx) {
            const int x = x0 + dx, y = y0 + dy;
            if (x < 0 || x >= W || y < 0 || y >= H) continue;
            acc += (dx ? wx : 1.0 - wx) * (dy ? wy : 1.0 - wy) * static_cast<double>(plane[y * W + x]);
          }
        out.image.at(c, v, u) = static_cast<T>(acc);
      }
    }
  return out;
}

template <typename T>
WarpGrads<T> inverse_warp_backward(const Tensor<T>& source, const Tensor<T>& depth, const Tensor<T>& pose,
                                   const CameraIntrinsics& K, const Tensor<T>& grad_image) {
  check_warp_args(source, depth, pose);
  source.require_same_shape(grad_image, "inverse_warp_backward");
  const int C = source.dim(0), H = source.dim(1), W = source.dim(2);
  const Pose P = Pose::from_tensor(pose);
  const Mat3 R = rodrigues(P.rotation);
  const auto dR = rodrigues_jacobian(P.rotation);
  std::vector<double> gsrc(source.size(), 0.0);
  Tensor<T> gdepth({H, W});
  Mat3 gR{};
  Vec3 gt{0.0, 0.0, 0.0};
  const T* src = source.data();
  const T* gimg = grad_image.data();
  for (int v = 0; v < H; ++v)
    for (int u = 0; u < W; ++u) {
      const double z = static_cast<double>(depth.at(v, u));
      const Vec3 ray{(u - K.cx) / K.fx, (v - K.cy) / K.fy, 1.0};
      const Vec3 p{z * ray[0], z * ray[1], z};
      Vec3 q = matvec(R, p);
      for (int i = 0; i < 3; ++i) q[i] += P.translation[i];
      if (q[2] <= kMinDepth) continue;
      const double pu = K.fx * q[0] / q[2] + K.cx;
      const double pv = K.fy * q[1] / q[2] + K.cy;
      if (!(pu > -1 && pu < W && pv > -1 && pv < H)) continue;
      const int x0 = static_cast<int>(std::floor(pu)), y0 = static_cast<int>(std::floor(pv));
      const double wx = pu - x0, wy = pv - y0;
      double g_pu = 0.0, g_pv = 0.0;
      for (int c = 0; c < C; ++c) {
        const double g = static_cast<double>(gimg[(static_cast<std::size_t>(c) * H + v) * W + u]);
        if (g == 0.0) continue;
        const std::size_t base = static_cast<std::size_t>(c) * H * W;
        for (int dy = 0; dy < 2; ++dy)
          for (int dx = 0; dx < 2; ++dx) {
            const int x = x0 + dx, y = y0 + dy;
            if (x < 0 || x >= W || y < 0 || y >= H) continue;
            const double ax = dx ? wx : 1.0 - wx, ay = dy ? wy : 1.0 - wy;
            const double s = static_cast<double>(src[base + y * W + x]);
            gsrc[base + y * W + x] += g * ax * ay;
            g_pu += g * (dx ? 1.0 : -1.0) * ay * s;
            g_pv += g * (dy ? 1.0 : -1.0) * ax * s;
          }
      }
      const double iz = 1.0 / q[2];
      const Vec3 gq{g_pu * K.fx * iz, g_pv * K.fy * iz, -(g_pu * K.fx * q[0] + g_pv * K.fy * q[1]) * iz * iz};
      for (int i = 0; i < 3; ++i) {
        gt[i] += gq[i];
        for (int j = 0; j < 3; ++j) gR[i][j] += gq[i] * p[j];
      }
      double gz = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) gz += gq[i] * R[i][j] * ray[j];
      gdepth.at(v, u) = static_cast<T>(gz);
    }
  WarpGrads<T> out{Tensor<T>(source.shape()), std::move(gdepth), Tensor<T>({6})};
  for (std::size_t i = 0; i < gsrc.size(); ++i) out.source[i] = static_cast<T>(gsrc[i]);
  for (int n = 0; n < 3; ++n) {
    double acc = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) acc += gR[i][j] * dR[n][i][j];
    out.pose[n] = static_cast<T>(acc);
    out.pose[n + 3] = static_cast<T>(gt[n]);
  }
  return out;
}

#define AVS_GEOMETRY_INSTANTIATE(T)                                                                          \
  template Tensor<T> Pose::to_tensor<T>() const;                                                            \
  template Pose Pose::from_tensor<T>(const Tensor<T>&);                                                     \
  template Tensor<T> disp_to_depth<T>(const Tensor<T>&, double, double);                                    \
  template Tensor<T> disp_to_depth_backward<T>(const Tensor<T>&, const Tensor<T>&, double, double);         \
  template Tensor<T> backproject<T>(const Tensor<T>&, const CameraIntrinsics&);                             \
  template Projection<T> project<T>(const Tensor<T>&, const Pose&, const CameraIntrinsics&);                \
  template WarpResult<T> inverse_warp<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,              \
                                         const CameraIntrinsics&);                                          \
  template WarpGrads<T> inverse_warp_backward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,      \
                                                 const CameraIntrinsics&, const Tensor<T>&);

AVS_GEOMETRY_INSTANTIATE(float)
AVS_GEOMETRY_INSTANTIATE(double)

}  // namespace avs::geometry
