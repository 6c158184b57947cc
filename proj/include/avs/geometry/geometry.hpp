#pragma once

#include <array>

#include "avs/core/tensor.hpp"

namespace avs::geometry {

/// Pinhole intrinsics in pixels; pixel (u, v) has its centre at integer coordinates.
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  /// Intrinsics for an image resized by (sx, sy).
  CameraIntrinsics scaled(double sx, double sy) const { return {fx * sx, fy * sy, cx * sx, cy * sy}; }
};

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

/// Rigid motion x' = R(rotation) x + translation, rotation as axis-angle.
struct Pose {
  Vec3 rotation{0.0, 0.0, 0.0};
  Vec3 translation{0.0, 0.0, 0.0};

  static Pose identity() { return {}; }
  /// Packs as [rx, ry, rz, tx, ty, tz].
  template <typename T>
  Tensor<T> to_tensor() const;
  template <typename T>
  static Pose from_tensor(const Tensor<T>& v);
};

Mat3 rodrigues(const Vec3& r);
/// dR/dr_k for k = 0..2.
std::array<Mat3, 3> rodrigues_jacobian(const Vec3& r);
/// Axis-angle of a rotation matrix.
Vec3 log_rotation(const Mat3& R);

Vec3 transform(const Pose& pose, const Vec3& p);
/// a after b: x -> a(b(x)).
Pose compose(const Pose& a, const Pose& b);
Pose inverse(const Pose& pose);

/// depth = 1 / (1/d_max + (1/d_min - 1/d_max) * disp).
template <typename T>
Tensor<T> disp_to_depth(const Tensor<T>& disp, double d_min, double d_max);
template <typename T>
Tensor<T> disp_to_depth_backward(const Tensor<T>& disp, const Tensor<T>& grad_depth, double d_min, double d_max);

/// H x W depth -> H x W x 3 camera-frame points.
template <typename T>
Tensor<T> backproject(const Tensor<T>& depth, const CameraIntrinsics& K);

template <typename T>
struct Projection {
  Tensor<T> grid;   // H x W x 2, (u, v)
  Tensor<T> depth;  // H x W, z after the rigid transform
  Tensor<T> valid;  // H x W, 1 where z > 1e-6
};

template <typename T>
Projection<T> project(const Tensor<T>& points, const Pose& pose, const CameraIntrinsics& K);

template <typename T>
struct WarpResult {
  Tensor<T> image;  // C x H x W
  Tensor<T> mask;   // H x W, 1 where the sample lies inside the source frame
  Tensor<T> grid;   // H x W x 2
};

template <typename T>
struct WarpGrads {
  Tensor<T> source;
  Tensor<T> depth;
  Tensor<T> pose;  // 6
};

/// Synthesises the target view by bilinearly sampling `source` (C x H x W)
/// at the projection of the target pixels; `pose` (6) maps target-frame
/// points into the source frame. Samples outside the frame read zero.
template <typename T>
WarpResult<T> inverse_warp(const Tensor<T>& source, const Tensor<T>& depth, const Tensor<T>& pose,
                           const CameraIntrinsics& K);

template <typename T>
WarpGrads<T> inverse_warp_backward(const Tensor<T>& source, const Tensor<T>& depth, const Tensor<T>& pose,
                                   const CameraIntrinsics& K, const Tensor<T>& grad_image);

}  // namespace avs::geometry
