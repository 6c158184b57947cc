#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "avs/core/tensor.hpp"
#include "avs/geometry/geometry.hpp"
#include "avs/signal/signal.hpp"

namespace avs::dataio {

/// One synchronized RGB-D-echo frame.
struct SceneSample {
  Tensor<float> rgb;    // 3 x H x W in [0, 1], multiples of 1/255
  Tensor<float> depth;  // H x W metres, 0 = invalid
  signal::EchoClip echo;
  geometry::CameraIntrinsics intrinsics;
  geometry::Pose pose_world;
  int scene_id = 0;
  int frame_index = 0;
};

/// Corridor: a fronto-parallel end wall plus optional side walls at x = +-half_width.
/// Geometry is given in base units and multiplied by `scale`; the rendered
/// image depends only on the base geometry, so scaled copies look identical.
struct SceneSpec {
  int height = 64;
  int width = 128;
  double wall_distance = 4.0;  // end wall, from the first camera position
  double half_width = 1.0;     // <= 0 disables the side walls
  double camera_step = 0.0;    // forward motion per frame
  double scale = 1.0;
  double near_plane = 0.2;
  double texture_frequency = 2.0;  // value-noise cells per base unit
  int max_reflectors = 3;          // most prominent surfaces heard in the echo
  double end_strength = 1.0;
  double side_strength = 0.5;
  double noise_std = 0.0;
  double chirp_start = 20.0;
  double chirp_end = 20000.0;
  double chirp_duration = 0.01;
  int sample_rate = signal::kDefaultSampleRate;
  std::size_t clip_length = 3969;
  int scene_id = 0;

  geometry::CameraIntrinsics intrinsics() const;
  /// Throws std::invalid_argument on unusable geometry for `n_frames`.
  void validate(int n_frames) const;
};

/// Ray-cast frames of a corridor; the camera advances along +z each frame.
/// Deterministic under `seed` (textures, colours and echo noise).
std::vector<SceneSample> synth_scene(const SceneSpec& spec, int n_frames, std::uint64_t seed);

/// Same scene twice, the second with all geometry multiplied by `scale` (> 1).
std::pair<SceneSample, SceneSample> synth_ambiguous_pair(const SceneSpec& base, double scale, std::uint64_t seed);

/// Ranges for randomized corridors.
struct RandomSceneOptions {
  double min_distance = 2.0, max_distance = 6.0;
  double min_half_width = 0.6, max_half_width = 1.5;
  double min_step = 0.0, max_step = 0.0;
  double min_scale = 1.0, max_scale = 1.0;
  bool side_walls = true;
};

SceneSpec random_scene_spec(std::mt19937_64& rng, const RandomSceneOptions& options, const SceneSpec& base = {});

/// Frame of a scene, by identifiers only.
struct FrameRef {
  int scene_id = 0;
  int frame_index = 0;
};

/// Index triples (t - interval, t, t + interval) into `frames`; all three
/// frames must exist and share a scene. Output is ordered by position of t.
std::vector<std::array<std::size_t, 3>> make_triples(const std::vector<FrameRef>& frames, int interval);

/// Magnitude STFT of the echo as a float tensor 2 x F x T.
Tensor<float> echo_spectrogram(const SceneSample& sample, const signal::StftOptions& options = {});

}  // namespace avs::dataio
