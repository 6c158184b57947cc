#include "avs/dataio/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace avs::dataio {

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double lattice(std::int64_t ix, std::int64_t iy, std::uint64_t seed) {
  const std::uint64_t h = mix(seed ^ mix(static_cast<std::uint64_t>(ix) ^ mix(static_cast<std::uint64_t>(iy))));
  return static_cast<double>(h >> 11) * (1.0 / 9007199254740992.0);
}

double smooth(double t) { return t * t * (3.0 - 2.0 * t); }

// Three-octave value noise in [0, 1].
double value_noise(double x, double y, std::uint64_t seed) {
  double total = 0.0, norm = 0.0, amp = 1.0, f = 1.0;
  for (int octave = 0; octave < 3; ++octave) {
    const double px = x * f, py = y * f;
    const double fx = std::floor(px), fy = std::floor(py);
    const auto ix = static_cast<std::int64_t>(fx), iy = static_cast<std::int64_t>(fy);
    const double tx = smooth(px - fx), ty = smooth(py - fy);
    const std::uint64_t s = seed + static_cast<std::uint64_t>(octave) * 7919;
    const double a = lattice(ix, iy, s), b = lattice(ix + 1, iy, s);
    const double c = lattice(ix, iy + 1, s), d = lattice(ix + 1, iy + 1, s);
    total += amp * ((a + (b - a) * tx) + ((c + (d - c) * tx) - (a + (b - a) * tx)) * ty);
    norm += amp;
    amp *= 0.5;
    f *= 2.0;
  }
  return total / norm;
}

struct WallLook {
  std::array<double, 3> color;
  std::uint64_t seed;
  double band_phase;
};

float quantize(double v) { return static_cast<float>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0); }

}  // namespace

geometry::CameraIntrinsics SceneSpec::intrinsics() const {
  return {0.5 * width, 0.5 * width, 0.5 * (width - 1), 0.5 * (height - 1)};
}

void SceneSpec::validate(int n_frames) const {
  if (height < 1 || width < 1) throw std::invalid_argument("synth_scene: image size must be positive");
  if (n_frames < 1) throw std::invalid_argument("synth_scene: need at least one frame");
  if (!(scale > 0)) throw std::invalid_argument("synth_scene: scale must be positive");
  if (!(texture_frequency > 0)) throw std::invalid_argument("synth_scene: texture frequency must be positive");
  if (camera_step < 0) throw std::invalid_argument("synth_scene: camera must move forward");
  const double last = (wall_distance - camera_step * (n_frames - 1)) * scale;
  if (!(last > near_plane))
    throw std::invalid_argument("synth_scene: end wall at " + std::to_string(last) + " m reaches the near plane " +
                                std::to_string(near_plane) + " m");
  if (half_width > 0 && !(half_width * scale > near_plane))
    throw std::invalid_argument("synth_scene: side walls closer than the near plane");
  if (max_reflectors < 0) throw std::invalid_argument("synth_scene: negative reflector count");
}

std::vector<SceneSample> synth_scene(const SceneSpec& spec, int n_frames, std::uint64_t seed) {
  spec.validate(n_frames);
  std::mt19937_64 rng(mix(seed));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::array<WallLook, 3> look{};  // end, left, right
  for (auto& w : look) {
    for (auto& c : w.color) c = 0.35 + 0.65 * u(rng);
    w.seed = rng();
    w.band_phase = u(rng) * 2.0 * std::numbers::pi;
  }
  const auto K = spec.intrinsics();
  const auto chirp = signal::gen_chirp(spec.chirp_start, spec.chirp_end, spec.chirp_duration, spec.sample_rate);
  const double f = spec.texture_frequency;
  const bool sides = spec.half_width > 0;

  std::vector<SceneSample> frames;
  frames.reserve(static_cast<std::size_t>(n_frames));
  for (int fi = 0; fi < n_frames; ++fi) {
    const double zc = spec.camera_step * fi;  // base units
    const double to_end = spec.wall_distance - zc;
    SceneSample s;
    s.rgb = Tensor<float>({3, spec.height, spec.width});
    s.depth = Tensor<float>({spec.height, spec.width});
    s.intrinsics = K;
    s.pose_world.translation = {0.0, 0.0, zc * spec.scale};
    s.scene_id = spec.scene_id;
    s.frame_index = fi;
    for (int v = 0; v < spec.height; ++v)
      for (int x = 0; x < spec.width; ++x) {
        const double dx = (x - K.cx) / K.fx, dy = (v - K.cy) / K.fy;
        double t = to_end;
        int wall = 0;
        if (sides && std::abs(dx) > 0) {
          const double ts = spec.half_width / std::abs(dx);
          if (ts < t) {
            t = ts;
            wall = dx < 0 ? 1 : 2;
          }
        }
        double a, b;  // texture coordinates on the wall plane
        if (wall == 0) {
          a = dx * t;
          b = dy * t;
        } else {
          a = zc + t;
          b = dy * t;
        }
        const auto& w = look[wall];
        const double n = value_noise(a * f, b * f, w.seed);
        const double band = 0.5 + 0.5 * std::sin(2.0 * std::numbers::pi * 0.5 * f * a + w.band_phase);
        const double shade = (0.25 + 0.55 * n + 0.2 * band) * (wall == 0 ? 1.0 : 0.8);
        for (int c = 0; c < 3; ++c) s.rgb.at(c, v, x) = quantize(w.color[c] * shade);
        s.depth.at(v, x) = static_cast<float>(t * spec.scale);
      }

    std::vector<signal::Reflector> refl;
    refl.push_back({to_end * spec.scale, 0.0, spec.end_strength});
    if (sides) {
      refl.push_back({spec.half_width * spec.scale, -0.5 * std::numbers::pi, spec.side_strength});
      refl.push_back({spec.half_width * spec.scale, 0.5 * std::numbers::pi, spec.side_strength});
    }
    std::stable_sort(refl.begin(), refl.end(), [](const signal::Reflector& p, const signal::Reflector& q) {
      return p.strength / (p.distance * p.distance) > q.strength / (q.distance * q.distance);
    });
    if (refl.size() > static_cast<std::size_t>(spec.max_reflectors)) refl.resize(spec.max_reflectors);
    signal::EchoOptions eo;
    eo.sample_rate = spec.sample_rate;
    eo.length = spec.clip_length;
    eo.noise_std = spec.noise_std;
    eo.seed = mix(seed ^ mix(static_cast<std::uint64_t>(fi) + 1));
    s.echo = signal::render_echo(chirp, refl, eo).clip;
    frames.push_back(std::move(s));
  }
  return frames;
}

std::pair<SceneSample, SceneSample> synth_ambiguous_pair(const SceneSpec& base, double scale, std::uint64_t seed) {
  if (!(scale > 1.0)) throw std::invalid_argument("synth_ambiguous_pair: scale must exceed 1");
  SceneSpec big = base;
  big.scale = base.scale * scale;
  auto a = synth_scene(base, 1, seed);
  auto b = synth_scene(big, 1, seed);
  return {std::move(a.front()), std::move(b.front())};
}

SceneSpec random_scene_spec(std::mt19937_64& rng, const RandomSceneOptions& o, const SceneSpec& base) {
  auto pick = [&](double lo, double hi) {
    std::uniform_real_distribution<double> d(0.0, 1.0);
    return lo + (hi - lo) * d(rng);
  };
  SceneSpec s = base;
  s.wall_distance = pick(o.min_distance, o.max_distance);
  s.half_width = o.side_walls ? pick(o.min_half_width, o.max_half_width) : 0.0;
  s.camera_step = pick(o.min_step, o.max_step);
  s.scale = pick(o.min_scale, o.max_scale);
  return s;
}

std::vector<std::array<std::size_t, 3>> make_triples(const std::vector<FrameRef>& frames, int interval) {
  if (interval < 1) throw std::invalid_argument("make_triples: interval must be >= 1");
  std::map<std::pair<int, int>, std::size_t> where;
  for (std::size_t i = 0; i < frames.size(); ++i) where[{frames[i].scene_id, frames[i].frame_index}] = i;
  std::vector<std::array<std::size_t, 3>> out;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& f = frames[i];
    const auto prev = where.find({f.scene_id, f.frame_index - interval});
    const auto next = where.find({f.scene_id, f.frame_index + interval});
    if (prev == where.end() || next == where.end()) continue;
    out.push_back({prev->second, i, next->second});
  }
  return out;
}

Tensor<float> echo_spectrogram(const SceneSample& sample, const signal::StftOptions& options) {
  return signal::compute_stft(sample.echo, options).mag.cast<float>();
}

}  // namespace avs::dataio
