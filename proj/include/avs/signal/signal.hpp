#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "avs/core/tensor.hpp"

namespace avs::signal {

inline constexpr double kSpeedOfSound = 340.0;  // m/s
inline constexpr double kEarSeparation = 0.2;   // m
inline constexpr int kDefaultSampleRate = 44100;

/// Two-channel waveform, amplitudes in [-1, 1].
struct EchoClip {
  std::vector<double> left;
  std::vector<double> right;
  int sample_rate = kDefaultSampleRate;

  std::size_t length() const { return left.size(); }
};

/// Linear frequency sweep with zero phase at t = 0.
class LinearChirp {
 public:
  LinearChirp(double f_start, double f_end, double duration, int sample_rate);

  double phase(double t) const;
  double instantaneous_frequency(double t) const;
  /// round(duration * sample_rate) samples of sin(phase).
  std::vector<double> samples() const;

  double duration() const { return duration_; }
  int sample_rate() const { return sample_rate_; }

 private:
  double f_start_;
  double f_end_;
  double duration_;
  int sample_rate_;
};

/// Mono chirp source waveform.
std::vector<double> gen_chirp(double f_start, double f_end, double duration, int sample_rate);

/// A planar surface reflecting the chirp back to the listener.
struct Reflector {
  double distance = 1.0;  // m
  double azimuth = 0.0;   // rad, positive to the right
  double strength = 1.0;  // (0, 1]
};

struct EchoOptions {
  int sample_rate = kDefaultSampleRate;
  std::size_t length = 3969;  // samples (0.09 s)
  double noise_std = 0.0;
  std::uint64_t seed = 0;
  double speed_of_sound = kSpeedOfSound;
  double ear_separation = kEarSeparation;
};

struct EchoRender {
  EchoClip clip;
  std::vector<std::string> warnings;
};

/// Sum of delayed, inverse-square attenuated copies of `chirp`, one per
/// reflector, plus seeded Gaussian noise; clipped to [-1, 1].
EchoRender render_echo(const std::vector<double>& chirp, const std::vector<Reflector>& reflectors,
                       const EchoOptions& options);

/// Round-trip delay of a reflector at `distance`, in seconds.
double round_trip_delay(double distance, double speed_of_sound = kSpeedOfSound);

/// Magnitude STFT of both channels, shape 2 x (n_fft/2+1) x T.
struct Spectrogram {
  Tensor<double> mag;
  double freq_resolution = 0.0;  // Hz per bin
  double time_hop = 0.0;         // s per frame

  int bins() const { return mag.dim(1); }
  int frames() const { return mag.dim(2); }
};

struct StftOptions {
  int n_fft = 512;
  int hop = 128;
};

/// Periodic Hann window of length n.
std::vector<double> hann_window(int n);

Spectrogram compute_stft(const EchoClip& clip, const StftOptions& options = {});

/// Index of the STFT frame that contains an echo onset after `delay_s`.
int delay_frame(double delay_s, int sample_rate, int hop);

}  // namespace avs::signal
