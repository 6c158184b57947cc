#include "avs/signal/signal.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace avs::signal {

LinearChirp::LinearChirp(double f_start, double f_end, double duration, int sample_rate)
    : f_start_(f_start), f_end_(f_end), duration_(duration), sample_rate_(sample_rate) {
  if (sample_rate <= 0) throw std::invalid_argument("chirp: sample rate must be positive");
  if (!(duration > 0)) throw std::invalid_argument("chirp: duration must be positive");
  if (!(f_start > 0 && f_start < f_end)) throw std::invalid_argument("chirp: need 0 < f_start < f_end");
  if (f_end > sample_rate / 2.0) {
    std::ostringstream os;
    os << "chirp: f_end " << f_end << " Hz exceeds Nyquist " << sample_rate / 2.0 << " Hz";
    throw std::invalid_argument(os.str());
  }
}

double LinearChirp::phase(double t) const {
  const double rate = (f_end_ - f_start_) / duration_;
  return 2.0 * std::numbers::pi * (f_start_ * t + 0.5 * rate * t * t);
}

double LinearChirp::instantaneous_frequency(double t) const {
  return f_start_ + (f_end_ - f_start_) * t / duration_;
}

std::vector<double> LinearChirp::samples() const {
  const auto n = static_cast<std::size_t>(std::llround(duration_ * sample_rate_));
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::sin(phase(static_cast<double>(i) / sample_rate_));
  return out;
}

std::vector<double> gen_chirp(double f_start, double f_end, double duration, int sample_rate) {
  return LinearChirp(f_start, f_end, duration, sample_rate).samples();
}

double round_trip_delay(double distance, double speed_of_sound) { return 2.0 * distance / speed_of_sound; }

EchoRender render_echo(const std::vector<double>& chirp, const std::vector<Reflector>& reflectors,
                       const EchoOptions& options) {
  if (options.sample_rate <= 0) throw std::invalid_argument("render_echo: sample rate must be positive");
  EchoRender result;
  auto& clip = result.clip;
  clip.sample_rate = options.sample_rate;
  clip.left.assign(options.length, 0.0);
  clip.right.assign(options.length, 0.0);

  for (std::size_t r = 0; r < reflectors.size(); ++r) {
    const Reflector& refl = reflectors[r];
    if (!(refl.distance > 0)) throw std::invalid_argument("render_echo: reflector distance must be positive");
    const double base = round_trip_delay(refl.distance, options.speed_of_sound);
    const double itd = options.ear_separation * std::sin(refl.azimuth) / options.speed_of_sound;
    const double gain = refl.strength / (refl.distance * refl.distance);
    bool truncated = false;
    for (int ch = 0; ch < 2; ++ch) {
      const double delay = ch == 0 ? base + 0.5 * itd : base - 0.5 * itd;
      const auto start = static_cast<std::size_t>(std::max(0LL, std::llround(delay * options.sample_rate)));
      auto& dst = ch == 0 ? clip.left : clip.right;
      if (start + chirp.size() > dst.size()) truncated = true;
      for (std::size_t i = 0; i < chirp.size() && start + i < dst.size(); ++i) dst[start + i] += gain * chirp[i];
    }
    if (truncated) {
      std::ostringstream os;
      os << "reflector " << r << " at " << refl.distance << " m: echo truncated by clip length " << options.length;
      result.warnings.push_back(os.str());
    }
  }

  if (options.noise_std > 0) {
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> noise(0.0, options.noise_std);
    for (auto& v : clip.left) v += noise(rng);
    for (auto& v : clip.right) v += noise(rng);
  }
  for (auto* ch : {&clip.left, &clip.right})
    for (auto& v : *ch) v = std::clamp(v, -1.0, 1.0);
  return result;
}

std::vector<double> hann_window(int n) {
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
  return w;
}

Spectrogram compute_stft(const EchoClip& clip, const StftOptions& options) {
  const int n_fft = options.n_fft;
  if (n_fft < 2 || (n_fft & (n_fft - 1)) != 0) throw std::invalid_argument("stft: n_fft must be a power of two");
  if (options.hop <= 0 || options.hop > n_fft) throw std::invalid_argument("stft: hop must be in (0, n_fft]");
  if (clip.left.size() != clip.right.size()) throw std::invalid_argument("stft: channel lengths differ");
  if (clip.length() < static_cast<std::size_t>(n_fft)) {
    throw std::invalid_argument("stft: clip of " + std::to_string(clip.length()) + " samples is shorter than n_fft " +
                                std::to_string(n_fft));
  }
  const int bins = n_fft / 2 + 1;
  const int frames = static_cast<int>((clip.length() - static_cast<std::size_t>(n_fft)) / options.hop) + 1;
  Spectrogram spec;
  spec.mag = Tensor<double>({2, bins, frames});
  spec.freq_resolution = static_cast<double>(clip.sample_rate) / n_fft;
  spec.time_hop = static_cast<double>(options.hop) / clip.sample_rate;

  const auto window = hann_window(n_fft);
  double* in = fftw_alloc_real(static_cast<std::size_t>(n_fft));
  fftw_complex* out = fftw_alloc_complex(static_cast<std::size_t>(bins));
  fftw_plan plan = fftw_plan_dft_r2c_1d(n_fft, in, out, FFTW_ESTIMATE);
  for (int ch = 0; ch < 2; ++ch) {
    const auto& x = ch == 0 ? clip.left : clip.right;
    for (int t = 0; t < frames; ++t) {
      const std::size_t start = static_cast<std::size_t>(t) * options.hop;
      for (int i = 0; i < n_fft; ++i) in[i] = x[start + i] * window[i];
      fftw_execute(plan);
      for (int k = 0; k < bins; ++k) spec.mag.at(ch, k, t) = std::hypot(out[k][0], out[k][1]);
    }
  }
  fftw_destroy_plan(plan);
  fftw_free(out);
  fftw_free(in);
  return spec;
}

int delay_frame(double delay_s, int sample_rate, int hop) {
  return static_cast<int>(std::floor(delay_s * sample_rate / hop));
}

}  // namespace avs::signal
