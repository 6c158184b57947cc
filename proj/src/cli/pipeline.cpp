#include "avs/cli/pipeline.hpp"

#include <random>

namespace avs::cli {

template <typename T>
std::vector<avsnet::AvsSample<T>> to_avs_samples(const std::vector<dataio::SceneSample>& samples,
                                                  const signal::StftOptions& stft) {
  std::vector<avsnet::AvsSample<T>> out;
  out.reserve(samples.size());
  for (const auto& s : samples)
    out.push_back({s.rgb.cast<T>(), dataio::echo_spectrogram(s, stft).cast<T>(), s.depth.cast<T>()});
  return out;
}

std::vector<dataio::SceneSample> ambiguous_pairs(int n_pairs, double scale, std::uint64_t seed,
                                                 const dataio::RandomSceneOptions& options,
                                                 const dataio::SceneSpec& base, int first_scene_id) {
  std::mt19937_64 rng(seed);
  std::vector<dataio::SceneSample> out;
  out.reserve(2 * static_cast<std::size_t>(n_pairs));
  for (int i = 0; i < n_pairs; ++i) {
    dataio::SceneSpec spec = dataio::random_scene_spec(rng, options, base);
    spec.scene_id = first_scene_id + 2 * i;
    auto [a, b] = dataio::synth_ambiguous_pair(spec, scale, rng());
    b.scene_id = spec.scene_id + 1;
    out.push_back(std::move(a));
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<dataio::SceneSample> corridor_sequences(int n_scenes, int frames, std::uint64_t seed,
                                                    const dataio::RandomSceneOptions& options,
                                                    const dataio::SceneSpec& base, int first_scene_id) {
  std::mt19937_64 rng(seed);
  std::vector<dataio::SceneSample> out;
  for (int i = 0; i < n_scenes; ++i) {
    dataio::SceneSpec spec = dataio::random_scene_spec(rng, options, base);
    spec.scene_id = first_scene_id + i;
    auto f = dataio::synth_scene(spec, frames, rng());
    for (auto& s : f) out.push_back(std::move(s));
  }
  return out;
}

template <typename T>
std::vector<selfsup::FrameTriple<T>> build_triples(const std::vector<dataio::SceneSample>& samples, int interval) {
  std::vector<dataio::FrameRef> refs;
  refs.reserve(samples.size());
  for (const auto& s : samples) refs.push_back({s.scene_id, s.frame_index});
  std::vector<selfsup::FrameTriple<T>> out;
  for (const auto& t : dataio::make_triples(refs, interval))
    out.push_back({samples[t[0]].rgb.cast<T>(), samples[t[1]].rgb.cast<T>(), samples[t[2]].rgb.cast<T>()});
  return out;
}

dataio::SceneSpec scene_spec_from(const dataio::Config& c) {
  dataio::SceneSpec s;
  s.height = static_cast<int>(c.get_int("data.height", s.height));
  s.width = static_cast<int>(c.get_int("data.width", s.width));
  s.noise_std = c.get_double("synth.noise_std", s.noise_std);
  s.max_reflectors = static_cast<int>(c.get_int("synth.reflectors", s.max_reflectors));
  s.texture_frequency = c.get_double("synth.texture_frequency", s.texture_frequency);
  s.clip_length = static_cast<std::size_t>(c.get_int("synth.clip_length", static_cast<long>(s.clip_length)));
  return s;
}

dataio::RandomSceneOptions random_options_from(const dataio::Config& c) {
  dataio::RandomSceneOptions o;
  o.min_distance = c.get_double("synth.min_distance", 3.0);
  o.max_distance = c.get_double("synth.max_distance", 6.0);
  o.min_half_width = c.get_double("synth.min_half_width", o.min_half_width);
  o.max_half_width = c.get_double("synth.max_half_width", o.max_half_width);
  o.min_step = c.get_double("synth.min_step", 0.02);
  o.max_step = c.get_double("synth.max_step", 0.02);
  o.min_scale = c.get_double("synth.min_scale", 1.0);
  o.max_scale = c.get_double("synth.max_scale", 2.0);
  o.side_walls = c.get_bool("synth.side_walls", true);
  return o;
}

signal::StftOptions stft_from(const dataio::Config& c) {
  signal::StftOptions o;
  o.n_fft = static_cast<int>(c.get_int("stft.n_fft", o.n_fft));
  o.hop = static_cast<int>(c.get_int("stft.hop", o.hop));
  return o;
}

avsnet::AvsNetConfig avsnet_config_from(const dataio::Config& c) {
  avsnet::AvsNetConfig n;
  n.height = static_cast<int>(c.get_int("data.height", n.height));
  n.width = static_cast<int>(c.get_int("data.width", n.width));
  n.bins = static_cast<int>(c.get_int("avsnet.bins", n.bins));
  n.heads = static_cast<int>(c.get_int("avsnet.heads", n.heads));
  n.d_min = c.get_double("avsnet.d_min", n.d_min);
  n.d_max = c.get_double("avsnet.d_max", n.d_max);
  n.audio_log = c.get_bool("avsnet.audio_log", n.audio_log);
  n.use_audio = c.get_bool("avsnet.use_audio", n.use_audio);
  n.seed = static_cast<std::uint64_t>(c.get_int("avsnet.seed", static_cast<long>(n.seed)));
  return n;
}

avsnet::AvsTrainConfig avsnet_train_from(const dataio::Config& c) {
  avsnet::AvsTrainConfig t;
  t.steps = c.get_int("avsnet.steps", t.steps);
  t.batch_size = static_cast<int>(c.get_int("avsnet.batch_size", 2));
  t.lr = c.get_double("avsnet.lr", t.lr);
  t.warmup_fraction = c.get_double("avsnet.warmup_fraction", t.warmup_fraction);
  t.optimizer.kind = nn::parse_optimizer_kind(c.get_string("avsnet.optimizer", "sgd"));
  t.loss.alpha = c.get_double("avsnet.si_alpha", t.loss.alpha);
  t.loss.lambda_si = c.get_double("avsnet.lambda_si", t.loss.lambda_si);
  t.max_depth = c.get_double("eval.max_depth", t.max_depth);
  t.seed = static_cast<std::uint64_t>(c.get_int("avsnet.train_seed", static_cast<long>(t.seed)));
  return t;
}

selfsup::DepthNetConfig depthnet_config_from(const dataio::Config& c) {
  selfsup::DepthNetConfig d;
  d.height = static_cast<int>(c.get_int("data.height", d.height));
  d.width = static_cast<int>(c.get_int("data.width", d.width));
  d.n_scales = static_cast<int>(c.get_int("selfsup.scales", d.n_scales));
  d.seed = static_cast<std::uint64_t>(c.get_int("selfsup.seed", static_cast<long>(d.seed)));
  return d;
}

selfsup::SelfSupTrainConfig selfsup_train_from(const dataio::Config& c) {
  selfsup::SelfSupTrainConfig t;
  t.steps = c.get_int("selfsup.steps", t.steps);
  t.batch_size = static_cast<int>(c.get_int("selfsup.batch_size", 2));
  t.lr = c.get_double("selfsup.lr", t.lr);
  t.warmup_fraction = c.get_double("selfsup.warmup_fraction", t.warmup_fraction);
  t.optimizer.kind = nn::parse_optimizer_kind(c.get_string("selfsup.optimizer", "adam"));
  t.params.beta = c.get_double("selfsup.beta", t.params.beta);
  t.params.gamma = c.get_double("selfsup.gamma", t.params.gamma);
  t.params.lambda_smooth = c.get_double("selfsup.lambda_smooth", t.params.lambda_smooth);
  t.params.n_scales = static_cast<int>(c.get_int("selfsup.scales", t.params.n_scales));
  t.d_min = c.get_double("selfsup.d_min", t.d_min);
  t.d_max = c.get_double("selfsup.d_max", t.d_max);
  t.freeze_pose = c.get_bool("selfsup.freeze_pose", t.freeze_pose);
  t.seed = static_cast<std::uint64_t>(c.get_int("selfsup.train_seed", static_cast<long>(t.seed)));
  return t;
}

template std::vector<avsnet::AvsSample<float>> to_avs_samples(const std::vector<dataio::SceneSample>&,
                                                               const signal::StftOptions&);
template std::vector<avsnet::AvsSample<double>> to_avs_samples(const std::vector<dataio::SceneSample>&,
                                                                const signal::StftOptions&);
template std::vector<selfsup::FrameTriple<float>> build_triples(const std::vector<dataio::SceneSample>&, int);
template std::vector<selfsup::FrameTriple<double>> build_triples(const std::vector<dataio::SceneSample>&, int);

}  // namespace avs::cli
