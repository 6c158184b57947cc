#pragma once

#include <cstdint>
#include <vector>

#include "avs/avsnet/train.hpp"
#include "avs/dataio/config.hpp"
#include "avs/dataio/synth.hpp"
#include "avs/selfsup/train.hpp"

namespace avs::cli {

/// rgb / echo spectrogram / depth triplets for AVS-Net.
template <typename T>
std::vector<avsnet::AvsSample<T>> to_avs_samples(const std::vector<dataio::SceneSample>& samples,
                                                  const signal::StftOptions& stft = {});

/// `n_pairs` random corridors, each rendered at scale 1 and at `scale`
/// (identical RGB). Scene ids run from `first_scene_id`; output is a, b, a, b, ...
std::vector<dataio::SceneSample> ambiguous_pairs(int n_pairs, double scale, std::uint64_t seed,
                                                 const dataio::RandomSceneOptions& options,
                                                 const dataio::SceneSpec& base = {}, int first_scene_id = 0);

/// Forward-motion sequences of `frames` frames per scene, camera_step drawn from `options`.
std::vector<dataio::SceneSample> corridor_sequences(int n_scenes, int frames, std::uint64_t seed,
                                                    const dataio::RandomSceneOptions& options,
                                                    const dataio::SceneSpec& base = {}, int first_scene_id = 0);

/// Frame triples at `interval` within each scene.
template <typename T>
std::vector<selfsup::FrameTriple<T>> build_triples(const std::vector<dataio::SceneSample>& samples, int interval);

/// Settings read from a Config, with defaults for missing keys.
dataio::SceneSpec scene_spec_from(const dataio::Config& c);
dataio::RandomSceneOptions random_options_from(const dataio::Config& c);
signal::StftOptions stft_from(const dataio::Config& c);
avsnet::AvsNetConfig avsnet_config_from(const dataio::Config& c);
avsnet::AvsTrainConfig avsnet_train_from(const dataio::Config& c);
selfsup::DepthNetConfig depthnet_config_from(const dataio::Config& c);
selfsup::SelfSupTrainConfig selfsup_train_from(const dataio::Config& c);

}  // namespace avs::cli
