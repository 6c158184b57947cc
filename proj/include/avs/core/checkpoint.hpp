#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "avs/core/nn.hpp"

namespace avs {

using KeyValues = std::map<std::string, std::string>;

/// Writes each parameter to `<dir>/<name>.avst` and a `manifest.txt` listing
/// hyperparameters and parameter shapes. Overwrites existing files.
template <typename T>
void save_checkpoint(const std::filesystem::path& dir, const nn::ParamList<T>& params, const KeyValues& hyper);

/// Fills `params` from a checkpoint written by save_checkpoint; names and
/// shapes must match. Returns the stored hyperparameters.
template <typename T>
KeyValues load_checkpoint(const std::filesystem::path& dir, const nn::ParamList<T>& params);

/// Hyperparameters of a checkpoint, without touching tensors.
KeyValues read_checkpoint_manifest(const std::filesystem::path& dir);

}  // namespace avs
