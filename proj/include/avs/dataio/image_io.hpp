#pragma once

#include <filesystem>

#include "avs/core/tensor.hpp"

namespace avs::dataio {

/// 8-bit RGB PNG from a 3 x H x W tensor in [0, 1] (values are rounded).
void write_rgb_png(const std::filesystem::path& path, const Tensor<float>& rgb);
/// Reads 8-bit gray/RGB/RGBA PNG as 3 x H x W in [0, 1].
Tensor<float> read_rgb_png(const std::filesystem::path& path);

/// 16-bit gray PNG, metres stored as rounded millimetres (clamped to 65535).
void write_depth_png(const std::filesystem::path& path, const Tensor<float>& depth);
Tensor<float> read_depth_png(const std::filesystem::path& path);

}  // namespace avs::dataio
