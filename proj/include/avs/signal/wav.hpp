#pragma once

#include <filesystem>

#include "avs/signal/signal.hpp"

namespace avs::signal {

/// RIFF PCM, 16-bit signed little-endian, two channels.
void write_wav(const std::filesystem::path& path, const EchoClip& clip);

/// Reads 16-bit PCM with one or two channels (mono is duplicated).
EchoClip read_wav(const std::filesystem::path& path);

}  // namespace avs::signal
