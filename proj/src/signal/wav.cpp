#include "avs/signal/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace avs::signal {

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u16(std::ostream& os, std::uint16_t v) {
  const unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
  os.write(reinterpret_cast<const char*>(b), 2);
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::int16_t quantize(double v) {
  return static_cast<std::int16_t>(std::lround(std::clamp(v, -1.0, 1.0) * 32767.0));
}

}  // namespace

void write_wav(const std::filesystem::path& path, const EchoClip& clip) {
  if (clip.left.size() != clip.right.size()) throw std::invalid_argument("write_wav: channel lengths differ");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_wav: cannot open " + path.string());
  const auto frames = static_cast<std::uint32_t>(clip.length());
  const std::uint32_t data_bytes = frames * 2 * 2;
  os.write("RIFF", 4);
  put_u32(os, 36 + data_bytes);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  put_u32(os, 16);
  put_u16(os, 1);  // PCM
  put_u16(os, 2);
  put_u32(os, static_cast<std::uint32_t>(clip.sample_rate));
  put_u32(os, static_cast<std::uint32_t>(clip.sample_rate) * 4);
  put_u16(os, 4);
  put_u16(os, 16);
  os.write("data", 4);
  put_u32(os, data_bytes);
  for (std::size_t i = 0; i < clip.length(); ++i) {
    put_u16(os, static_cast<std::uint16_t>(quantize(clip.left[i])));
    put_u16(os, static_cast<std::uint16_t>(quantize(clip.right[i])));
  }
  if (!os) throw std::runtime_error("write_wav: write failed for " + path.string());
}

EchoClip read_wav(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_wav: cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw std::runtime_error("read_wav: " + path.string() + " is not a RIFF/WAVE file");
  }
  int channels = 0, bits = 0, format = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_len = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t len = get_u32(chunk + 4);
    if (pos + 8 + len > bytes.size()) throw std::runtime_error("read_wav: truncated chunk in " + path.string());
    if (std::memcmp(chunk, "fmt ", 4) == 0 && len >= 16) {
      format = get_u16(chunk + 8);
      channels = get_u16(chunk + 10);
      rate = get_u32(chunk + 12);
      bits = get_u16(chunk + 22);
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_len = len;
    }
    pos += 8 + len + (len & 1u);
  }
  if (format != 1 || bits != 16 || (channels != 1 && channels != 2) || rate == 0 || data == nullptr) {
    throw std::runtime_error("read_wav: " + path.string() + " is not 16-bit PCM mono/stereo");
  }
  EchoClip clip;
  clip.sample_rate = static_cast<int>(rate);
  const std::size_t frames = data_len / (2u * static_cast<std::size_t>(channels));
  clip.left.resize(frames);
  clip.right.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    const unsigned char* f = data + i * 2u * static_cast<std::size_t>(channels);
    const auto l = static_cast<std::int16_t>(get_u16(f));
    const auto r = channels == 2 ? static_cast<std::int16_t>(get_u16(f + 2)) : l;
    clip.left[i] = l / 32767.0;
    clip.right[i] = r / 32767.0;
  }
  return clip;
}

}  // namespace avs::signal
