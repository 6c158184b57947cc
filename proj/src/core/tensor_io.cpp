#include "avs/core/tensor_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

namespace avs {

namespace {

constexpr std::array<char, 4> kMagic{'A', 'V', 'S', 'T'};

template <typename U>
void put_le(std::ostream& os, U value) {
  std::array<unsigned char, sizeof(U)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(U));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  os.write(reinterpret_cast<const char*>(bytes.data()), sizeof(U));
}

template <typename U>
U get_le(std::istream& is) {
  std::array<unsigned char, sizeof(U)> bytes;
  if (!is.read(reinterpret_cast<char*>(bytes.data()), sizeof(U))) throw std::runtime_error("AVST: truncated stream");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  U value;
  std::memcpy(&value, bytes.data(), sizeof(U));
  return value;
}

template <typename T>
constexpr DType dtype_of() {
  return std::is_same_v<T, float> ? DType::F32 : DType::F64;
}

}  // namespace

template <typename T>
void write_avst(std::ostream& os, const Tensor<T>& tensor) {
  if (tensor.rank() > 255) throw std::invalid_argument("AVST: rank above 255");
  os.write(kMagic.data(), kMagic.size());
  put_le<std::uint8_t>(os, static_cast<std::uint8_t>(dtype_of<T>()));
  put_le<std::uint8_t>(os, static_cast<std::uint8_t>(tensor.rank()));
  for (int d : tensor.shape()) put_le<std::uint32_t>(os, static_cast<std::uint32_t>(d));
  if constexpr (std::endian::native == std::endian::little) {
    os.write(reinterpret_cast<const char*>(tensor.data()), static_cast<std::streamsize>(tensor.size() * sizeof(T)));
  } else {
    for (T v : tensor.values()) put_le<T>(os, v);
  }
  if (!os) throw std::runtime_error("AVST: write failed");
}

template <typename T>
void write_avst(const std::filesystem::path& path, const Tensor<T>& tensor) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("AVST: cannot open " + path.string() + " for writing");
  write_avst(os, tensor);
}

template <typename T>
Tensor<T> read_avst(std::istream& is) {
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic) throw std::runtime_error("AVST: bad magic");
  const auto code = get_le<std::uint8_t>(is);
  if (code > 1) throw std::runtime_error("AVST: unknown dtype code " + std::to_string(code));
  const auto rank = get_le<std::uint8_t>(is);
  Shape shape(rank);
  for (auto& d : shape) {
    const auto v = get_le<std::uint32_t>(is);
    if (v == 0 || v > static_cast<std::uint32_t>(std::numeric_limits<int>::max())) {
      throw std::runtime_error("AVST: invalid dimension " + std::to_string(v));
    }
    d = static_cast<int>(v);
  }
  const std::size_t n = shape_numel(shape);
  std::vector<T> values(n);
  if (static_cast<DType>(code) == DType::F32) {
    for (auto& v : values) v = static_cast<T>(get_le<float>(is));
  } else {
    for (auto& v : values) v = static_cast<T>(get_le<double>(is));
  }
  return Tensor<T>(std::move(shape), std::move(values));
}

template <typename T>
Tensor<T> read_avst(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("AVST: cannot open " + path.string());
  return read_avst<T>(is);
}

DType peek_avst_dtype(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic) throw std::runtime_error("AVST: bad magic in " + path.string());
  const auto code = get_le<std::uint8_t>(is);
  if (code > 1) throw std::runtime_error("AVST: unknown dtype code");
  return static_cast<DType>(code);
}

template void write_avst<float>(std::ostream&, const Tensor<float>&);
template void write_avst<double>(std::ostream&, const Tensor<double>&);
template void write_avst<float>(const std::filesystem::path&, const Tensor<float>&);
template void write_avst<double>(const std::filesystem::path&, const Tensor<double>&);
template Tensor<float> read_avst<float>(std::istream&);
template Tensor<double> read_avst<double>(std::istream&);
template Tensor<float> read_avst<float>(const std::filesystem::path&);
template Tensor<double> read_avst<double>(const std::filesystem::path&);

}  // namespace avs
