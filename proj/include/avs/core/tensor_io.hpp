#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "avs/core/tensor.hpp"

namespace avs {

/// Scalar type tag stored in the AVST header.
enum class DType : std::uint8_t { F32 = 0, F64 = 1 };

/// AVST layout: "AVST", u8 dtype, u8 rank, rank x u32 dims, little-endian payload.
template <typename T>
void write_avst(std::ostream& os, const Tensor<T>& tensor);
template <typename T>
void write_avst(const std::filesystem::path& path, const Tensor<T>& tensor);

/// Reads either dtype and converts to T.
template <typename T>
Tensor<T> read_avst(std::istream& is);
template <typename T>
Tensor<T> read_avst(const std::filesystem::path& path);

/// Dtype stored in the file header, without reading the payload.
DType peek_avst_dtype(const std::filesystem::path& path);

}  // namespace avs
