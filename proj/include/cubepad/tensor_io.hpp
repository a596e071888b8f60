#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "cubepad/tensor.hpp"

namespace cubepad {

// CPT1 layout, all integers and floats little-endian:
//   "CPT1" | u32 ndim | u32 dims[ndim] | f32 payload[prod(dims)]
// Nothing may follow the payload.
std::vector<std::uint8_t> encode_tensor(const Tensor& t);
Tensor decode_tensor(std::span<const std::uint8_t> bytes);

Tensor read_tensor(const std::filesystem::path& path);
void write_tensor(const Tensor& t, const std::filesystem::path& path);

}  // namespace cubepad
