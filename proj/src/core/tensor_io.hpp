#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>

#include "core/tensor.hpp"

namespace ridgelayer {

// RLT1 tensor container, little-endian throughout:
//   magic "RLT1" | dtype u8 (0 = f64) | rank u8 (1 or 2) | dims u64 x rank |
//   payload row-major. No padding, no compression; round-trips bit-exact.
using Tensor = std::variant<Matrix, Vector>;

std::string encode_tensor(const Tensor& t);
Tensor decode_tensor(std::span<const std::uint8_t> bytes);

void write_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor read_tensor(const std::filesystem::path& path);

// Rank-checked file readers.
Matrix read_matrix(const std::filesystem::path& path);
Vector read_vector(const std::filesystem::path& path);

}  // namespace ridgelayer
