#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace gprobe {

/// CRC-32 (zlib polynomial) of a byte range, optionally continuing `seed`.
std::uint32_t crc32(std::span<const std::byte> bytes, std::uint32_t seed = 0);
std::uint32_t crc32(std::string_view text, std::uint32_t seed = 0);

/// Eight lowercase hex digits.
std::string hex32(std::uint32_t value);

}  // namespace gprobe
