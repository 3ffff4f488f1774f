#include "gprobe/checksum.hpp"

#include <cstdio>

#include <zlib.h>

namespace gprobe {

std::uint32_t crc32(std::span<const std::byte> bytes, std::uint32_t seed) {
  uLong crc = seed;
  const auto* data = reinterpret_cast<const Bytef*>(bytes.data());
  std::size_t remaining = bytes.size();
  // zlib takes uInt lengths; feed large buffers in chunks.
  while (remaining > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(remaining, 1u << 30));
    crc = ::crc32(crc, data, chunk);
    data += chunk;
    remaining -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

std::uint32_t crc32(std::string_view text, std::uint32_t seed) {
  return crc32(std::as_bytes(std::span(text.data(), text.size())), seed);
}

std::string hex32(std::uint32_t value) {
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", value);
  return buf;
}

}  // namespace gprobe
