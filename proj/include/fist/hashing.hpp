#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace fist {

// CRC-32 (IEEE, reflected 0xEDB88320) over raw bytes.
std::uint32_t crc32(std::span<const unsigned char> bytes);
std::uint32_t crc32(const void* data, std::size_t size);

// FNV-1a 64-bit digest rendered as 16 hex chars; used for config hashes.
std::uint64_t fnv1a(std::string_view s);
std::string fnv1a_hex(std::string_view s);

}  // namespace fist
