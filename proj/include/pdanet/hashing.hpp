#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace pdanet {

// FNV-1a 64-bit; used for provenance records and directory comparisons.
inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t file_hash(const std::filesystem::path& path);

// hash of all regular files under a directory, keyed by relative path
std::uint64_t dir_hash(const std::filesystem::path& dir);

std::string hex64(std::uint64_t v);

} // namespace pdanet
