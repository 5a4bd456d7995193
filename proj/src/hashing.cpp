#include "pdanet/hashing.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <vector>

namespace pdanet {

std::uint64_t file_hash(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("file_hash: cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[65536];
  while (is) {
    is.read(buf, sizeof buf);
    h = fnv1a64(buf, static_cast<std::size_t>(is.gcount()), h);
  }
  return h;
}

std::uint64_t dir_hash(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir))
    if (entry.is_regular_file()) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& f : files) {
    const auto rel = std::filesystem::relative(f, dir).generic_string();
    h = fnv1a64(rel.data(), rel.size(), h);
    const auto fh = file_hash(f);
    h = fnv1a64(&fh, sizeof fh, h);
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

} // namespace pdanet
