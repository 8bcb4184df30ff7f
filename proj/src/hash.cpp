#include "ttdeblur/hash.hpp"

#include <cstdio>

#include "ttdeblur/field_io.hpp"

namespace ttdeblur {

std::uint64_t fnv1a(std::span<const std::uint8_t> bytes, std::uint64_t state) {
  for (std::uint8_t b : bytes) {
    state ^= b;
    state *= 0x100000001b3ull;
  }
  return state;
}

std::uint64_t fnv1a(std::string_view text, std::uint64_t state) {
  return fnv1a(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()), state);
}

std::uint64_t hash_file(const std::filesystem::path& path, std::uint64_t state) {
  return fnv1a(io::read_file_bytes(path), state);
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace ttdeblur
