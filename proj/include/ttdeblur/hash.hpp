#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace ttdeblur {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;

/// FNV-1a 64-bit, chainable through `state`.
std::uint64_t fnv1a(std::span<const std::uint8_t> bytes, std::uint64_t state = kFnvOffset);
std::uint64_t fnv1a(std::string_view text, std::uint64_t state = kFnvOffset);
std::uint64_t hash_file(const std::filesystem::path& path, std::uint64_t state = kFnvOffset);

/// 16 lowercase hex digits.
std::string hex64(std::uint64_t v);

}  // namespace ttdeblur
