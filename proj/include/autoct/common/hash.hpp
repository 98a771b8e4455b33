#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace autoct {

/// Lowercase hex SHA-256 digest (64 characters) of the given bytes.
std::string sha256_hex(std::string_view bytes);

/// 64-bit FNV-1a. Stable across platforms; used for feature hashing and seed mixing.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace autoct
