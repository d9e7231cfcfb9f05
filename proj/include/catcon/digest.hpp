#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace catcon {

using Digest = std::array<std::uint8_t, 32>;

/// All-zero digest; prev_hash of the first stage record.
inline constexpr Digest kZeroDigest{};

/// SHA-256 of `prefix ‖ body`.
[[nodiscard]] Digest sha256(std::span<std::uint8_t const> prefix, std::string_view body);
[[nodiscard]] Digest sha256(std::string_view body);

[[nodiscard]] std::string to_hex(Digest const& d);
/// Throws std::invalid_argument unless `hex` is exactly 64 hex digits.
[[nodiscard]] Digest digest_from_hex(std::string_view hex);

}  // namespace catcon
