#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "provgen/core/image.hpp"

namespace provgen {

using Digest = std::array<std::uint8_t, 32>;

inline constexpr std::string_view kDigestAlgorithm = "SHA-256";
inline constexpr std::string_view kKeyedDigestAlgorithm = "HMAC-SHA256";

Digest sha256(std::span<const std::uint8_t> bytes);
Digest sha256(std::string_view text);
Digest hmac_sha256(std::span<const std::uint8_t> key,
                   std::span<const std::uint8_t> message);

std::string to_hex(std::span<const std::uint8_t> bytes);
Digest digest_from_hex(std::string_view hex);

/// Digest of the canonical PPM serialization of `image`.
Digest content_hash(const Image& image);

/// Hex SHA-256 of a user identifier; raw identities never leave this call.
std::string hash_user_id(std::string_view user_id);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

}  // namespace provgen
