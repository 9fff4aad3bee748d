#pragma once

#include <cstdint>
#include <span>
#include <string>

#include <json.hpp>

namespace vid3d {

/// Lower-case hex SHA-256.
std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(const std::string& text);

/// SHA-256 of the compact JSON dump (object keys are sorted, so this is canonical).
std::string config_hash(const nlohmann::json& config);

/// Per-frame RNG seed; a pure function of (global seed, frame index).
std::uint64_t derive_frame_seed(std::uint64_t global_seed, int frame_index);

}  // namespace vid3d
