#include "vid3d/hashing.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>

#include "vid3d/error.hpp"

namespace vid3d {

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 digest failed");
    }
    std::string hex;
    hex.reserve(2 * len);
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof(buf), "%02x", md[i]);
        hex += buf;
    }
    return hex;
}

std::string sha256_hex(const std::string& text) {
    return sha256_hex(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string config_hash(const nlohmann::json& config) { return sha256_hex(config.dump()); }

std::uint64_t derive_frame_seed(std::uint64_t global_seed, int frame_index) {
    // splitmix64 finalizer over the pair
    std::uint64_t z = global_seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(frame_index) + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace vid3d
