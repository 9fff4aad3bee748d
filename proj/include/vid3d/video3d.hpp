#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "vid3d/camera_io.hpp"
#include "vid3d/gaussian.hpp"

namespace vid3d {

struct Provenance {
    std::string config_hash;  // hex digest of the canonical run config
    std::uint64_t global_seed = 0;
    std::vector<std::uint64_t> frame_seeds;
    nlohmann::json config = nlohmann::json::object();
};

/// Sequence of per-frame clouds; the reconstruction output.
struct Video3D {
    std::vector<GaussianCloud> clouds;
    std::vector<int> frame_indices;  // seed-frame index of each cloud
    CameraManifest cameras;          // views used for reconstruction
    Provenance provenance;

    std::size_t frame_count() const { return clouds.size(); }
};

/// .v3dz layout, all integers and floats little-endian:
///   "V3DZ" | u32 version | u32 header_bytes | header JSON | u32 crc32(header JSON)
///   | u32 frame_count | frame_count x { u32 frame_index | u32 n | f32[3] background
///   | f32[n*14] params | u32 crc32(frame block) }
/// Parameter order per splat: mean(3) rotation wxyz(4) log_scale(3) opacity_logit(1) color(3).
inline constexpr std::uint32_t kV3dzVersion = 1;

std::vector<std::uint8_t> encode_video3d(const Video3D& v);
/// Throws VersionMismatchError, ChecksumError (corruption or truncation), FormatError.
Video3D decode_video3d(const std::vector<std::uint8_t>& bytes);

void save_video3d(const std::filesystem::path& path, const Video3D& v);
Video3D load_video3d(const std::filesystem::path& path);

/// ASCII PLY for external viewers: position, 8-bit color, and the full
/// float parameters (color_r/g/b, opacity, scale_*, rot_*).
void export_ply(const std::filesystem::path& path, const GaussianCloud& cloud);

struct PlyPoint {
    Eigen::Vector3f mean;
    Eigen::Vector3f color;
    float opacity_logit = 0.0f;
};
std::vector<PlyPoint> read_ply_points(const std::filesystem::path& path);

}  // namespace vid3d
