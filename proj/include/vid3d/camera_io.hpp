#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "vid3d/camera.hpp"

namespace vid3d {

/// Cameras of one view set plus the image file each one belongs to.
///
/// JSON layout (`cameras.json`):
///   { "version": 1,
///     "cameras": [ { "image": "view_00.png", "width": W, "height": H,
///                    "fx": .., "fy": .., "cx": .., "cy": ..,
///                    "rotation": [9 numbers, row-major world-to-camera],
///                    "translation": [3 numbers], "near": .., "far": .. }, ... ] }
struct CameraManifest {
    std::vector<Camera> cameras;
    std::vector<std::string> images;
};

inline constexpr int kCameraManifestVersion = 1;

nlohmann::json camera_to_json(const Camera& cam);
Camera camera_from_json(const nlohmann::json& j);

nlohmann::json manifest_to_json(const CameraManifest& manifest);
CameraManifest manifest_from_json(const nlohmann::json& j);

void write_manifest(const std::filesystem::path& path, const CameraManifest& manifest);
CameraManifest read_manifest(const std::filesystem::path& path);

}  // namespace vid3d
