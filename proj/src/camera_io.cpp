#include "vid3d/camera_io.hpp"

#include <fstream>

#include "vid3d/error.hpp"

namespace vid3d {

using nlohmann::json;

json camera_to_json(const Camera& cam) {
    json rot = json::array();
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) rot.push_back(cam.rotation(r, c));
    return json{{"width", cam.width},
                {"height", cam.height},
                {"fx", cam.fx},
                {"fy", cam.fy},
                {"cx", cam.cx},
                {"cy", cam.cy},
                {"rotation", rot},
                {"translation", {cam.translation.x(), cam.translation.y(), cam.translation.z()}},
                {"near", cam.near},
                {"far", cam.far}};
}

Camera camera_from_json(const json& j) {
    try {
        Camera cam;
        cam.width = j.at("width").get<int>();
        cam.height = j.at("height").get<int>();
        cam.fx = j.at("fx").get<double>();
        cam.fy = j.at("fy").get<double>();
        cam.cx = j.at("cx").get<double>();
        cam.cy = j.at("cy").get<double>();
        const auto& rot = j.at("rotation");
        const auto& tr = j.at("translation");
        if (rot.size() != 9 || tr.size() != 3) throw FormatError("camera rotation/translation has wrong length");
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) cam.rotation(r, c) = rot.at(r * 3 + c).get<double>();
        for (int i = 0; i < 3; ++i) cam.translation[i] = tr.at(i).get<double>();
        cam.near = j.at("near").get<double>();
        cam.far = j.at("far").get<double>();
        return cam;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed camera entry: ") + e.what());
    }
}

json manifest_to_json(const CameraManifest& manifest) {
    json cams = json::array();
    for (std::size_t i = 0; i < manifest.cameras.size(); ++i) {
        json c = camera_to_json(manifest.cameras[i]);
        if (i < manifest.images.size() && !manifest.images[i].empty()) c["image"] = manifest.images[i];
        cams.push_back(std::move(c));
    }
    return json{{"version", kCameraManifestVersion}, {"cameras", cams}};
}

CameraManifest manifest_from_json(const json& j) {
    CameraManifest m;
    try {
        const int version = j.value("version", kCameraManifestVersion);
        if (version != kCameraManifestVersion) {
            throw VersionMismatchError("camera manifest version " + std::to_string(version) +
                                       " is not supported");
        }
        for (const auto& c : j.at("cameras")) {
            m.cameras.push_back(camera_from_json(c));
            m.images.push_back(c.value("image", std::string{}));
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed camera manifest: ") + e.what());
    }
    return m;
}

void write_manifest(const std::filesystem::path& path, const CameraManifest& manifest) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << manifest_to_json(manifest).dump(2) << '\n';
}

CameraManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read camera manifest " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw FormatError("camera manifest " + path.string() + " is not valid JSON: " + e.what());
    }
    return manifest_from_json(j);
}

}  // namespace vid3d
