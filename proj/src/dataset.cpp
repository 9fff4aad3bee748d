#include "vid3d/dataset.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "vid3d/camera_io.hpp"
#include "vid3d/error.hpp"
#include "vid3d/hashing.hpp"
#include "vid3d/video3d.hpp"

namespace vid3d {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string numbered(const char* fmt, int i) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, i);
    return buf;
}

fs::path frame_dir(const fs::path& root, int i) { return root / "frames" / numbered("%04d", i); }
fs::path seed_frame(const fs::path& root, int i) { return root / "seed" / numbered("frame_%04d.png", i); }
std::string view_name(int v) { return numbered("view_%02d.png", v); }

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("missing " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError(path.string() + " is not valid JSON: " + e.what());
    }
}

}  // namespace

void SeedVideo::validate() const {
    if (frames.empty()) throw InvalidArgument("seed video has no frames");
    for (std::size_t i = 1; i < frames.size(); ++i) {
        if (!frames[i].same_shape(frames[0])) {
            throw InvalidArgument("seed frame " + std::to_string(i) + " resolution differs from frame 0");
        }
    }
}

fs::path ground_truth_path(const fs::path& root) { return root / "ground_truth.v3dz"; }

Dataset ingest_dataset(const fs::path& root) {
    if (!fs::is_directory(root)) throw IoError("dataset root " + root.string() + " is not a directory");
    Dataset ds;
    const json meta = read_json(root / "meta.json");
    ds.seed.fps = meta.value("fps", 8.0);
    if (meta.contains("motion_score") && !meta.at("motion_score").is_null()) {
        ds.seed.motion_score = meta.at("motion_score").get<double>();
    }
    if (meta.contains("background")) {
        const auto b = meta.at("background").get<std::vector<float>>();
        if (b.size() != 3) throw FormatError("meta.json background must have 3 components");
        ds.background = {b[0], b[1], b[2]};
    }

    for (int i = 0; fs::exists(seed_frame(root, i)); ++i) ds.seed.frames.push_back(read_png(seed_frame(root, i)));
    if (ds.seed.frames.empty()) throw MissingFrameError("dataset has no seed frames (seed/frame_0000.png)");
    ds.seed.reference_image = read_png(root / "reference.png");
    ds.seed.validate();

    const int n_frames = static_cast<int>(ds.seed.frames.size());
    int frame_dirs = 0;
    if (fs::is_directory(root / "frames")) {
        for (const auto& e : fs::directory_iterator(root / "frames")) frame_dirs += e.is_directory() ? 1 : 0;
    }
    for (int i = 0; i < n_frames; ++i) {
        const fs::path dir = frame_dir(root, i);
        const std::string label = "frame " + numbered("%04d", i);
        if (!fs::is_directory(dir)) throw MissingFrameError(label + ": directory " + dir.string() + " is missing");
        const CameraManifest manifest = read_manifest(dir / "cameras.json");

        int pngs = 0;
        for (const auto& e : fs::directory_iterator(dir)) {
            const auto name = e.path().filename().string();
            if (e.is_regular_file() && name.rfind("view_", 0) == 0 && e.path().extension() == ".png") ++pngs;
        }
        if (pngs != static_cast<int>(manifest.cameras.size())) {
            throw CountMismatchError(label + ": manifest lists " + std::to_string(manifest.cameras.size()) +
                                     " cameras but directory has " + std::to_string(pngs) + " images");
        }

        FrameViewSet set;
        set.frame_index = i;
        for (std::size_t v = 0; v < manifest.cameras.size(); ++v) {
            const std::string name = manifest.images[v].empty() ? view_name(static_cast<int>(v)) : manifest.images[v];
            if (!fs::exists(dir / name)) {
                throw CountMismatchError(label + ": manifest image " + name + " not found");
            }
            set.views.push_back({manifest.cameras[v], read_png(dir / name)});
        }
        try {
            set.validate();
        } catch (const InvalidArgument& e) {
            throw CountMismatchError(label + ": " + e.what());
        }
        ds.frames.push_back(std::move(set));
    }
    if (frame_dirs != n_frames) {
        throw CountMismatchError("seed has " + std::to_string(n_frames) + " frames but " +
                                 std::to_string(frame_dirs) + " frame directories exist");
    }
    return ds;
}

void export_dataset(const fs::path& root, const Dataset& ds) {
    ds.seed.validate();
    if (ds.frames.size() != ds.seed.frames.size()) {
        throw CountMismatchError("dataset export: seed frame count differs from view-set count");
    }
    fs::create_directories(root / "seed");
    fs::create_directories(root / "frames");
    const Image& first = ds.seed.frames.front();
    json meta{{"fps", ds.seed.fps},
              {"motion_score", ds.seed.motion_score ? json(*ds.seed.motion_score) : json(nullptr)},
              {"resolution", {first.width, first.height}},
              {"frames", ds.frames.size()},
              {"views", ds.frames.front().views.size()},
              {"background", {ds.background.x(), ds.background.y(), ds.background.z()}}};
    {
        std::ofstream out(root / "meta.json");
        if (!out) throw IoError("cannot write " + (root / "meta.json").string());
        out << meta.dump(2) << '\n';
    }
    write_png(root / "reference.png", ds.seed.reference_image);
    for (std::size_t i = 0; i < ds.frames.size(); ++i) {
        write_png(seed_frame(root, static_cast<int>(i)), ds.seed.frames[i]);
        const fs::path dir = frame_dir(root, static_cast<int>(i));
        fs::create_directories(dir);
        CameraManifest manifest;
        for (std::size_t v = 0; v < ds.frames[i].views.size(); ++v) {
            const std::string name = view_name(static_cast<int>(v));
            manifest.cameras.push_back(ds.frames[i].views[v].camera);
            manifest.images.push_back(name);
            write_png(dir / name, ds.frames[i].views[v].image);
        }
        write_manifest(dir / "cameras.json", manifest);
    }
}

Dataset make_synthetic_dataset(const SyntheticScene& scene, int n_frames, int n_views, int resolution,
                               std::optional<double> motion_score) {
    if (n_frames < 1 || n_views < 1 || resolution < 1) {
        throw InvalidArgument("synthetic dataset needs frames, views and resolution >= 1");
    }
    const auto in = Intrinsics::for_orbit(resolution, resolution);
    const auto cams = orbit_cameras(n_views, Intrinsics::kDefaultOrbitRadius, 0.0, Eigen::Vector3d::Zero(), in);
    Dataset ds;
    ds.background = scene.base.background;
    ds.seed.motion_score = motion_score;
    for (int f = 0; f < n_frames; ++f) {
        FrameViewSet set = render_view_set(scene.frame(f), cams, f);
        for (auto& v : set.views) v.image = quantized(v.image);
        ds.seed.frames.push_back(set.views.front().image);
        ds.frames.push_back(std::move(set));
    }
    ds.seed.reference_image = ds.seed.frames.front();
    return ds;
}

void synth_dataset(const SyntheticScene& scene, int n_frames, int n_views, int resolution, const fs::path& root,
                   std::optional<double> motion_score) {
    const Dataset ds = make_synthetic_dataset(scene, n_frames, n_views, resolution, motion_score);
    export_dataset(root, ds);
    Video3D gt;
    for (int f = 0; f < n_frames; ++f) {
        gt.clouds.push_back(scene.frame(f));
        gt.frame_indices.push_back(f);
    }
    for (const auto& v : ds.frames.front().views) gt.cameras.cameras.push_back(v.camera);
    gt.provenance.config = {{"kind", "ground_truth"},
                            {"gaussians", scene.base.size()},
                            {"motion_amplitude", scene.motion_amplitude},
                            {"oscillation", scene.oscillation}};
    gt.provenance.config_hash = config_hash(gt.provenance.config);
    save_video3d(ground_truth_path(root), gt);
}

}  // namespace vid3d
