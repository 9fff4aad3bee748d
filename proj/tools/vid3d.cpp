// vid3d command-line driver.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error, 3 embedding service unreachable.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vid3d/camera_io.hpp"
#include "vid3d/dataset.hpp"
#include "vid3d/embedder.hpp"
#include "vid3d/error.hpp"
#include "vid3d/evaluate.hpp"
#include "vid3d/hashing.hpp"
#include "vid3d/pipeline.hpp"
#include "vid3d/synthetic.hpp"
#include "vid3d/video3d.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace vid3d;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitService = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Keys that only steer execution or name outputs; they never change results
// and are left out of the recorded config so reruns hash identically.
const char* const kExecutionKeys[] = {"workers", "out", "config_file", "trace_dir", "checkpoint_dir",
                                      "checkpoint_every", "ply_dir"};

json recorded_config(json cfg) {
    for (const char* k : kExecutionKeys) cfg.erase(k);
    return cfg;
}

json read_json_file(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw UsageError("cannot open " + p.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw UsageError(p.string() + ": " + e.what());
    }
}

void write_text(const fs::path& p, const std::string& text) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError("cannot write " + p.string());
    out << text;
    if (!out) throw IoError("failed writing " + p.string());
}

void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

std::string default_embedder() {
    const char* env = std::getenv(kEmbedUrlEnv);
    return env && *env ? env : "surrogate";
}

std::unique_ptr<Embedder> make_embedder(const std::string& name) {
    if (name == "surrogate") return surrogate_embedder();
    if (name.rfind("http://", 0) == 0) return remote_embedder(name);
    throw UsageError("--embedder must be 'surrogate' or an http:// url, got '" + name + "'");
}

/// Flag registry: each flag writes into the config only when given, so the
/// precedence is defaults < --config file < flags.
class Command {
public:
    Command(CLI::App& parent, const std::string& name, const std::string& desc, json defaults)
        : app_(parent.add_subcommand(name, desc)), config_(std::move(defaults)) {
        config_["command"] = name;
        app_->add_option("--config", config_file_, "JSON run config; flags override its values");
    }

    template <class T>
    CLI::Option* flag(const std::string& names, const std::string& pointer, const std::string& desc) {
        auto value = std::make_shared<T>();
        auto* opt = app_->add_option(names, *value, desc);
        setters_.push_back([opt, value, ptr = json::json_pointer(pointer)](json& cfg) {
            if (opt->count() > 0) cfg[ptr] = *value;
        });
        return opt;
    }

    CLI::App* app() { return app_; }

    /// Fully resolved config: defaults, then the file, then flags.
    json resolve() const {
        json cfg = config_;
        if (!config_file_.empty()) {
            json file = read_json_file(config_file_);
            if (!file.is_object()) throw UsageError("--config must hold a JSON object");
            file.erase("command");
            cfg.merge_patch(file);
        }
        for (const auto& s : setters_) s(cfg);
        return cfg;
    }

private:
    CLI::App* app_;
    json config_;
    std::string config_file_;
    std::vector<std::function<void(json&)>> setters_;
};

template <class T>
T get(const json& cfg, const char* key) {
    try {
        return cfg.at(key).get<T>();
    } catch (const json::exception& e) {
        throw UsageError(std::string("config key '") + key + "': " + e.what());
    }
}

fs::path require_path(const json& cfg, const char* key, const char* flag) {
    const auto s = cfg.value(key, std::string{});
    if (s.empty()) throw UsageError(std::string(flag) + " is required");
    return s;
}

OptimConfig optim_from(const json& cfg) {
    try {
        OptimConfig c = OptimConfig::from_json(cfg.value("optim", json::object()));
        c.validate();
        return c;
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
}

EvalOptions eval_from(const json& cfg) {
    const EvalOptions o = EvalOptions::from_json(cfg.value("eval", json::object()));
    if (o.n_cameras < 1) throw UsageError("--cameras must be >= 1");
    if (o.resolution < 1) throw UsageError("--resolution must be >= 1");
    return o;
}

// synth-data ------------------------------------------------------------

int cmd_synth(const json& cfg) {
    const json& s = cfg.at("synth");
    const auto scene_kind = s.value("scene", std::string("blobs"));
    const int gaussians = s.value("gaussians", 0);
    const int frames = s.value("frames", 0);
    const int views = s.value("views", 0);
    const int resolution = s.value("resolution", 0);
    const double amplitude = s.value("motion_amplitude", 0.0);
    const double oscillation = s.value("oscillation", 0.0);
    const auto seed = s.value("seed", std::uint64_t{0});
    const auto grid = s.value("motion_grid", std::vector<double>{});
    if (scene_kind != "blobs" && scene_kind != "ring") throw UsageError("--scene must be blobs or ring");
    if (gaussians < 1) throw UsageError("--gaussians must be >= 1");
    if (frames < 1) throw UsageError("--frames must be >= 1");
    if (views < 1) throw UsageError("--views must be >= 1");
    if (resolution < 8) throw UsageError("--resolution must be >= 8");
    const fs::path out = require_path(cfg, "out", "--out");

    auto make_scene = [&](double amp) {
        return scene_kind == "ring" ? SyntheticScene::ring(gaussians, seed, amp, oscillation)
                                    : SyntheticScene::blobs(gaussians, seed, amp, oscillation);
    };
    std::optional<double> score;
    if (s.contains("motion_score") && !s["motion_score"].is_null()) score = s["motion_score"].get<double>();

    if (grid.empty()) {
        synth_dataset(make_scene(amplitude), frames, views, resolution, out, score);
        std::cout << "wrote " << frames << " frames x " << views << " views to " << out.string() << "\n";
    } else {
        for (double m : grid) {
            const fs::path dir = motion_dataset_path(out, m);
            synth_dataset(make_scene(m), frames, views, resolution, dir, m);
            std::cout << "wrote " << dir.string() << "\n";
        }
    }
    const json rec = recorded_config(cfg);
    write_json(out / "run_config.json", {{"run_config", rec}, {"run_config_hash", config_hash(rec)}});
    return kExitOk;
}

// reconstruct -----------------------------------------------------------

int cmd_reconstruct(json cfg) {
    const fs::path dataset_root = require_path(cfg, "dataset", "--dataset");
    const fs::path out = require_path(cfg, "out", "--out");
    const int workers = cfg.value("workers", 1);
    const int n_views = cfg.value("views", 0);
    const int max_frames = cfg.value("max_frames", 0);
    if (workers < 1) throw UsageError("--workers must be >= 1");
    if (n_views < 0 || max_frames < 0) throw UsageError("--views and --frames must be >= 0");

    const Dataset ds = ingest_dataset(dataset_root);
    cfg["optim"]["background"] = {ds.background.x(), ds.background.y(), ds.background.z()};
    const OptimConfig optim = optim_from(cfg);

    std::vector<FrameViewSet> sets;
    const std::size_t nf = max_frames > 0 ? std::min<std::size_t>(max_frames, ds.frames.size()) : ds.frames.size();
    for (std::size_t f = 0; f < nf; ++f) {
        const auto& fr = ds.frames[f];
        if (n_views > 0) {
            try {
                sets.push_back(fr.subset(decimate_views(static_cast<int>(fr.views.size()), n_views)));
            } catch (const InvalidArgument& e) {
                throw UsageError(e.what());
            }
        } else {
            sets.push_back(fr);
        }
    }

    PipelineOptions popts;
    popts.workers = workers;
    popts.run_config = recorded_config(cfg);
    const auto ckpt_dir = cfg.value("checkpoint_dir", std::string{});
    const int ckpt_every = cfg.value("checkpoint_every", 0);
    if (ckpt_every > 0) {
        const fs::path dir = ckpt_dir.empty() ? out.parent_path() / (out.stem().string() + "_checkpoints") : fs::path(ckpt_dir);
        fs::create_directories(dir);
        popts.checkpoint_interval = ckpt_every;
        popts.checkpoint = [dir, rc = popts.run_config](int frame, int step, const GaussianCloud& cloud) {
            Video3D v;
            v.clouds.push_back(cloud);
            v.frame_indices.push_back(frame);
            v.provenance.config = rc;
            v.provenance.config_hash = config_hash(rc);
            char name[64];
            std::snprintf(name, sizeof name, "frame_%04d_step_%06d.v3dz", frame, step);
            save_video3d(dir / name, v);
        };
    }

    const VideoReconstruction rec = reconstruct_video(sets, optim, popts);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    save_video3d(out, rec.video);

    const auto trace_dir = cfg.value("trace_dir", std::string{});
    const auto ply_dir = cfg.value("ply_dir", std::string{});
    for (std::size_t i = 0; i < rec.traces.size(); ++i) {
        const int fi = rec.video.frame_indices[i];
        char name[32];
        const auto& t = rec.traces[i];
        if (!t.empty()) {
            std::printf("frame %04d: loss %.5f -> %.5f, train psnr %.2f dB, %zu splats\n", fi, t.front().loss,
                        t.back().loss, t.back().psnr_train, rec.video.clouds[i].size());
        } else if (rec.video.clouds[i].size() > 0) {
            std::printf("frame %04d: no steps, %zu splats\n", fi, rec.video.clouds[i].size());
        }
        if (!trace_dir.empty() && !t.empty()) {
            std::snprintf(name, sizeof name, "frame_%04d.csv", fi);
            fs::create_directories(trace_dir);
            write_loss_trace_csv(fs::path(trace_dir) / name, t);
        }
        if (!ply_dir.empty() && rec.video.clouds[i].size() > 0) {
            std::snprintf(name, sizeof name, "frame_%04d.ply", fi);
            fs::create_directories(ply_dir);
            export_ply(fs::path(ply_dir) / name, rec.video.clouds[i]);
        }
    }
    for (const auto& f : rec.failures) {
        std::fprintf(stderr, "vid3d: frame %04d failed: %s\n", f.frame_index, f.message.c_str());
    }
    std::printf("wrote %s (%zu frames, config %s)\n", out.string().c_str(), rec.video.frame_count(),
                rec.video.provenance.config_hash.c_str());
    return rec.ok() ? kExitOk : kExitRuntime;
}

// render ----------------------------------------------------------------

int cmd_render(const json& cfg) {
    const fs::path video_path = require_path(cfg, "video", "--video");
    const fs::path out = require_path(cfg, "out", "--out");
    const EvalOptions eo = eval_from(cfg);
    const Video3D video = load_video3d(video_path);

    std::vector<Camera> cams;
    const auto camera_file = cfg.value("camera_file", std::string{});
    if (!camera_file.empty()) {
        cams = read_manifest(camera_file).cameras;
        if (cams.empty()) throw UsageError("--camera-file lists no cameras");
    } else {
        cams = eval_cameras(video, eo);
    }

    CameraManifest manifest;
    for (std::size_t k = 0; k < cams.size(); ++k) {
        char dir[32];
        std::snprintf(dir, sizeof dir, "cam_%02zu", k);
        fs::create_directories(out / dir);
        for (std::size_t f = 0; f < video.frame_count(); ++f) {
            char name[32];
            std::snprintf(name, sizeof name, "frame_%04d.png", video.frame_indices[f]);
            write_png(out / dir / name, render(video.clouds[f], cams[k], eo.render).image);
        }
        manifest.cameras.push_back(cams[k]);
        manifest.images.push_back(dir);
    }
    write_manifest(out / "cameras.json", manifest);
    const json rec = recorded_config(cfg);
    write_json(out / "run_config.json", {{"run_config", rec}, {"run_config_hash", config_hash(rec)},
                                         {"video_config_hash", video.provenance.config_hash}});
    std::printf("rendered %zu cameras x %zu frames to %s\n", cams.size(), video.frame_count(), out.string().c_str());
    return kExitOk;
}

// evaluate --------------------------------------------------------------

int cmd_evaluate(const json& cfg) {
    const fs::path video_path = require_path(cfg, "video", "--video");
    const fs::path out = require_path(cfg, "out", "--out");
    const EvalOptions eo = eval_from(cfg);
    auto embedder = make_embedder(cfg.value("embedder", std::string("surrogate")));

    const Video3D video = load_video3d(video_path);
    const Image reference = read_png(require_path(cfg, "reference", "--reference"));
    std::optional<Video3D> gt;
    const auto gt_path = cfg.value("ground_truth", std::string{});
    if (!gt_path.empty()) gt = load_video3d(gt_path);

    EvalReport report = evaluate_video(video, reference, *embedder, gt ? &*gt : nullptr, eo);
    report.label = video_path.stem().string();
    const json rec = recorded_config(cfg);
    json j = report.to_json();
    j["run_config"] = rec;
    j["run_config_hash"] = config_hash(rec);
    write_json(out, j);

    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", report.clip_i);
    std::vector<std::string> row{report.label, buf};
    if (report.psnr) {
        std::snprintf(buf, sizeof buf, "%.2f", *report.psnr);
        row.emplace_back(buf);
    } else {
        row.emplace_back();
    }
    const std::string table = format_table({"Model", "CLIP-I", "PSNR"}, {row});
    fs::path txt = out;
    txt.replace_extension(".txt");
    write_text(txt, table);
    std::cout << table;
    return kExitOk;
}

// ablate ----------------------------------------------------------------

int cmd_ablate(json cfg) {
    const fs::path dataset_root = require_path(cfg, "dataset", "--dataset");
    const fs::path out = require_path(cfg, "out", "--out");
    const int workers = cfg.value("workers", 1);
    if (workers < 1) throw UsageError("--workers must be >= 1");
    if (cfg.contains("grid_file")) {
        cfg["grid"] = read_json_file(cfg["grid_file"].get<std::string>());
        cfg.erase("grid_file");
    }
    AblationGrid grid;
    try {
        grid = AblationGrid::from_json(cfg.value("grid", json::object()));
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
    const OptimConfig optim = optim_from(cfg);
    auto embedder = make_embedder(cfg.value("embedder", std::string("surrogate")));
    if (auto* remote = dynamic_cast<RemoteEmbedder*>(embedder.get())) remote->health();

    const auto reports = ablate(dataset_root, grid, optim, *embedder, workers);
    const json rec = recorded_config(cfg);
    const std::string hash = config_hash(rec);
    fs::create_directories(out);
    json all = json::array();
    int failed = 0;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        json j = reports[i].to_json();
        j["run_config_hash"] = hash;
        char name[32];
        std::snprintf(name, sizeof name, "cell_%03zu.json", i);
        write_json(out / name, j);
        all.push_back(j);
        if (reports[i].error) {
            ++failed;
            std::fprintf(stderr, "vid3d: cell %s failed: %s\n", reports[i].label.c_str(), reports[i].error->c_str());
        }
    }
    const std::string table = ablation_summary(reports);
    write_text(out / "summary.txt", table);
    write_json(out / "summary.json", {{"run_config", rec}, {"run_config_hash", hash}, {"reports", all}});
    std::cout << table;
    return failed == 0 ? kExitOk : kExitRuntime;
}

// verify ----------------------------------------------------------------

int check(const std::string& what, const std::string& stored, const std::string& computed) {
    if (stored == computed) {
        std::printf("ok %s %s\n", what.c_str(), computed.c_str());
        return kExitOk;
    }
    std::printf("MISMATCH %s stored %s computed %s\n", what.c_str(), stored.c_str(), computed.c_str());
    return kExitRuntime;
}

int verify_json(const fs::path& p) {
    const json j = read_json_file(p);
    int rc = kExitOk;
    bool any = false;
    if (j.contains("run_config") && j.contains("run_config_hash")) {
        rc |= check(p.string() + " run_config", j["run_config_hash"], config_hash(j["run_config"]));
        any = true;
    }
    if (j.contains("config") && j.contains("config_hash") && !j["config_hash"].get<std::string>().empty()) {
        rc |= check(p.string() + " config", j["config_hash"], config_hash(j["config"]));
        any = true;
    }
    if (!any) throw UsageError(p.string() + " carries no config hash");
    return rc;
}

int cmd_verify(const std::string& target) {
    const fs::path p = target;
    if (!fs::exists(p)) throw UsageError(target + " does not exist");
    if (fs::is_directory(p)) {
        for (const char* name : {"run_config.json", "summary.json"}) {
            if (fs::exists(p / name)) return verify_json(p / name);
        }
        throw UsageError(target + " holds no run_config.json or summary.json");
    }
    if (p.extension() == ".v3dz") {
        const Video3D v = load_video3d(p);
        return check(p.string(), v.provenance.config_hash, config_hash(v.provenance.config));
    }
    return verify_json(p);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Per-frame Gaussian splat reconstruction and evaluation"};
    app.require_subcommand(1);

    const OptimConfig optim_defaults;
    const EvalOptions eval_defaults;

    Command synth(app, "synth-data", "Render a synthetic multi-view video dataset",
                  {{"synth",
                    {{"scene", "blobs"},
                     {"gaussians", 200},
                     {"frames", kDefaultSeedFrames},
                     {"views", 18},
                     {"resolution", 128},
                     {"motion_amplitude", 0.3},
                     {"oscillation", 0.0},
                     {"seed", 0},
                     {"motion_score", nullptr},
                     {"motion_grid", json::array()}}},
                   {"out", ""}});
    synth.flag<std::string>("--scene", "/synth/scene", "blobs | ring");
    synth.flag<int>("--gaussians", "/synth/gaussians", "Gaussians in the ground-truth scene");
    synth.flag<int>("--frames", "/synth/frames", "Number of timesteps");
    synth.flag<int>("--views", "/synth/views", "Orbit views per timestep");
    synth.flag<int>("--resolution", "/synth/resolution", "Square image size");
    synth.flag<double>("--motion-amplitude", "/synth/motion_amplitude", "Peak yaw of the trajectory (radians)");
    synth.flag<double>("--oscillation", "/synth/oscillation", "Per-splat oscillation, fraction of the amplitude");
    synth.flag<std::uint64_t>("--seed", "/synth/seed", "Scene seed");
    synth.flag<double>("--motion-score", "/synth/motion_score", "Opaque motion score stored in meta.json");
    synth.flag<std::vector<double>>("--motion-grid", "/synth/motion_grid",
                                    "Write one dataset per amplitude under OUT/motion_<value>");
    synth.flag<std::string>("--out", "/out", "Output directory");

    Command recon(app, "reconstruct", "Optimize one splat cloud per frame",
                  {{"dataset", ""}, {"out", ""}, {"optim", optim_defaults.to_json()}, {"views", 0},
                   {"max_frames", 0}, {"workers", 1}, {"trace_dir", ""}, {"checkpoint_every", 0},
                   {"checkpoint_dir", ""}, {"ply_dir", ""}});
    recon.flag<std::string>("--dataset", "/dataset", "Dataset root");
    recon.flag<std::string>("--out", "/out", "Output .v3dz");
    recon.flag<int>("--splats", "/optim/n_splats", "Splat budget per frame");
    recon.flag<int>("--steps", "/optim/n_steps", "Optimizer steps per frame");
    recon.flag<int>("--workers", "/workers", "Frames optimized concurrently");
    recon.flag<std::uint64_t>("--seed", "/optim/seed", "Global seed");
    recon.flag<int>("--views", "/views", "Use a uniformly decimated subset of N views (0: all)");
    recon.flag<int>("--frames", "/max_frames", "Only the first N frames (0: all)");
    recon.flag<std::string>("--trace-dir", "/trace_dir", "Write per-frame loss CSVs here");
    recon.flag<int>("--checkpoint-every", "/checkpoint_every", "Write checkpoint clouds every K steps");
    recon.flag<std::string>("--checkpoint-dir", "/checkpoint_dir", "Checkpoint directory");
    recon.flag<std::string>("--ply-dir", "/ply_dir", "Export each frame as PLY here");

    Command rend(app, "render", "Render orbit image sequences from a .v3dz",
                 {{"video", ""}, {"out", ""}, {"camera_file", ""}, {"eval", eval_defaults.to_json()}});
    rend.flag<std::string>("--video", "/video", "Input .v3dz");
    rend.flag<int>("--cameras", "/eval/n_cameras", "Number of orbit cameras");
    rend.flag<std::string>("--camera-file", "/camera_file", "Camera manifest to render instead of the orbit");
    rend.flag<int>("--resolution", "/eval/resolution", "Square image size");
    rend.flag<double>("--elevation", "/eval/elevation", "Orbit elevation (radians)");
    rend.flag<double>("--azimuth-offset", "/eval/azimuth_offset", "Orbit azimuth offset (radians)");
    rend.flag<std::string>("--out", "/out", "Output directory");

    Command eval(app, "evaluate", "CLIP-I (and PSNR) of a reconstructed video",
                 {{"video", ""}, {"reference", ""}, {"ground_truth", ""}, {"embedder", default_embedder()},
                  {"out", ""}, {"eval", eval_defaults.to_json()}});
    eval.flag<std::string>("--video", "/video", "Input .v3dz");
    eval.flag<std::string>("--reference", "/reference", "Reference image (PNG)");
    eval.flag<std::string>("--ground-truth", "/ground_truth", "Ground-truth .v3dz for PSNR");
    eval.flag<std::string>("--embedder", "/embedder", std::string("surrogate or http://host:port (default: $") + kEmbedUrlEnv + " or surrogate)");
    eval.flag<int>("--cameras", "/eval/n_cameras", "Number of evaluation cameras");
    eval.flag<int>("--resolution", "/eval/resolution", "Evaluation render size");
    eval.flag<double>("--elevation", "/eval/elevation", "Orbit elevation (radians)");
    eval.flag<double>("--azimuth-offset", "/eval/azimuth_offset", "Orbit azimuth offset (radians)");
    eval.flag<std::string>("--out", "/out", "Report JSON path; the table goes next to it as .txt");

    Command abl(app, "ablate", "Run a view-count / motion ablation grid",
                {{"dataset", ""}, {"out", ""}, {"optim", optim_defaults.to_json()}, {"embedder", default_embedder()},
                 {"workers", 1}});
    abl.flag<std::string>("--dataset", "/dataset", "Dataset root (motion grids use ROOT/motion_<value>)");
    abl.flag<std::string>("--grid", "/grid_file", "Grid JSON (docs/ablation_grid.schema.json)");
    abl.flag<std::string>("--embedder", "/embedder", "surrogate or http://host:port");
    abl.flag<int>("--workers", "/workers", "Frames optimized concurrently");
    abl.flag<int>("--splats", "/optim/n_splats", "Splat budget per frame");
    abl.flag<int>("--steps", "/optim/n_steps", "Optimizer steps per frame");
    abl.flag<std::string>("--out", "/out", "Output directory");

    auto* verify = app.add_subcommand("verify", "Recompute and check the config hash of an output");
    std::string verify_target;
    verify->add_option("path", verify_target, "A .v3dz, report JSON, or output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (synth.app()->parsed()) return cmd_synth(synth.resolve());
        if (recon.app()->parsed()) return cmd_reconstruct(recon.resolve());
        if (rend.app()->parsed()) return cmd_render(rend.resolve());
        if (eval.app()->parsed()) return cmd_evaluate(eval.resolve());
        if (abl.app()->parsed()) return cmd_ablate(abl.resolve());
        if (verify->parsed()) return cmd_verify(verify_target);
    } catch (const UsageError& e) {
        std::fprintf(stderr, "vid3d: usage error: %s\n", e.what());
        return kExitUsage;
    } catch (const InvalidArgument& e) {
        std::fprintf(stderr, "vid3d: usage error: %s\n", e.what());
        return kExitUsage;
    } catch (const EmbedError& e) {
        std::fprintf(stderr, "vid3d: embedding service: %s\n", e.what());
        return kExitService;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "vid3d: error: %s\n", e.what());
        return kExitRuntime;
    }
    return kExitUsage;
}
