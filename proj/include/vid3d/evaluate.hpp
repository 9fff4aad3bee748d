#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "vid3d/embedder.hpp"
#include "vid3d/image.hpp"
#include "vid3d/reconstruct.hpp"
#include "vid3d/video3d.hpp"

namespace vid3d {

inline constexpr int kEvalCameras = 10;

struct EvalOptions {
    int n_cameras = kEvalCameras;
    int resolution = 256;
    double elevation = 0.0;
    double azimuth_offset = 0.0;  // radians; nonzero places cameras between training azimuths
    double radius = Intrinsics::kDefaultOrbitRadius;
    RenderOptions render;

    nlohmann::json to_json() const;
    static EvalOptions from_json(const nlohmann::json& j);
};

/// Orbit cameras used for evaluation, aimed at the video's look-at point
/// (origin when the video carries no cameras).
std::vector<Camera> eval_cameras(const Video3D& video, const EvalOptions& options = {});

/// result[k][f]: frame f seen from evaluation camera k.
std::vector<std::vector<Image>> render_eval_videos(const Video3D& video, const EvalOptions& options = {});

struct EvalReport {
    std::string label;
    double clip_i = 0.0;
    std::vector<std::vector<double>> similarity;  // [view][frame]
    std::optional<double> psnr;
    std::string embedder;
    nlohmann::json config = nlohmann::json::object();  // n_views, motion, seed, ...
    std::string config_hash;
    std::optional<std::string> error;  // set for failed ablation cells

    nlohmann::json to_json() const;
    static EvalReport from_json(const nlohmann::json& j);
};

/// Mean of the similarity matrix, summed in (view, frame) order.
double matrix_mean(const std::vector<std::vector<double>>& m);

/// Embeds the reference once and every frame of every video; frames are
/// embedded concurrently. Embedder failures are rethrown with the same type
/// and the (view, frame) coordinates prepended.
EvalReport clip_i(const Image& reference, const std::vector<std::vector<Image>>& videos, Embedder& embedder);

/// Mean PSNR over all (view, frame) pairs.
double mean_psnr(const std::vector<std::vector<Image>>& rendered, const std::vector<std::vector<Image>>& ground_truth);

/// Renders, embeds and, when `ground_truth` is given, scores PSNR against
/// the ground truth rendered from the same cameras (matched by frame index).
EvalReport evaluate_video(const Video3D& video, const Image& reference, Embedder& embedder,
                          const Video3D* ground_truth = nullptr, const EvalOptions& options = {});

/// Two-column aligned table. Values are printed with four decimals.
std::string format_table(const std::string& key_header, const std::string& value_header,
                         const std::vector<std::pair<std::string, double>>& rows);

/// Multi-column aligned table; empty cells print as "-".
std::string format_table(const std::vector<std::string>& headers,
                         const std::vector<std::vector<std::string>>& rows);

/// Ablation grid, read from JSON (schema: docs/ablation_grid.schema.json).
struct AblationGrid {
    std::vector<int> views;
    std::vector<double> motion;  // empty: use the dataset root as-is
    std::vector<std::uint64_t> seeds{0};
    int max_frames = 0;          // 0: all frames
    nlohmann::json optim = nlohmann::json::object();  // OptimConfig overrides
    EvalOptions eval;

    void validate() const;
    nlohmann::json to_json() const;
    static AblationGrid from_json(const nlohmann::json& j);
};

/// Directory holding the dataset for one motion amplitude: root/motion_<value>.
std::filesystem::path motion_dataset_path(const std::filesystem::path& root, double motion);
std::string format_number(double v);

/// Positions of an n-view subset of a `total`-view orbit by uniform
/// decimation (every total/n-th view). Throws InvalidArgument unless n divides total.
std::vector<int> decimate_views(int total, int n);

/// One reconstruction + evaluation per (motion, views, seed) cell. Failed
/// cells carry `error` and the remaining cells still run.
std::vector<EvalReport> ablate(const std::filesystem::path& dataset_root, const AblationGrid& grid,
                               const OptimConfig& config, Embedder& embedder, int workers = 1);

/// Per (views, motion) means over seeds, ordered by view count then motion.
std::string ablation_summary(const std::vector<EvalReport>& reports);

}  // namespace vid3d
