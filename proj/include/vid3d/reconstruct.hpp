#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "vid3d/camera.hpp"
#include "vid3d/gaussian.hpp"
#include "vid3d/image.hpp"
#include "vid3d/rasterizer.hpp"

namespace vid3d {

struct View {
    Camera camera;
    Image image;
};

/// Posed images of one timestep.
struct FrameViewSet {
    std::vector<View> views;
    int frame_index = 0;

    int width() const { return views.empty() ? 0 : views.front().image.width; }
    int height() const { return views.empty() ? 0 : views.front().image.height; }

    /// Throws InvalidArgument unless there is at least one view and every
    /// image/camera shares one resolution.
    void validate() const;

    /// Least-squares point closest to every optical axis (the orbit look-at).
    Eigen::Vector3d look_at() const;

    /// Views at the given positions, in order.
    FrameViewSet subset(const std::vector<int>& indices) const;
};

struct LearningRates {
    double means = 1.6e-4;  // multiplied by OptimConfig::scene_extent
    double log_scales = 5e-3;
    double rotations = 1e-3;
    double opacity = 5e-2;
    double color = 2.5e-3;
};

enum class ViewSelection { RoundRobin, Random };

struct OptimConfig {
    int n_splats = 100000;
    int n_steps = 4000;
    LearningRates lr;
    double lambda_dssim = 0.2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-15;
    std::uint64_t seed = 0;
    double prune_opacity_threshold = 0.005;
    int prune_interval = 500;
    double scene_extent = 1.0;  // radius of the initialization ball
    double init_opacity = 0.1;
    Eigen::Vector3f background = Eigen::Vector3f::Ones();
    ViewSelection view_selection = ViewSelection::RoundRobin;
    RenderOptions render;

    void validate() const;
    nlohmann::json to_json() const;
    static OptimConfig from_json(const nlohmann::json& j);
};

struct StepRecord {
    int step = 0;
    double loss = 0.0;
    double psnr_train = 0.0;
};

struct FrameResult {
    GaussianCloud cloud;
    std::vector<StepRecord> trace;
};

/// Initial cloud: means uniform in a ball of radius scene_extent around the
/// view set's look-at point, isotropic scales at half the expected
/// nearest-neighbour spacing, opacity init_opacity, colors drawn from target
/// pixels. Deterministic given config.seed.
GaussianCloud init_cloud(const FrameViewSet& views, const OptimConfig& config);

/// View index used at `step` under round-robin selection.
inline int round_robin_view(int step, int n_views) { return step % n_views; }

/// Called every `interval` steps with the step count completed so far.
struct CheckpointHook {
    int interval = 0;
    std::function<void(int step, const GaussianCloud&)> fn;
};

/// Fits one cloud to one view set. Throws NonFiniteLossError naming the step
/// when the loss stops being finite.
FrameResult optimize_frame(const FrameViewSet& views, const OptimConfig& config,
                           const CheckpointHook& checkpoint = {});

/// Removes splats whose opacity is below `threshold`; returns the kept indices.
std::vector<std::size_t> prune_cloud(GaussianCloud& cloud, double threshold);

/// CSV with header "step,loss,psnr_train".
void write_loss_trace_csv(const std::filesystem::path& path, const std::vector<StepRecord>& trace);

}  // namespace vid3d
