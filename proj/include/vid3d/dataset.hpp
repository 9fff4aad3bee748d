#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "vid3d/image.hpp"
#include "vid3d/reconstruct.hpp"
#include "vid3d/synthetic.hpp"

namespace vid3d {

/// Expected length of a temporal seed.
inline constexpr int kDefaultSeedFrames = 25;

/// The 2D video that fixes the scene dynamics, plus its conditioning image.
struct SeedVideo {
    std::vector<Image> frames;
    double fps = 8.0;
    Image reference_image;
    std::optional<double> motion_score;  // opaque metadata

    void validate() const;
};

/// On-disk layout:
///   root/meta.json                      fps, motion_score, resolution, background
///   root/reference.png
///   root/seed/frame_%04d.png
///   root/frames/%04d/cameras.json       camera manifest (see camera_io.hpp)
///   root/frames/%04d/view_%02d.png
///   root/ground_truth.v3dz              synthetic datasets only
struct Dataset {
    SeedVideo seed;
    std::vector<FrameViewSet> frames;
    Eigen::Vector3f background = Eigen::Vector3f::Ones();
};

/// Loads a dataset. Throws MissingFrameError when a seed frame has no frame
/// directory, CountMismatchError when manifest and images disagree, and
/// ImageReadError for unreadable images.
Dataset ingest_dataset(const std::filesystem::path& root);

void export_dataset(const std::filesystem::path& root, const Dataset& dataset);

std::filesystem::path ground_truth_path(const std::filesystem::path& root);

/// Builds a dataset in memory from a synthetic scene: each frame's ground
/// truth rendered from orbit_cameras(n_views, elevation 0) at the default
/// orbit intrinsics, images quantized to 8 bit. View 0 of each frame is that
/// frame's seed image; frame 0 view 0 is the reference image.
Dataset make_synthetic_dataset(const SyntheticScene& scene, int n_frames, int n_views, int resolution,
                               std::optional<double> motion_score = std::nullopt);

/// Writes make_synthetic_dataset() to `root` plus the ground-truth clouds.
void synth_dataset(const SyntheticScene& scene, int n_frames, int n_views, int resolution,
                   const std::filesystem::path& root, std::optional<double> motion_score = std::nullopt);

}  // namespace vid3d
