#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "vid3d/camera.hpp"
#include "vid3d/gaussian.hpp"
#include "vid3d/reconstruct.hpp"

namespace vid3d {

/// Ground-truth animated cloud: a base cloud moved by a rigid per-frame
/// trajectory (yaw about +z plus a vertical bob) and an optional per-splat
/// oscillation. Every frame is a closed-form function of (base, frame index).
struct SyntheticScene {
    GaussianCloud base;
    double motion_amplitude = 0.0;   // peak yaw in radians; bob and oscillation scale with it
    double oscillation = 0.0;        // per-splat oscillation amplitude, fraction of motion_amplitude
    int period_frames = 25;
    std::vector<Eigen::Vector3f> oscillation_dirs;
    std::vector<float> oscillation_phase;

    /// Random anisotropic blobs inside a ball of radius 0.7 around the origin.
    static SyntheticScene blobs(int n_gaussians, std::uint64_t seed, double motion_amplitude = 0.0,
                                double oscillation = 0.0);

    /// Blobs arranged on a ring in the z = 0 plane; strongly view dependent silhouette.
    static SyntheticScene ring(int n_gaussians, std::uint64_t seed, double motion_amplitude = 0.0,
                               double oscillation = 0.0);

    GaussianCloud frame(int index) const;
};

/// Adds N(0, sigma) to every parameter of every splat (colors clamped to
/// [0, 1], rotations renormalized). Deterministic in `seed`.
GaussianCloud add_parameter_noise(const GaussianCloud& cloud, double sigma, std::uint64_t seed);

/// Renders the scene's ground-truth cloud for `frame` from every camera.
FrameViewSet render_view_set(const GaussianCloud& cloud, const std::vector<Camera>& cameras, int frame_index,
                             const RenderOptions& opts = {});

}  // namespace vid3d
