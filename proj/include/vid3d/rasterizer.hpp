#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "vid3d/camera.hpp"
#include "vid3d/gaussian.hpp"
#include "vid3d/gaussian_math.hpp"
#include "vid3d/image.hpp"

namespace vid3d {

inline constexpr int kDefaultTileSize = 16;
/// Compositing for a pixel stops once transmittance falls below this.
inline constexpr double kTransmittanceCutoff = 1e-4;
inline constexpr double kMaxAlpha = 0.99;
/// Footprint radius in standard deviations; pixels outside are not touched.
/// The kernel is exp(-q/2) minus its tangent at this radius, rescaled to 1 at
/// the center, so it vanishes smoothly there.
inline constexpr double kFootprintSigma = 3.0;

struct RenderOptions {
    int tile_size = kDefaultTileSize;
    /// Parallelize across tiles. Output is bit-identical either way.
    bool parallel = true;
};

/// Screen-space state of one splat after projection.
struct ProjectedSplat {
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    Covariance2D cov;
    Covariance2D conic;  // inverse of cov
    double depth = 0.0;
    double opacity = 0.0;
    Eigen::Vector3d color = Eigen::Vector3d::Zero();
    // Inclusive pixel bounding box of the 3-sigma ellipse, clipped to the image.
    int x_min = 0, x_max = -1, y_min = 0, y_max = -1;
    bool culled = true;
};

std::vector<ProjectedSplat> project_cloud(const GaussianCloud& cloud, const Camera& cam);

/// Per-tile splat lists in CSR layout: the ids of tile t are
/// ids[offsets[t] .. offsets[t+1]), sorted by (depth, splat index).
struct TileBins {
    int tile_size = kDefaultTileSize;
    int tiles_x = 0;
    int tiles_y = 0;
    std::vector<std::uint32_t> offsets;
    std::vector<std::uint32_t> ids;

    int tile_count() const { return tiles_x * tiles_y; }
    std::span<const std::uint32_t> tile(int t) const {
        return {ids.data() + offsets[t], ids.data() + offsets[t + 1]};
    }
};

TileBins tile_bin(std::span<const ProjectedSplat> splats, int width, int height,
                  int tile_size = kDefaultTileSize);

struct RenderOutput {
    Image image;
    std::vector<double> image_f64;            // same pixels before float rounding
    std::vector<float> alpha;                 // H*W accumulated opacity
    std::vector<std::uint32_t> contributors;  // H*W splats composited per pixel

    // Saved compositing state consumed by render_backward.
    std::vector<double> final_transmittance;  // H*W
    std::vector<std::uint32_t> last_entry;    // H*W, one past the last tile-list entry used
    int tile_size = kDefaultTileSize;
    std::uint64_t state_key = 0;
};

RenderOutput render(const GaussianCloud& cloud, const Camera& cam, const RenderOptions& opts = {});

/// d Loss / d parameter for every splat; zero for culled splats.
struct CloudGradients {
    std::vector<Eigen::Vector3d> mean;
    std::vector<Eigen::Vector4d> rotation;
    std::vector<Eigen::Vector3d> log_scale;
    std::vector<double> opacity_logit;
    std::vector<Eigen::Vector3d> color;

    explicit CloudGradients(std::size_t n = 0);
    std::size_t size() const { return mean.size(); }
    bool all_finite() const;
    bool all_zero() const;
};

/// Analytic adjoint of render(). `upstream` is d Loss / d image in the image's
/// interleaved H*W*3 layout. Throws InvalidArgument when `forward` was not
/// produced from this cloud and camera.
CloudGradients render_backward(const GaussianCloud& cloud, const Camera& cam,
                               const RenderOutput& forward, std::span<const double> upstream,
                               const RenderOptions& opts = {});

}  // namespace vid3d
