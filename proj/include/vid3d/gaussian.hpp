#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace vid3d {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }

/// One anisotropic splat. Parameters are stored in float32, which is also the
/// on-disk precision, so a save/load round trip is bit-exact.
struct Gaussian3D {
    Eigen::Vector3f mean = Eigen::Vector3f::Zero();
    Eigen::Vector4f rotation{1.0f, 0.0f, 0.0f, 0.0f};  // (w, x, y, z), unit norm
    Eigen::Vector3f log_scale = Eigen::Vector3f::Zero();
    float opacity_logit = 0.0f;
    Eigen::Vector3f color = Eigen::Vector3f::Constant(0.5f);

    double opacity() const { return sigmoid(opacity_logit); }
    Eigen::Vector3d scale() const { return log_scale.cast<double>().array().exp(); }

    /// Number of scalar parameters; also the float count of one serialized record.
    static constexpr int kParamCount = 14;

    /// Checks the per-splat invariants (unit quaternion within `quat_tol`,
    /// finite scales, opacity strictly inside (0,1)).
    bool valid(double quat_tol = 1e-6) const;

    void normalize_rotation();
};

struct GaussianCloud {
    std::vector<Gaussian3D> gaussians;
    Eigen::Vector3f background = Eigen::Vector3f::Ones();

    std::size_t size() const { return gaussians.size(); }
    bool empty() const { return gaussians.empty(); }
    bool valid(double quat_tol = 1e-6) const;
};

/// Flattens a splat into the serialized parameter order:
/// mean(3) rotation(4) log_scale(3) opacity_logit(1) color(3).
void pack_params(const Gaussian3D& g, float* out);
Gaussian3D unpack_params(const float* in);

}  // namespace vid3d
