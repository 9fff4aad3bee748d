#pragma once

#include <Eigen/Core>

#include "vid3d/camera.hpp"
#include "vid3d/gaussian.hpp"

namespace vid3d {

/// Diagonal dilation added to every projected covariance (pixel^2).
inline constexpr double kLowPassDilation = 0.3;

/// Rotation matrix of the normalized quaternion (w, x, y, z).
Eigen::Matrix3d quat_to_rotation(const Eigen::Vector4d& q);

/// Hamilton product a*b, both (w, x, y, z).
Eigen::Vector4d quat_multiply(const Eigen::Vector4d& a, const Eigen::Vector4d& b);

/// Quaternion (w, x, y, z) of a proper rotation matrix.
Eigen::Vector4d rotation_to_quat(const Eigen::Matrix3d& r);

/// Sigma = R S S^T R^T with S = diag(exp(log_scale)).
/// Throws InvalidArgument on non-finite input or a zero quaternion.
Eigen::Matrix3d covariance3d(const Eigen::Vector4d& rotation, const Eigen::Vector3d& log_scale);

/// Symmetric 2x2 matrix [[a, b], [b, c]] in pixel^2.
struct Covariance2D {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;

    double det() const { return a * c - b * b; }
};

/// Perspective (EWA) projection of one splat.
struct Projection {
    Eigen::Vector2d mean2d = Eigen::Vector2d::Zero();
    Covariance2D cov2d;       // dilated by kLowPassDilation
    Covariance2D cov2d_raw;   // J W Sigma W^T J^T before dilation
    double depth = 0.0;
    bool culled = true;
};

/// Jacobian of the pinhole projection at camera-space point `t`.
Eigen::Matrix<double, 2, 3> projection_jacobian(const Camera& cam, const Eigen::Vector3d& t);

/// Projects a splat. Splats with depth <= near (or beyond far) come back with
/// `culled = true` and are otherwise left unfilled.
Projection project(const Gaussian3D& g, const Camera& cam);

}  // namespace vid3d
