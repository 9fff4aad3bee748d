#include "vid3d/camera.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Geometry>

#include "vid3d/error.hpp"

namespace vid3d {

Intrinsics Intrinsics::for_orbit(int width, int height, double radius, double object_radius,
                                 double coverage) {
    if (width < 1 || height < 1) throw InvalidArgument("image size must be at least 1x1");
    if (!(radius > object_radius) || !(object_radius > 0.0) || !(coverage > 0.0)) {
        throw InvalidArgument("orbit intrinsics need radius > object_radius > 0 and coverage > 0");
    }
    // The silhouette of a sphere seen from distance d has half-angle asin(r/d).
    const double half_angle = std::asin(object_radius / radius);
    const double f = 0.5 * coverage * width / std::tan(half_angle);
    Intrinsics in;
    in.width = width;
    in.height = height;
    in.fx = f;
    in.fy = f;
    in.cx = 0.5 * (width - 1);
    in.cy = 0.5 * (height - 1);
    in.near = 0.1 * radius;
    in.far = 50.0 * radius;
    return in;
}

void Camera::validate(double tol) const {
    if (width < 1 || height < 1) throw InvalidArgument("camera width/height must be >= 1");
    if (!(near > 0.0) || !(far > near)) throw InvalidArgument("camera needs 0 < near < far");
    if (!std::isfinite(fx) || !std::isfinite(fy) || !std::isfinite(cx) || !std::isfinite(cy) ||
        fx <= 0.0 || fy <= 0.0) {
        throw InvalidArgument("camera focal lengths must be finite and positive");
    }
    if (!rotation.allFinite() || !translation.allFinite()) {
        throw InvalidArgument("camera pose must be finite");
    }
    const double ortho = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
    if (ortho > tol || std::abs(rotation.determinant() - 1.0) > tol) {
        throw InvalidArgument("camera rotation is not a proper rotation (orthonormality error " +
                              std::to_string(ortho) + ")");
    }
}

Camera look_at_camera(const Eigen::Vector3d& center, const Eigen::Vector3d& target,
                      const Intrinsics& in) {
    const Eigen::Vector3d up(0.0, 0.0, 1.0);
    const Eigen::Vector3d forward = (target - center).normalized();
    Eigen::Vector3d right = forward.cross(up);
    if (right.norm() < 1e-12) throw InvalidArgument("look-at direction is parallel to world up");
    right.normalize();
    const Eigen::Vector3d down = forward.cross(right);

    Camera cam;
    cam.rotation.row(0) = right.transpose();
    cam.rotation.row(1) = down.transpose();
    cam.rotation.row(2) = forward.transpose();
    cam.translation = -cam.rotation * center;
    cam.fx = in.fx;
    cam.fy = in.fy;
    cam.cx = in.cx;
    cam.cy = in.cy;
    cam.width = in.width;
    cam.height = in.height;
    cam.near = in.near;
    cam.far = in.far;
    return cam;
}

std::vector<Camera> orbit_cameras(int n, double radius, double elevation,
                                  const Eigen::Vector3d& look_at, const Intrinsics& intrinsics,
                                  double azimuth_offset) {
    if (n < 1) throw InvalidArgument("orbit needs at least one camera");
    if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidArgument("orbit radius must be positive");
    if (!(std::abs(elevation) < 0.5 * std::numbers::pi)) {
        throw InvalidArgument("orbit elevation must lie strictly inside (-pi/2, pi/2)");
    }
    std::vector<Camera> cams;
    cams.reserve(n);
    for (int k = 0; k < n; ++k) {
        const double az = azimuth_offset + 2.0 * std::numbers::pi * k / n;
        const Eigen::Vector3d offset(std::cos(elevation) * std::cos(az),
                                     std::cos(elevation) * std::sin(az), std::sin(elevation));
        cams.push_back(look_at_camera(look_at + radius * offset, look_at, intrinsics));
    }
    return cams;
}

}  // namespace vid3d
