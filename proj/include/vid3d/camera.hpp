#pragma once

#include <vector>

#include <Eigen/Core>

namespace vid3d {

/// Pinhole intrinsics plus image size and depth clip planes.
struct Intrinsics {
    int width = 256;
    int height = 256;
    double fx = 0.0;
    double fy = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    double near = 0.1;
    double far = 100.0;

    /// Square-pixel intrinsics for a camera at `radius` from the look-at point
    /// such that a sphere of `object_radius` covers `coverage` of the image width.
    static Intrinsics for_orbit(int width, int height, double radius = kDefaultOrbitRadius,
                                double object_radius = 1.0, double coverage = 0.8);

    static constexpr double kDefaultOrbitRadius = 2.0;
};

/// World-to-camera pinhole camera. Camera space is x right, y down, z forward;
/// pixel (col, row) has its center at integer coordinates.
struct Camera {
    double fx = 1.0;
    double fy = 1.0;
    double cx = 0.0;
    double cy = 0.0;
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();
    int width = 1;
    int height = 1;
    double near = 0.1;
    double far = 100.0;

    Eigen::Vector3d to_camera(const Eigen::Vector3d& world) const {
        return rotation * world + translation;
    }
    Eigen::Vector3d center() const { return -rotation.transpose() * translation; }

    /// Throws InvalidArgument when an invariant is violated.
    void validate(double tol = 1e-6) const;
};

/// Camera at `center` whose optical axis points at `target`, world up = +z.
Camera look_at_camera(const Eigen::Vector3d& center, const Eigen::Vector3d& target,
                      const Intrinsics& intrinsics);

/// `n` cameras on a ring around `look_at`. Camera k sits at azimuth
/// azimuth_offset + 2*pi*k/n (measured from +x towards +y) and the given elevation.
std::vector<Camera> orbit_cameras(int n, double radius, double elevation,
                                  const Eigen::Vector3d& look_at, const Intrinsics& intrinsics,
                                  double azimuth_offset = 0.0);

}  // namespace vid3d
