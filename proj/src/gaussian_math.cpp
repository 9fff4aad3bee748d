#include "vid3d/gaussian_math.hpp"

#include <cmath>

#include <Eigen/Geometry>

#include "vid3d/error.hpp"

namespace vid3d {

Eigen::Matrix3d quat_to_rotation(const Eigen::Vector4d& q) {
    const double w = q[0], x = q[1], y = q[2], z = q[3];
    Eigen::Matrix3d r;
    r << 1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y),
        2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x),
        2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y);
    return r;
}

Eigen::Vector4d quat_multiply(const Eigen::Vector4d& a, const Eigen::Vector4d& b) {
    return {a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
            a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
            a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
            a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0]};
}

Eigen::Vector4d rotation_to_quat(const Eigen::Matrix3d& r) {
    const Eigen::Quaterniond q(r);
    Eigen::Vector4d out(q.w(), q.x(), q.y(), q.z());
    if (out[0] < 0.0) out = -out;
    return out.normalized();
}

Eigen::Matrix3d covariance3d(const Eigen::Vector4d& rotation, const Eigen::Vector3d& log_scale) {
    if (!rotation.allFinite() || !log_scale.allFinite()) {
        throw InvalidArgument("covariance3d: non-finite rotation or log_scale");
    }
    const double n = rotation.norm();
    if (n == 0.0) throw InvalidArgument("covariance3d: zero quaternion");
    const Eigen::Matrix3d r = quat_to_rotation(rotation / n);
    const Eigen::Vector3d var = (2.0 * log_scale).array().exp();
    if (!var.allFinite()) throw InvalidArgument("covariance3d: scale overflow");
    Eigen::Matrix3d sigma = r * var.asDiagonal() * r.transpose();
    return 0.5 * (sigma + sigma.transpose());
}

Eigen::Matrix<double, 2, 3> projection_jacobian(const Camera& cam, const Eigen::Vector3d& t) {
    const double iz = 1.0 / t.z();
    Eigen::Matrix<double, 2, 3> j;
    j << cam.fx * iz, 0.0, -cam.fx * t.x() * iz * iz,
        0.0, cam.fy * iz, -cam.fy * t.y() * iz * iz;
    return j;
}

Projection project(const Gaussian3D& g, const Camera& cam) {
    Projection p;
    const Eigen::Vector3d t = cam.to_camera(g.mean.cast<double>());
    p.depth = t.z();
    if (!(t.z() > cam.near) || t.z() > cam.far) return p;

    const Eigen::Matrix3d sigma = covariance3d(g.rotation.cast<double>(), g.log_scale.cast<double>());
    const Eigen::Matrix<double, 2, 3> m = projection_jacobian(cam, t) * cam.rotation;
    const Eigen::Matrix2d cov = m * sigma * m.transpose();

    p.mean2d = {cam.fx * t.x() / t.z() + cam.cx, cam.fy * t.y() / t.z() + cam.cy};
    p.cov2d_raw = {cov(0, 0), 0.5 * (cov(0, 1) + cov(1, 0)), cov(1, 1)};
    p.cov2d = {p.cov2d_raw.a + kLowPassDilation, p.cov2d_raw.b, p.cov2d_raw.c + kLowPassDilation};
    p.culled = false;
    return p;
}

}  // namespace vid3d
