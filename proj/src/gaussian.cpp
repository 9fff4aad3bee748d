#include "vid3d/gaussian.hpp"

#include <algorithm>

namespace vid3d {

bool Gaussian3D::valid(double quat_tol) const {
    if (!mean.allFinite() || !rotation.allFinite() || !log_scale.allFinite() ||
        !color.allFinite() || !std::isfinite(opacity_logit)) {
        return false;
    }
    if (std::abs(rotation.cast<double>().norm() - 1.0) > quat_tol) return false;
    const Eigen::Vector3d s = scale();
    if (!s.allFinite() || (s.array() <= 0.0).any()) return false;
    const double o = opacity();
    return o > 0.0 && o < 1.0;
}

void Gaussian3D::normalize_rotation() {
    const double n = rotation.cast<double>().norm();
    if (n > 0.0) {
        rotation = (rotation.cast<double>() / n).cast<float>();
    } else {
        rotation = Eigen::Vector4f(1.0f, 0.0f, 0.0f, 0.0f);
    }
}

bool GaussianCloud::valid(double quat_tol) const {
    return background.allFinite() &&
           std::all_of(gaussians.begin(), gaussians.end(),
                       [&](const Gaussian3D& g) { return g.valid(quat_tol); });
}

void pack_params(const Gaussian3D& g, float* out) {
    out = std::copy_n(g.mean.data(), 3, out);
    out = std::copy_n(g.rotation.data(), 4, out);
    out = std::copy_n(g.log_scale.data(), 3, out);
    *out++ = g.opacity_logit;
    std::copy_n(g.color.data(), 3, out);
}

Gaussian3D unpack_params(const float* in) {
    Gaussian3D g;
    std::copy_n(in, 3, g.mean.data());
    std::copy_n(in + 3, 4, g.rotation.data());
    std::copy_n(in + 7, 3, g.log_scale.data());
    g.opacity_logit = in[10];
    std::copy_n(in + 11, 3, g.color.data());
    return g;
}

}  // namespace vid3d
