#include "vid3d/synthetic.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "vid3d/error.hpp"
#include "vid3d/gaussian_math.hpp"

namespace vid3d {

namespace {

Eigen::Vector4f random_quat(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::Vector4d q(n(rng), n(rng), n(rng), n(rng));
    q.normalize();
    if (q[0] < 0.0) q = -q;
    return q.cast<float>();
}

SyntheticScene make_scene(int n, std::uint64_t seed, double motion, double osc,
                          const std::function<Eigen::Vector3d(std::mt19937_64&)>& place) {
    if (n < 1) throw InvalidArgument("synthetic scene needs at least one gaussian");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::normal_distribution<double> nrm(0.0, 1.0);
    SyntheticScene s;
    s.motion_amplitude = motion;
    s.oscillation = osc;
    s.base.background = Eigen::Vector3f::Ones();
    s.base.gaussians.resize(n);
    for (auto& g : s.base.gaussians) {
        g.mean = place(rng).cast<float>();
        g.rotation = random_quat(rng);
        for (int a = 0; a < 3; ++a) {
            g.log_scale[a] = static_cast<float>(std::log(0.04 + 0.08 * u01(rng)));
        }
        g.opacity_logit = static_cast<float>(logit(0.6 + 0.35 * u01(rng)));
        for (int c = 0; c < 3; ++c) g.color[c] = static_cast<float>(0.05 + 0.9 * u01(rng));
    }
    s.oscillation_dirs.resize(n);
    s.oscillation_phase.resize(n);
    for (int i = 0; i < n; ++i) {
        s.oscillation_dirs[i] = Eigen::Vector3d(nrm(rng), nrm(rng), nrm(rng)).normalized().cast<float>();
        s.oscillation_phase[i] = static_cast<float>(2.0 * std::numbers::pi * u01(rng));
    }
    return s;
}

}  // namespace

SyntheticScene SyntheticScene::blobs(int n, std::uint64_t seed, double motion, double osc) {
    return make_scene(n, seed, motion, osc, [](std::mt19937_64& rng) {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        Eigen::Vector3d p;
        do {
            p = {u(rng), u(rng), u(rng)};
        } while (p.squaredNorm() > 1.0);
        return Eigen::Vector3d(0.7 * p);
    });
}

SyntheticScene SyntheticScene::ring(int n, std::uint64_t seed, double motion, double osc) {
    return make_scene(n, seed, motion, osc, [](std::mt19937_64& rng) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::normal_distribution<double> jitter(0.0, 0.06);
        const double a = 2.0 * std::numbers::pi * u(rng);
        return Eigen::Vector3d(0.55 * std::cos(a) + jitter(rng), 0.55 * std::sin(a) + jitter(rng), jitter(rng));
    });
}

GaussianCloud SyntheticScene::frame(int index) const {
    const double phase = 2.0 * std::numbers::pi * index / period_frames;
    const double yaw = motion_amplitude * std::sin(phase);
    const Eigen::Vector3d shift(0.0, 0.0, 0.25 * motion_amplitude * std::sin(2.0 * phase));
    const Eigen::Vector4d q_yaw(std::cos(0.5 * yaw), 0.0, 0.0, std::sin(0.5 * yaw));
    const Eigen::Matrix3d r_yaw = quat_to_rotation(q_yaw);
    const double osc_amp = 0.05 * oscillation * motion_amplitude;

    GaussianCloud out = base;
    for (std::size_t i = 0; i < out.size(); ++i) {
        Gaussian3D& g = out.gaussians[i];
        Eigen::Vector3d m = base.gaussians[i].mean.cast<double>();
        if (osc_amp != 0.0) {
            m += osc_amp * std::sin(phase + oscillation_phase[i]) * oscillation_dirs[i].cast<double>();
        }
        g.mean = (r_yaw * m + shift).cast<float>();
        g.rotation = quat_multiply(q_yaw, base.gaussians[i].rotation.cast<double>()).normalized().cast<float>();
    }
    return out;
}

GaussianCloud add_parameter_noise(const GaussianCloud& cloud, double sigma, std::uint64_t seed) {
    if (!(sigma >= 0.0)) throw InvalidArgument("noise sigma must be >= 0");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    GaussianCloud out = cloud;
    for (auto& g : out.gaussians) {
        auto jitter = [&](auto& v) {
            for (int i = 0; i < v.size(); ++i) v[i] += static_cast<float>(sigma * n(rng));
        };
        jitter(g.mean);
        jitter(g.rotation);
        jitter(g.log_scale);
        g.opacity_logit += static_cast<float>(sigma * n(rng));
        jitter(g.color);
        g.color = g.color.cwiseMax(0.0f).cwiseMin(1.0f);
        if (g.rotation.norm() < 1e-6f) g.rotation = Eigen::Vector4f(1, 0, 0, 0);
        g.normalize_rotation();
    }
    return out;
}

FrameViewSet render_view_set(const GaussianCloud& cloud, const std::vector<Camera>& cameras, int frame_index,
                             const RenderOptions& opts) {
    FrameViewSet set;
    set.frame_index = frame_index;
    for (const auto& cam : cameras) set.views.push_back({cam, render(cloud, cam, opts).image});
    return set;
}

}  // namespace vid3d
