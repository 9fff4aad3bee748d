#include "vid3d/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <Eigen/Dense>

#include "vid3d/error.hpp"
#include "vid3d/loss.hpp"
#include "vid3d/metrics.hpp"

namespace vid3d {

void FrameViewSet::validate() const {
    if (views.empty()) throw InvalidArgument("view set has no views");
    const int w = width(), h = height();
    for (std::size_t i = 0; i < views.size(); ++i) {
        const auto& v = views[i];
        if (v.image.width != w || v.image.height != h || v.image.channels != 3) {
            throw InvalidArgument("view " + std::to_string(i) + " image resolution differs from view 0");
        }
        if (v.camera.width != w || v.camera.height != h) {
            throw InvalidArgument("view " + std::to_string(i) + " camera size does not match its image");
        }
        v.camera.validate();
    }
}

Eigen::Vector3d FrameViewSet::look_at() const {
    Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
    Eigen::Vector3d b = Eigen::Vector3d::Zero();
    for (const auto& v : views) {
        const Eigen::Vector3d d = v.camera.rotation.row(2).transpose();
        const Eigen::Matrix3d p = Eigen::Matrix3d::Identity() - d * d.transpose();
        a += p;
        b += p * v.camera.center();
    }
    return a.completeOrthogonalDecomposition().solve(b);
}

FrameViewSet FrameViewSet::subset(const std::vector<int>& indices) const {
    FrameViewSet out;
    out.frame_index = frame_index;
    for (int i : indices) {
        if (i < 0 || i >= static_cast<int>(views.size())) throw InvalidArgument("view index out of range");
        out.views.push_back(views[i]);
    }
    return out;
}

void OptimConfig::validate() const {
    if (n_splats < 1) throw InvalidArgument("n_splats must be >= 1");
    if (n_steps < 0) throw InvalidArgument("n_steps must be >= 0");
    if (!(lambda_dssim >= 0.0 && lambda_dssim <= 1.0)) throw InvalidArgument("lambda_dssim must lie in [0,1]");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(eps > 0.0)) {
        throw InvalidArgument("adaptive-gradient hyperparameters out of range");
    }
    if (!(init_opacity > 0.0 && init_opacity < 1.0)) throw InvalidArgument("init_opacity must lie in (0,1)");
    if (!(scene_extent > 0.0)) throw InvalidArgument("scene_extent must be positive");
    if (prune_interval < 0) throw InvalidArgument("prune_interval must be >= 0");
    if (render.tile_size < 1) throw InvalidArgument("tile size must be positive");
}

nlohmann::json OptimConfig::to_json() const {
    return {{"n_splats", n_splats},
            {"n_steps", n_steps},
            {"lr",
             {{"means", lr.means},
              {"log_scales", lr.log_scales},
              {"rotations", lr.rotations},
              {"opacity", lr.opacity},
              {"color", lr.color}}},
            {"lambda_dssim", lambda_dssim},
            {"beta1", beta1},
            {"beta2", beta2},
            {"eps", eps},
            {"seed", seed},
            {"prune_opacity_threshold", prune_opacity_threshold},
            {"prune_interval", prune_interval},
            {"scene_extent", scene_extent},
            {"init_opacity", init_opacity},
            {"background", {background.x(), background.y(), background.z()}},
            {"view_selection", view_selection == ViewSelection::RoundRobin ? "round_robin" : "random"},
            {"tile_size", render.tile_size}};
}

OptimConfig OptimConfig::from_json(const nlohmann::json& j) {
    OptimConfig c;
    try {
        c.n_splats = j.value("n_splats", c.n_splats);
        c.n_steps = j.value("n_steps", c.n_steps);
        if (j.contains("lr")) {
            const auto& l = j.at("lr");
            c.lr.means = l.value("means", c.lr.means);
            c.lr.log_scales = l.value("log_scales", c.lr.log_scales);
            c.lr.rotations = l.value("rotations", c.lr.rotations);
            c.lr.opacity = l.value("opacity", c.lr.opacity);
            c.lr.color = l.value("color", c.lr.color);
        }
        c.lambda_dssim = j.value("lambda_dssim", c.lambda_dssim);
        c.beta1 = j.value("beta1", c.beta1);
        c.beta2 = j.value("beta2", c.beta2);
        c.eps = j.value("eps", c.eps);
        c.seed = j.value("seed", c.seed);
        c.prune_opacity_threshold = j.value("prune_opacity_threshold", c.prune_opacity_threshold);
        c.prune_interval = j.value("prune_interval", c.prune_interval);
        c.scene_extent = j.value("scene_extent", c.scene_extent);
        c.init_opacity = j.value("init_opacity", c.init_opacity);
        if (j.contains("background")) {
            const auto& b = j.at("background");
            if (b.size() != 3) throw InvalidArgument("background must have 3 components");
            c.background = Eigen::Vector3f(b.at(0).get<float>(), b.at(1).get<float>(), b.at(2).get<float>());
        }
        const std::string sel = j.value("view_selection", std::string("round_robin"));
        if (sel == "round_robin") {
            c.view_selection = ViewSelection::RoundRobin;
        } else if (sel == "random") {
            c.view_selection = ViewSelection::Random;
        } else {
            throw InvalidArgument("unknown view_selection '" + sel + "'");
        }
        c.render.tile_size = j.value("tile_size", c.render.tile_size);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("malformed optimizer config: ") + e.what());
    }
    c.validate();
    return c;
}

GaussianCloud init_cloud(const FrameViewSet& views, const OptimConfig& config) {
    views.validate();
    config.validate();
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);

    const Eigen::Vector3d center = views.look_at();
    const double radius = config.scene_extent;
    const int n = config.n_splats;
    // Mean nearest-neighbour distance of a uniform 3D point process:
    // Gamma(4/3) * (4 pi rho / 3)^(-1/3) with rho = n / (4/3 pi r^3).
    const double nn = 0.8930 * radius * std::cbrt(1.0 / n);
    const float log_sigma = static_cast<float>(std::log(0.5 * nn));

    // Color candidates: pixels that differ from the background, else all pixels.
    const Eigen::Vector3f bg = config.background;
    std::vector<Eigen::Vector3f> palette;
    for (const auto& v : views.views) {
        for (std::size_t p = 0; p < v.image.pixel_count(); ++p) {
            const Eigen::Vector3f c(v.image.data[p * 3], v.image.data[p * 3 + 1], v.image.data[p * 3 + 2]);
            if ((c - bg).cwiseAbs().maxCoeff() > 0.05f) palette.push_back(c);
        }
    }
    if (palette.empty()) {
        for (const auto& v : views.views)
            for (std::size_t p = 0; p < v.image.pixel_count(); ++p)
                palette.emplace_back(v.image.data[p * 3], v.image.data[p * 3 + 1], v.image.data[p * 3 + 2]);
    }
    std::uniform_int_distribution<std::size_t> pick(0, palette.size() - 1);

    GaussianCloud cloud;
    cloud.background = config.background;
    cloud.gaussians.resize(n);
    for (auto& g : cloud.gaussians) {
        Eigen::Vector3d p;
        do {
            p = {uni(rng), uni(rng), uni(rng)};
        } while (p.squaredNorm() > 1.0);
        g.mean = (center + radius * p).cast<float>();
        g.rotation = {1.0f, 0.0f, 0.0f, 0.0f};
        g.log_scale = Eigen::Vector3f::Constant(log_sigma);
        g.opacity_logit = static_cast<float>(logit(config.init_opacity));
        g.color = palette[pick(rng)];
    }
    return cloud;
}

namespace {

// Adaptive-moment state for the flat parameter vector of a cloud.
class Adam {
public:
    Adam(const OptimConfig& c, std::size_t n) : cfg_(c), m_(n * kP, 0.0), v_(n * kP, 0.0) {
        const auto& lr = c.lr;
        const double means = lr.means * c.scene_extent;
        lr_ = {means, means, means, lr.rotations, lr.rotations, lr.rotations, lr.rotations,
               lr.log_scales, lr.log_scales, lr.log_scales, lr.opacity, lr.color, lr.color, lr.color};
    }

    void step(GaussianCloud& cloud, const CloudGradients& g) {
        ++t_;
        const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
        const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
        std::array<float, kP> p{};
        std::array<double, kP> grad{};
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            Gaussian3D& gs = cloud.gaussians[i];
            pack_params(gs, p.data());
            for (int k = 0; k < 3; ++k) grad[k] = g.mean[i][k];
            for (int k = 0; k < 4; ++k) grad[3 + k] = g.rotation[i][k];
            for (int k = 0; k < 3; ++k) grad[7 + k] = g.log_scale[i][k];
            grad[10] = g.opacity_logit[i];
            for (int k = 0; k < 3; ++k) grad[11 + k] = g.color[i][k];
            for (int k = 0; k < kP; ++k) {
                const std::size_t idx = i * kP + k;
                m_[idx] = cfg_.beta1 * m_[idx] + (1.0 - cfg_.beta1) * grad[k];
                v_[idx] = cfg_.beta2 * v_[idx] + (1.0 - cfg_.beta2) * grad[k] * grad[k];
                const double mhat = m_[idx] / bc1, vhat = v_[idx] / bc2;
                p[k] = static_cast<float>(p[k] - lr_[k] * mhat / (std::sqrt(vhat) + cfg_.eps));
            }
            gs = unpack_params(p.data());
            gs.normalize_rotation();
            gs.color = gs.color.cwiseMax(0.0f).cwiseMin(1.0f);
        }
    }

    void keep(const std::vector<std::size_t>& kept) {
        std::vector<double> m(kept.size() * kP), v(kept.size() * kP);
        for (std::size_t j = 0; j < kept.size(); ++j) {
            std::copy_n(m_.begin() + kept[j] * kP, kP, m.begin() + j * kP);
            std::copy_n(v_.begin() + kept[j] * kP, kP, v.begin() + j * kP);
        }
        m_ = std::move(m);
        v_ = std::move(v);
    }

private:
    static constexpr int kP = Gaussian3D::kParamCount;
    const OptimConfig& cfg_;
    std::array<double, kP> lr_{};
    std::vector<double> m_, v_;
    int t_ = 0;
};

}  // namespace

std::vector<std::size_t> prune_cloud(GaussianCloud& cloud, double threshold) {
    std::vector<std::size_t> kept;
    std::vector<Gaussian3D> survivors;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (cloud.gaussians[i].opacity() >= threshold) {
            kept.push_back(i);
            survivors.push_back(cloud.gaussians[i]);
        }
    }
    cloud.gaussians = std::move(survivors);
    return kept;
}

FrameResult optimize_frame(const FrameViewSet& views, const OptimConfig& config,
                           const CheckpointHook& checkpoint) {
    FrameResult result;
    result.cloud = init_cloud(views, config);
    if (config.n_steps == 0) return result;

    const int n_views = static_cast<int>(views.views.size());
    Adam adam(config, result.cloud.size());
    std::mt19937_64 view_rng(config.seed ^ 0x5bd1e995ULL);
    std::uniform_int_distribution<int> view_pick(0, n_views - 1);
    result.trace.reserve(config.n_steps);

    for (int step = 0; step < config.n_steps; ++step) {
        const int vi = config.view_selection == ViewSelection::RoundRobin ? round_robin_view(step, n_views)
                                                                          : view_pick(view_rng);
        const View& view = views.views[vi];
        const RenderOutput out = render(result.cloud, view.camera, config.render);
        const LossResult loss = photometric_loss(out.image, view.image, config.lambda_dssim);
        if (!std::isfinite(loss.value)) {
            throw NonFiniteLossError(step, "non-finite loss at step " + std::to_string(step) + " (frame " +
                                               std::to_string(views.frame_index) + ", view " +
                                               std::to_string(vi) + ")");
        }
        result.trace.push_back({step, loss.value, psnr(out.image, view.image)});

        const CloudGradients grads = render_backward(result.cloud, view.camera, out, loss.grad, config.render);
        adam.step(result.cloud, grads);

        const int done = step + 1;
        if (config.prune_interval > 0 && done % config.prune_interval == 0) {
            adam.keep(prune_cloud(result.cloud, config.prune_opacity_threshold));
        }
        if (checkpoint.interval > 0 && checkpoint.fn && done % checkpoint.interval == 0) {
            checkpoint.fn(done, result.cloud);
        }
    }
    return result;
}

void write_loss_trace_csv(const std::filesystem::path& path, const std::vector<StepRecord>& trace) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "step,loss,psnr_train\n";
    out.precision(10);
    for (const auto& r : trace) out << r.step << ',' << r.loss << ',' << r.psnr_train << '\n';
}

}  // namespace vid3d
