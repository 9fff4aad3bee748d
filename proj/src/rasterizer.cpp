#include "vid3d/rasterizer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numeric>
#include <string_view>

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>

#include "vid3d/error.hpp"

namespace vid3d {

namespace {

constexpr double kFootprintQ = kFootprintSigma * kFootprintSigma;

// Per tile-list entry gradient slot: d/d mean2d (2), d/d conic (3), d/d opacity, d/d color (3).
constexpr int kSlot = 9;

template <class Fn>
void for_each_tile(int tiles, bool parallel, Fn&& fn) {
    if (parallel && tiles > 1) {
        tbb::parallel_for(tbb::blocked_range<int>(0, tiles), [&](const tbb::blocked_range<int>& r) {
            for (int t = r.begin(); t != r.end(); ++t) fn(t);
        });
    } else {
        for (int t = 0; t < tiles; ++t) fn(t);
    }
}

std::uint64_t state_key_of(const GaussianCloud& cloud, const Camera& cam, int tile_size) {
    std::vector<float> buf(cloud.size() * Gaussian3D::kParamCount + 3);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        pack_params(cloud.gaussians[i], buf.data() + i * Gaussian3D::kParamCount);
    }
    std::copy_n(cloud.background.data(), 3, buf.end() - 3);
    std::array<double, 21> camv{cam.fx, cam.fy, cam.cx, cam.cy, cam.near, cam.far,
                                static_cast<double>(cam.width), static_cast<double>(cam.height),
                                static_cast<double>(tile_size)};
    std::copy_n(cam.rotation.data(), 9, camv.begin() + 9);
    std::copy_n(cam.translation.data(), 3, camv.begin() + 18);
    const std::hash<std::string_view> h;
    const std::uint64_t a = h({reinterpret_cast<const char*>(buf.data()), buf.size() * sizeof(float)});
    const std::uint64_t b = h({reinterpret_cast<const char*>(camv.data()), camv.size() * sizeof(double)});
    return a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
}

// Footprint kernel: exp(-q/2) minus its tangent line at the footprint
// boundary, rescaled to 1 at the center. It reaches zero with zero slope at
// q = kFootprintQ, so alpha is C1 in every splat parameter.
const double kKernelEdge = std::exp(-0.5 * kFootprintQ);
const double kKernelNorm = 1.0 / (1.0 - kKernelEdge * (1.0 + 0.5 * kFootprintQ));

struct Fragment {
    double alpha;    // clamped to kMaxAlpha
    double kernel;   // footprint weight in [0,1]
    double dkernel;  // d kernel / d q
    double dx, dy;
    bool clamped;
};

// Evaluates splat `s` at pixel (px, py). Returns false outside the footprint.
inline bool evaluate(const ProjectedSplat& s, double px, double py, Fragment& f) {
    f.dx = px - s.mean.x();
    f.dy = py - s.mean.y();
    const double q = s.conic.a * f.dx * f.dx + 2.0 * s.conic.b * f.dx * f.dy + s.conic.c * f.dy * f.dy;
    if (q >= kFootprintQ) return false;
    const double e = std::exp(-0.5 * q);
    f.kernel = (e - kKernelEdge * (1.0 + 0.5 * (kFootprintQ - q))) * kKernelNorm;
    f.dkernel = 0.5 * (kKernelEdge - e) * kKernelNorm;
    const double a = s.opacity * f.kernel;
    f.clamped = a > kMaxAlpha;
    f.alpha = f.clamped ? kMaxAlpha : a;
    return true;
}

}  // namespace

std::vector<ProjectedSplat> project_cloud(const GaussianCloud& cloud, const Camera& cam) {
    std::vector<ProjectedSplat> out(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Gaussian3D& g = cloud.gaussians[i];
        const Projection p = project(g, cam);
        ProjectedSplat& s = out[i];
        s.depth = p.depth;
        if (p.culled) continue;
        const double det = p.cov2d.det();
        if (!(det > 0.0)) continue;
        s.mean = p.mean2d;
        s.cov = p.cov2d;
        s.conic = {p.cov2d.c / det, -p.cov2d.b / det, p.cov2d.a / det};
        s.opacity = g.opacity();
        s.color = g.color.cast<double>();
        const double rx = kFootprintSigma * std::sqrt(p.cov2d.a);
        const double ry = kFootprintSigma * std::sqrt(p.cov2d.c);
        s.x_min = std::max(0, static_cast<int>(std::ceil(s.mean.x() - rx)));
        s.x_max = std::min(cam.width - 1, static_cast<int>(std::floor(s.mean.x() + rx)));
        s.y_min = std::max(0, static_cast<int>(std::ceil(s.mean.y() - ry)));
        s.y_max = std::min(cam.height - 1, static_cast<int>(std::floor(s.mean.y() + ry)));
        // Off-screen footprints never touch a pixel.
        if (!std::isfinite(rx) || !std::isfinite(ry) || s.x_min > s.x_max || s.y_min > s.y_max) continue;
        s.culled = false;
    }
    return out;
}

TileBins tile_bin(std::span<const ProjectedSplat> splats, int width, int height, int tile_size) {
    if (tile_size < 1) throw InvalidArgument("tile size must be positive");
    TileBins bins;
    bins.tile_size = tile_size;
    bins.tiles_x = (width + tile_size - 1) / tile_size;
    bins.tiles_y = (height + tile_size - 1) / tile_size;
    const int tiles = bins.tile_count();

    std::vector<std::uint32_t> order;
    order.reserve(splats.size());
    for (std::uint32_t i = 0; i < splats.size(); ++i) {
        if (!splats[i].culled) order.push_back(i);
    }
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (splats[a].depth != splats[b].depth) return splats[a].depth < splats[b].depth;
        return a < b;
    });

    // Counting pass then fill; visiting splats in sorted order keeps every list sorted.
    std::vector<std::uint32_t> counts(tiles + 1, 0);
    for (std::uint32_t id : order) {
        const auto& s = splats[id];
        for (int ty = s.y_min / tile_size; ty <= s.y_max / tile_size; ++ty)
            for (int tx = s.x_min / tile_size; tx <= s.x_max / tile_size; ++tx) ++counts[ty * bins.tiles_x + tx + 1];
    }
    std::partial_sum(counts.begin(), counts.end(), counts.begin());
    bins.offsets = counts;
    bins.ids.resize(bins.offsets.back());
    std::vector<std::uint32_t> cursor(bins.offsets.begin(), bins.offsets.end() - 1);
    for (std::uint32_t id : order) {
        const auto& s = splats[id];
        for (int ty = s.y_min / tile_size; ty <= s.y_max / tile_size; ++ty)
            for (int tx = s.x_min / tile_size; tx <= s.x_max / tile_size; ++tx)
                bins.ids[cursor[ty * bins.tiles_x + tx]++] = id;
    }
    return bins;
}

RenderOutput render(const GaussianCloud& cloud, const Camera& cam, const RenderOptions& opts) {
    cam.validate();
    const int w = cam.width, h = cam.height;
    const auto splats = project_cloud(cloud, cam);
    const TileBins bins = tile_bin(splats, w, h, opts.tile_size);
    const Eigen::Vector3d bg = cloud.background.cast<double>();

    RenderOutput out;
    out.image = Image(w, h, 3);
    out.image_f64.assign(out.image.data.size(), 0.0);
    out.alpha.assign(static_cast<std::size_t>(w) * h, 0.0f);
    out.contributors.assign(out.alpha.size(), 0);
    out.final_transmittance.assign(out.alpha.size(), 1.0);
    out.last_entry.assign(out.alpha.size(), 0);
    out.tile_size = opts.tile_size;
    out.state_key = state_key_of(cloud, cam, opts.tile_size);

    for_each_tile(bins.tile_count(), opts.parallel, [&](int t) {
        const auto list = bins.tile(t);
        const int x0 = (t % bins.tiles_x) * bins.tile_size;
        const int y0 = (t / bins.tiles_x) * bins.tile_size;
        const int x1 = std::min(w, x0 + bins.tile_size);
        const int y1 = std::min(h, y0 + bins.tile_size);
        const int tw = x1 - x0;
        const std::size_t tile_pixels = static_cast<std::size_t>(tw) * (y1 - y0);

        // Splat-major traversal: each pixel still sees splats in list order,
        // but only pixels inside a splat's bounding box are visited.
        std::vector<double> tr(tile_pixels, 1.0);
        std::vector<Eigen::Vector3d> color(tile_pixels, Eigen::Vector3d::Zero());
        std::vector<std::uint32_t> count(tile_pixels, 0), last(tile_pixels, 0);
        std::vector<char> done(tile_pixels, 0);
        std::size_t active = tile_pixels;
        for (std::uint32_t k = 0; k < list.size() && active > 0; ++k) {
            const ProjectedSplat& s = splats[list[k]];
            const int sx0 = std::max(x0, s.x_min), sx1 = std::min(x1 - 1, s.x_max);
            const int sy0 = std::max(y0, s.y_min), sy1 = std::min(y1 - 1, s.y_max);
            for (int py = sy0; py <= sy1; ++py) {
                for (int px = sx0; px <= sx1; ++px) {
                    const std::size_t lp = static_cast<std::size_t>(py - y0) * tw + (px - x0);
                    if (done[lp]) continue;
                    Fragment f;
                    if (!evaluate(s, px, py, f)) continue;
                    color[lp] += (tr[lp] * f.alpha) * s.color;
                    tr[lp] *= 1.0 - f.alpha;
                    ++count[lp];
                    last[lp] = k + 1;
                    if (tr[lp] < kTransmittanceCutoff) {
                        done[lp] = 1;
                        --active;
                    }
                }
            }
        }
        for (int py = y0; py < y1; ++py) {
            for (int px = x0; px < x1; ++px) {
                const std::size_t lp = static_cast<std::size_t>(py - y0) * tw + (px - x0);
                const std::size_t pix = static_cast<std::size_t>(py) * w + px;
                const Eigen::Vector3d c = color[lp] + tr[lp] * bg;
                for (int ch = 0; ch < 3; ++ch) {
                    out.image_f64[pix * 3 + ch] = c[ch];
                    out.image.data[pix * 3 + ch] = static_cast<float>(c[ch]);
                }
                out.alpha[pix] = static_cast<float>(1.0 - tr[lp]);
                out.contributors[pix] = count[lp];
                out.final_transmittance[pix] = tr[lp];
                out.last_entry[pix] = last[lp];
            }
        }
    });
    return out;
}

CloudGradients::CloudGradients(std::size_t n)
    : mean(n, Eigen::Vector3d::Zero()),
      rotation(n, Eigen::Vector4d::Zero()),
      log_scale(n, Eigen::Vector3d::Zero()),
      opacity_logit(n, 0.0),
      color(n, Eigen::Vector3d::Zero()) {}

bool CloudGradients::all_finite() const {
    for (std::size_t i = 0; i < size(); ++i) {
        if (!mean[i].allFinite() || !rotation[i].allFinite() || !log_scale[i].allFinite() ||
            !std::isfinite(opacity_logit[i]) || !color[i].allFinite()) {
            return false;
        }
    }
    return true;
}

bool CloudGradients::all_zero() const {
    for (std::size_t i = 0; i < size(); ++i) {
        if (!mean[i].isZero(0.0) || !rotation[i].isZero(0.0) || !log_scale[i].isZero(0.0) ||
            opacity_logit[i] != 0.0 || !color[i].isZero(0.0)) {
            return false;
        }
    }
    return true;
}

CloudGradients render_backward(const GaussianCloud& cloud, const Camera& cam, const RenderOutput& forward,
                               std::span<const double> upstream, const RenderOptions& opts) {
    cam.validate();
    const int w = cam.width, h = cam.height;
    const std::size_t npix = static_cast<std::size_t>(w) * h;
    if (upstream.size() != npix * 3) throw ShapeMismatch("render_backward: upstream gradient has wrong size");
    if (forward.final_transmittance.size() != npix || forward.tile_size != opts.tile_size ||
        forward.state_key != state_key_of(cloud, cam, opts.tile_size)) {
        throw InvalidArgument("render_backward: saved forward state does not match cloud/camera");
    }

    const auto splats = project_cloud(cloud, cam);
    const TileBins bins = tile_bin(splats, w, h, opts.tile_size);
    const Eigen::Vector3d bg = cloud.background.cast<double>();
    std::vector<double> slots(bins.ids.size() * kSlot, 0.0);

    for_each_tile(bins.tile_count(), opts.parallel, [&](int t) {
        const auto list = bins.tile(t);
        double* tile_slots = slots.data() + static_cast<std::size_t>(bins.offsets[t]) * kSlot;
        const int x0 = (t % bins.tiles_x) * bins.tile_size;
        const int y0 = (t / bins.tiles_x) * bins.tile_size;
        const int x1 = std::min(w, x0 + bins.tile_size);
        const int y1 = std::min(h, y0 + bins.tile_size);
        const int tw = x1 - x0;
        const std::size_t tile_pixels = static_cast<std::size_t>(tw) * (y1 - y0);

        // Per-pixel state walking the list back to front: transmittance in
        // front of the current splat and the color composited behind it.
        std::vector<double> tr(tile_pixels);
        std::vector<Eigen::Vector3d> behind(tile_pixels), up(tile_pixels);
        std::vector<std::uint32_t> last(tile_pixels);
        std::uint32_t max_last = 0;
        for (int py = y0; py < y1; ++py) {
            for (int px = x0; px < x1; ++px) {
                const std::size_t lp = static_cast<std::size_t>(py - y0) * tw + (px - x0);
                const std::size_t pix = static_cast<std::size_t>(py) * w + px;
                tr[lp] = forward.final_transmittance[pix];
                behind[lp] = tr[lp] * bg;
                up[lp] = Eigen::Vector3d(upstream[pix * 3], upstream[pix * 3 + 1], upstream[pix * 3 + 2]);
                last[lp] = up[lp].isZero(0.0) ? 0 : forward.last_entry[pix];
                max_last = std::max(max_last, last[lp]);
            }
        }
        for (std::uint32_t k = max_last; k-- > 0;) {
            const ProjectedSplat& s = splats[list[k]];
            const int sx0 = std::max(x0, s.x_min), sx1 = std::min(x1 - 1, s.x_max);
            const int sy0 = std::max(y0, s.y_min), sy1 = std::min(y1 - 1, s.y_max);
            double* slot = tile_slots + static_cast<std::size_t>(k) * kSlot;
            for (int py = sy0; py <= sy1; ++py) {
                for (int px = sx0; px <= sx1; ++px) {
                    const std::size_t lp = static_cast<std::size_t>(py - y0) * tw + (px - x0);
                    if (k >= last[lp]) continue;
                    Fragment f;
                    if (!evaluate(s, px, py, f)) continue;
                    const Eigen::Vector3d& g = up[lp];
                    const double one_minus = 1.0 - f.alpha;
                    const double t_i = tr[lp] / one_minus;
                    const double wgt = f.alpha * t_i;
                    slot[6] += wgt * g[0];
                    slot[7] += wgt * g[1];
                    slot[8] += wgt * g[2];
                    const double d_alpha = g.dot(t_i * s.color - behind[lp] / one_minus);
                    if (!f.clamped) {
                        slot[5] += d_alpha * f.kernel;
                        const double d_q = s.opacity * f.dkernel * d_alpha;
                        const auto& c = s.conic;
                        slot[0] += -d_q * 2.0 * (c.a * f.dx + c.b * f.dy);
                        slot[1] += -d_q * 2.0 * (c.b * f.dx + c.c * f.dy);
                        slot[2] += d_q * f.dx * f.dx;
                        slot[3] += d_q * 2.0 * f.dx * f.dy;
                        slot[4] += d_q * f.dy * f.dy;
                    }
                    behind[lp] += wgt * s.color;
                    tr[lp] = t_i;
                }
            }
        }
    });

    // Deterministic reduction in tile order.
    std::vector<std::array<double, kSlot>> per_splat(cloud.size(), std::array<double, kSlot>{});
    for (std::size_t e = 0; e < bins.ids.size(); ++e) {
        auto& acc = per_splat[bins.ids[e]];
        for (int j = 0; j < kSlot; ++j) acc[j] += slots[e * kSlot + j];
    }

    CloudGradients grads(cloud.size());
    auto chain = [&](std::size_t i) {
        const ProjectedSplat& s = splats[i];
        if (s.culled) return;
        const Gaussian3D& g = cloud.gaussians[i];
        const auto& d = per_splat[i];
        const double o = s.opacity;
        grads.opacity_logit[i] = d[5] * o * (1.0 - o);
        grads.color[i] = Eigen::Vector3d(d[6], d[7], d[8]);

        // conic -> 2D covariance
        Eigen::Matrix2d conic;
        conic << s.conic.a, s.conic.b, s.conic.b, s.conic.c;
        Eigen::Matrix2d g_conic;
        g_conic << d[2], 0.5 * d[3], 0.5 * d[3], d[4];
        const Eigen::Matrix2d g_cov2 = -conic * g_conic * conic;

        // 2D covariance -> 3D covariance and projection Jacobian
        const Eigen::Vector3d tcam = cam.to_camera(g.mean.cast<double>());
        const Eigen::Vector4d q_raw = g.rotation.cast<double>();
        const double qn = q_raw.norm();
        const Eigen::Vector4d q = q_raw / qn;
        const Eigen::Matrix3d rq = quat_to_rotation(q);
        const Eigen::Vector3d var = (2.0 * g.log_scale.cast<double>()).array().exp();
        const Eigen::Matrix3d sigma = rq * var.asDiagonal() * rq.transpose();
        const Eigen::Matrix<double, 2, 3> jac = projection_jacobian(cam, tcam);
        const Eigen::Matrix<double, 2, 3> m = jac * cam.rotation;

        const Eigen::Matrix3d g_sigma = m.transpose() * g_cov2 * m;
        const Eigen::Matrix<double, 2, 3> g_m = 2.0 * g_cov2 * m * sigma;
        const Eigen::Matrix<double, 2, 3> g_j = g_m * cam.rotation.transpose();

        const double x = tcam.x(), y = tcam.y(), z = tcam.z();
        const double iz = 1.0 / z, iz2 = iz * iz, iz3 = iz2 * iz;
        Eigen::Vector3d g_t = Eigen::Vector3d::Zero();
        g_t.x() += g_j(0, 2) * (-cam.fx * iz2) + d[0] * cam.fx * iz;
        g_t.y() += g_j(1, 2) * (-cam.fy * iz2) + d[1] * cam.fy * iz;
        g_t.z() += g_j(0, 0) * (-cam.fx * iz2) + g_j(0, 2) * (2.0 * cam.fx * x * iz3) +
                   g_j(1, 1) * (-cam.fy * iz2) + g_j(1, 2) * (2.0 * cam.fy * y * iz3) -
                   d[0] * cam.fx * x * iz2 - d[1] * cam.fy * y * iz2;
        grads.mean[i] = cam.rotation.transpose() * g_t;

        // 3D covariance -> scale and rotation
        const Eigen::Matrix3d local = rq.transpose() * g_sigma * rq;
        for (int a = 0; a < 3; ++a) grads.log_scale[i][a] = local(a, a) * 2.0 * var[a];
        const Eigen::Matrix3d g_r = 2.0 * g_sigma * rq * var.asDiagonal();
        const double qw = q[0], qx = q[1], qy = q[2], qz = q[3];
        Eigen::Matrix3d dw, dx, dy, dz;
        dw << 0, -qz, qy, qz, 0, -qx, -qy, qx, 0;
        dx << 0, qy, qz, qy, -2 * qx, -qw, qz, qw, -2 * qx;
        dy << -2 * qy, qx, qw, qx, 0, qz, -qw, qz, -2 * qy;
        dz << -2 * qz, -qw, qx, qw, -2 * qz, qy, qx, qy, 0;
        const Eigen::Vector4d g_qhat(2.0 * g_r.cwiseProduct(dw).sum(), 2.0 * g_r.cwiseProduct(dx).sum(),
                                     2.0 * g_r.cwiseProduct(dy).sum(), 2.0 * g_r.cwiseProduct(dz).sum());
        grads.rotation[i] = (g_qhat - q * q.dot(g_qhat)) / qn;
    };
    if (opts.parallel) {
        tbb::parallel_for(std::size_t{0}, cloud.size(), chain);
    } else {
        for (std::size_t i = 0; i < cloud.size(); ++i) chain(i);
    }
    return grads;
}

}  // namespace vid3d
