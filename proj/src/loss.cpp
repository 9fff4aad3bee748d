#include "vid3d/loss.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "vid3d/error.hpp"

namespace vid3d {

namespace {

constexpr int kRadius = 5;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

std::array<double, 2 * kRadius + 1> window() {
    std::array<double, 2 * kRadius + 1> w{};
    double sum = 0.0;
    for (int i = -kRadius; i <= kRadius; ++i) {
        w[i + kRadius] = std::exp(-(i * i) / (2.0 * kSigma * kSigma));
        sum += w[i + kRadius];
    }
    for (auto& v : w) v /= sum;
    return w;
}

// Separable zero-padded "same" blur of a W x H plane. With a symmetric kernel
// this operator is self-adjoint, which the backward pass relies on.
std::vector<double> blur(const std::vector<double>& in, int w, int h) {
    static const auto k = window();
    std::vector<double> tmp(in.size()), out(in.size());
    for (int y = 0; y < h; ++y) {
        const double* row = in.data() + static_cast<std::size_t>(y) * w;
        double* dst = tmp.data() + static_cast<std::size_t>(y) * w;
        std::fill(dst, dst + w, 0.0);
        for (int i = -kRadius; i <= kRadius; ++i) {
            const double wk = k[i + kRadius];
            const int xs = std::max(0, -i), xe = std::min(w, w - i);
            for (int x = xs; x < xe; ++x) dst[x] += wk * row[x + i];
        }
    }
    for (int y = 0; y < h; ++y) {
        const int lo = std::max(-kRadius, -y), hi = std::min(kRadius, h - 1 - y);
        double* dst = out.data() + static_cast<std::size_t>(y) * w;
        std::fill(dst, dst + w, 0.0);
        for (int i = lo; i <= hi; ++i) {
            const double wk = k[i + kRadius];
            const double* src = tmp.data() + static_cast<std::size_t>(y + i) * w;
            for (int x = 0; x < w; ++x) dst[x] += wk * src[x];
        }
    }
    return out;
}

// Mean SSIM over all channels; when `grad` is non-null it receives
// d(mean SSIM)/d a in the interleaved layout.
double ssim_impl(const Image& a, const Image& b, std::vector<double>* grad) {
    const int w = a.width, h = a.height, nc = a.channels;
    const std::size_t n = a.pixel_count();
    const double inv_total = 1.0 / static_cast<double>(n * nc);
    double total = 0.0;
    if (grad) grad->assign(a.data.size(), 0.0);

    std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
    for (int c = 0; c < nc; ++c) {
        for (std::size_t p = 0; p < n; ++p) {
            x[p] = a.data[p * nc + c];
            y[p] = b.data[p * nc + c];
            xx[p] = x[p] * x[p];
            yy[p] = y[p] * y[p];
            xy[p] = x[p] * y[p];
        }
        const auto mu_x = blur(x, w, h), mu_y = blur(y, w, h);
        const auto e_xx = blur(xx, w, h), e_yy = blur(yy, w, h), e_xy = blur(xy, w, h);

        std::vector<double> d_mu(n), d_exx(n), d_exy(n);
        for (std::size_t p = 0; p < n; ++p) {
            const double mx = mu_x[p], my = mu_y[p];
            const double sxx = e_xx[p] - mx * mx, syy = e_yy[p] - my * my, sxy = e_xy[p] - mx * my;
            const double a1 = 2.0 * mx * my + kC1, a2 = 2.0 * sxy + kC2;
            const double b1 = mx * mx + my * my + kC1, b2 = sxx + syy + kC2;
            const double s = (a1 * a2) / (b1 * b2);
            total += s;
            if (grad) {
                d_mu[p] = (2.0 * my * (a2 - a1) / (b1 * b2) - 2.0 * mx * s * (1.0 / b1 - 1.0 / b2)) * inv_total;
                d_exx[p] = -s / b2 * inv_total;
                d_exy[p] = 2.0 * a1 / (b1 * b2) * inv_total;
            }
        }
        if (grad) {
            const auto g_mu = blur(d_mu, w, h), g_xx = blur(d_exx, w, h), g_xy = blur(d_exy, w, h);
            for (std::size_t p = 0; p < n; ++p) {
                (*grad)[p * nc + c] = g_mu[p] + 2.0 * x[p] * g_xx[p] + y[p] * g_xy[p];
            }
        }
    }
    return total * inv_total;
}

}  // namespace

double ssim(const Image& a, const Image& b) {
    if (!a.same_shape(b)) throw ShapeMismatch("ssim: image shapes differ");
    return ssim_impl(a, b, nullptr);
}

LossResult photometric_loss(const Image& rendered, const Image& target, double lambda_dssim) {
    if (!rendered.same_shape(target)) throw ShapeMismatch("photometric_loss: image shapes differ");
    if (!(lambda_dssim >= 0.0 && lambda_dssim <= 1.0)) throw InvalidArgument("lambda_dssim must lie in [0,1]");
    LossResult r;
    const std::size_t n = rendered.data.size();
    r.grad.assign(n, 0.0);
    if (n == 0) return r;
    const double inv_n = 1.0 / static_cast<double>(n);
    double l1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = static_cast<double>(rendered.data[i]) - target.data[i];
        l1 += std::abs(d);
        r.grad[i] = (1.0 - lambda_dssim) * (d > 0.0 ? inv_n : (d < 0.0 ? -inv_n : 0.0));
    }
    r.l1 = l1 * inv_n;
    if (lambda_dssim > 0.0) {
        std::vector<double> g_ssim;
        r.ssim = ssim_impl(rendered, target, &g_ssim);
        for (std::size_t i = 0; i < n; ++i) r.grad[i] -= lambda_dssim * g_ssim[i];
    } else {
        r.ssim = ssim_impl(rendered, target, nullptr);
    }
    r.value = (1.0 - lambda_dssim) * r.l1 + lambda_dssim * (1.0 - r.ssim);
    return r;
}

}  // namespace vid3d
