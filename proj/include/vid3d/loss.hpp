#pragma once

#include <vector>

#include "vid3d/image.hpp"

namespace vid3d {

/// Structural similarity with an 11x11 Gaussian window (sigma 1.5),
/// C1 = 0.01^2, C2 = 0.03^2, zero padding; averaged over pixels and channels.
double ssim(const Image& a, const Image& b);

struct LossResult {
    double value = 0.0;
    double l1 = 0.0;
    double ssim = 1.0;
    std::vector<double> grad;  // d value / d rendered, interleaved like the image
};

/// (1 - lambda) * mean|rendered - target| + lambda * (1 - SSIM(rendered, target)).
/// Throws ShapeMismatch when the images differ in shape.
LossResult photometric_loss(const Image& rendered, const Image& target, double lambda_dssim);

}  // namespace vid3d
