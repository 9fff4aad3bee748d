#pragma once

#include "vid3d/image.hpp"

namespace vid3d {

/// Reported in place of +infinity for identical images.
inline constexpr double kPsnrSentinel = 99.0;

/// 10 log10(1 / MSE) over all pixels and channels (peak value 1).
/// Throws ShapeMismatch when shapes differ.
double psnr(const Image& rendered, const Image& ground_truth);

double mse(const Image& a, const Image& b);

}  // namespace vid3d
